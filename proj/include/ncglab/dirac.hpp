#pragma once

// Projection chains, eigenvalue sequences, Dirac assembly D = sum alpha_k Q_k,
// the block formula for [D,a], the tail estimate, and the certified greedy
// subsequence selection.

#include <ncglab/models.hpp>
#include <ncglab/opcore.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ncglab {

/// Coordinate projections P_1 <= ... <= P_m at ambient truncation N,
/// P_k = projection onto the first rank(k) basis vectors, P_0 = 0.
class ProjectionChain {
 public:
  ProjectionChain(std::size_t ambient_dim, std::vector<std::size_t> ranks)
      : ambient_(ambient_dim), ranks_(std::move(ranks)) {
    if (ambient_ < 1) throw std::invalid_argument("ProjectionChain: ambient dim must be >= 1");
    if (ranks_.empty()) throw std::invalid_argument("ProjectionChain: needs at least one rank");
    std::size_t prev = 0;
    for (std::size_t r : ranks_) {
      if (r <= prev) throw std::invalid_argument("ProjectionChain: ranks must be strictly increasing and >= 1");
      prev = r;
    }
    if (ranks_.back() > ambient_) {
      throw std::invalid_argument("ProjectionChain: top rank exceeds ambient dimension");
    }
  }

  std::size_t ambient_dim() const { return ambient_; }
  std::size_t length() const { return ranks_.size(); }
  const std::vector<std::size_t>& ranks() const { return ranks_; }
  std::size_t top_rank() const { return ranks_.back(); }

  /// rank(0) == 0 by the P_0 = 0 convention.
  std::size_t rank(std::size_t k) const {
    if (k == 0) return 0;
    if (k > ranks_.size()) throw std::out_of_range("ProjectionChain: index past chain length");
    return ranks_[k - 1];
  }

  std::size_t multiplicity(std::size_t k) const { return rank(k) - rank(k - 1); }

  /// P_k as an ambient-dimension matrix.
  OperatorMatrix projection(std::size_t k) const {
    const std::size_t r = rank(k);
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(ambient_), static_cast<Eigen::Index>(ambient_));
    for (std::size_t t = 0; t < r; ++t) m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t)) = 1.0;
    return OperatorMatrix(std::move(m));
  }

 private:
  std::size_t ambient_;
  std::vector<std::size_t> ranks_;
};

/// Real eigenvalue sequence with nondecreasing |alpha_k|.
class AlphaSequence {
 public:
  enum class Kind { harmonic, power, geometric, custom };

  static AlphaSequence harmonic() { return AlphaSequence(Kind::harmonic); }

  static AlphaSequence power(double exponent) {
    if (!(exponent > 0.0)) throw std::invalid_argument("power alpha needs exponent > 0");
    AlphaSequence a(Kind::power);
    a.param_ = exponent;
    return a;
  }

  static AlphaSequence geometric(double ratio) {
    if (!(ratio > 1.0)) throw std::invalid_argument("geometric alpha needs ratio > 1");
    AlphaSequence a(Kind::geometric);
    a.param_ = ratio;
    return a;
  }

  static AlphaSequence custom(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("custom alpha needs at least one value");
    for (std::size_t k = 1; k < values.size(); ++k) {
      if (std::abs(values[k]) < std::abs(values[k - 1])) {
        throw std::invalid_argument("custom alpha must have nondecreasing |alpha_k|");
      }
    }
    AlphaSequence a(Kind::custom);
    a.values_ = std::move(values);
    return a;
  }

  /// Optional sign pattern cycled over k; magnitudes are unchanged.
  AlphaSequence with_signs(std::vector<int> pattern) const {
    for (int s : pattern) {
      if (s != 1 && s != -1) throw std::invalid_argument("sign pattern entries must be +1 or -1");
    }
    AlphaSequence a = *this;
    a.signs_ = std::move(pattern);
    return a;
  }

  Kind kind() const { return kind_; }
  double parameter() const { return param_; }

  /// Custom sequences are finite; every other kind is unbounded.
  std::optional<std::size_t> finite_length() const {
    if (kind_ == Kind::custom) return values_.size();
    return std::nullopt;
  }

  /// True when a custom list looks bounded (final increments negligible).
  bool bounded_suspect() const {
    if (kind_ != Kind::custom || values_.size() < 2) return false;
    const double last = std::abs(values_.back());
    const double prev = std::abs(values_[values_.size() - 2]);
    return last - prev <= 1e-12 * std::max(1.0, last);
  }

  /// Stateful generator; next() yields alpha_1, alpha_2, ...
  struct Cursor {
    const AlphaSequence* seq;
    std::size_t k = 0;
    double harmonic_sum = 0.0;

    double next() {
      ++k;
      double v = 0.0;
      switch (seq->kind_) {
        case Kind::harmonic:
          harmonic_sum += 1.0 / static_cast<double>(k);
          v = harmonic_sum;
          break;
        case Kind::power:
          v = std::pow(static_cast<double>(k), seq->param_);
          break;
        case Kind::geometric:
          v = std::pow(seq->param_, static_cast<double>(k));
          break;
        case Kind::custom:
          if (k > seq->values_.size()) {
            throw std::out_of_range("custom alpha sequence exhausted at k = " + std::to_string(k));
          }
          v = seq->values_[k - 1];
          break;
      }
      if (!seq->signs_.empty()) v *= seq->signs_[(k - 1) % seq->signs_.size()];
      return v;
    }
  };

  Cursor cursor() const { return Cursor{this}; }

  std::vector<double> values(std::size_t count) const {
    std::vector<double> out;
    out.reserve(count);
    Cursor c = cursor();
    for (std::size_t k = 0; k < count; ++k) out.push_back(c.next());
    return out;
  }

  double value(std::size_t k) const {
    if (k < 1) throw std::invalid_argument("alpha index is 1-based");
    Cursor c = cursor();
    double v = 0.0;
    for (std::size_t t = 0; t < k; ++t) v = c.next();
    return v;
  }

  std::string label() const {
    char buf[64];
    switch (kind_) {
      case Kind::harmonic: return "harmonic";
      case Kind::power:
        std::snprintf(buf, sizeof(buf), "power(%.12g)", param_);
        return buf;
      case Kind::geometric:
        std::snprintf(buf, sizeof(buf), "geometric(%.12g)", param_);
        return buf;
      case Kind::custom: return "custom[" + std::to_string(values_.size()) + "]";
    }
    return "?";
  }

 private:
  explicit AlphaSequence(Kind k) : kind_(k) {}

  Kind kind_;
  double param_ = 0.0;
  std::vector<double> values_;
  std::vector<int> signs_;
};

struct BlockIndex {
  std::size_t i = 1;
  std::size_t j = 1;
};

struct BlockExtent {
  std::size_t first = 1;  // 1-based start within 1..r_m
  std::size_t size = 1;
};

/// Q_k extents: Q_k covers basis vectors rank(k-1)+1 .. rank(k).
inline std::vector<BlockExtent> blocks(const ProjectionChain& chain) {
  std::vector<BlockExtent> out;
  out.reserve(chain.length());
  for (std::size_t k = 1; k <= chain.length(); ++k) {
    out.push_back(BlockExtent{chain.rank(k - 1) + 1, chain.multiplicity(k)});
  }
  return out;
}

/// D = sum alpha_k Q_k as a diagonal matrix of dimension top_rank.
inline OperatorMatrix assemble_dirac(const ProjectionChain& chain, const AlphaSequence& alpha) {
  const auto av = alpha.values(chain.length());
  std::vector<double> diag;
  diag.reserve(chain.top_rank());
  for (std::size_t k = 1; k <= chain.length(); ++k) {
    for (std::size_t t = 0; t < chain.multiplicity(k); ++t) diag.push_back(av[k - 1]);
  }
  return OperatorMatrix::diagonal(diag);
}

inline void require_top_rank(const OperatorMatrix& a, const ProjectionChain& chain, const char* what) {
  if (a.dim() != chain.top_rank()) {
    throw std::invalid_argument(std::string(what) + ": matrix dim " + std::to_string(a.dim()) +
                                " != chain top rank " + std::to_string(chain.top_rank()));
  }
}

/// a_{ij} = Q_i a Q_j as a dense (possibly rectangular) block.
inline CMatrix block_of(const OperatorMatrix& a, const ProjectionChain& chain, BlockIndex idx) {
  require_top_rank(a, chain, "block_of");
  if (idx.i < 1 || idx.j < 1 || idx.i > chain.length() || idx.j > chain.length()) {
    throw std::out_of_range("block_of: block index out of range");
  }
  const std::size_t ri = chain.rank(idx.i - 1);
  const std::size_t rj = chain.rank(idx.j - 1);
  return a.mat().block(static_cast<Eigen::Index>(ri), static_cast<Eigen::Index>(rj),
                       static_cast<Eigen::Index>(chain.multiplicity(idx.i)),
                       static_cast<Eigen::Index>(chain.multiplicity(idx.j)));
}

/// The block formula: [D,a] assembled directly as ((alpha_i - alpha_j) a_ij).
inline OperatorMatrix commutator_blocks(const OperatorMatrix& a, const ProjectionChain& chain,
                                        const AlphaSequence& alpha) {
  require_top_rank(a, chain, "commutator_blocks");
  const auto av = alpha.values(chain.length());
  const auto ext = blocks(chain);
  const Eigen::Index dim = static_cast<Eigen::Index>(chain.top_rank());
  CMatrix out(dim, dim);
  for (std::size_t i = 0; i < ext.size(); ++i) {
    for (std::size_t j = 0; j < ext.size(); ++j) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(ext[i].first - 1);
      const Eigen::Index c0 = static_cast<Eigen::Index>(ext[j].first - 1);
      const Eigen::Index nr = static_cast<Eigen::Index>(ext[i].size);
      const Eigen::Index nc = static_cast<Eigen::Index>(ext[j].size);
      out.block(r0, c0, nr, nc) = (av[i] - av[j]) * a.mat().block(r0, c0, nr, nc);
    }
  }
  return OperatorMatrix(std::move(out));
}

/// ||[P, a]|| for the coordinate projection of the given rank. With
/// a = [[A11 A12],[A21 A22]] the commutator is [[0 A12],[-A21 0]], so the
/// norm is max(||A12||, ||A21||); no matrix product is formed.
inline double projection_commutator_norm(const OperatorMatrix& a, std::size_t rank) {
  const std::size_t n = a.dim();
  if (rank == 0 || rank >= n) return 0.0;
  const Eigen::Index r = static_cast<Eigen::Index>(rank);
  const Eigen::Index m = static_cast<Eigen::Index>(n - rank);
  const double upper = detail::spectral_norm(a.mat().topRightCorner(r, m));
  const double lower = detail::spectral_norm(a.mat().bottomLeftCorner(m, r));
  return std::max(upper, lower);
}

/// Partial sums S_K = sum_{k<=K} |alpha_k| (||[P_k,a]|| + ||[P_{k-1},a]||),
/// norms taken at the ambient truncation; ||[P_0,a]|| = 0.
inline std::vector<double> tail_estimate(const ElementDescriptor& e, const RepresentationModel& model,
                                         const ProjectionChain& chain, const AlphaSequence& alpha,
                                         std::size_t K) {
  if (K < 1 || K > chain.length()) {
    throw std::invalid_argument("tail_estimate: K must satisfy 1 <= K <= chain length");
  }
  const OperatorMatrix a = realize(model, e, chain.ambient_dim());
  const auto av = alpha.values(K);
  std::vector<double> sums;
  sums.reserve(K);
  double acc = 0.0;
  double prev_norm = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double cur_norm = projection_commutator_norm(a, chain.rank(k));
    acc += std::abs(av[k - 1]) * (cur_norm + prev_norm);
    sums.push_back(acc);
    prev_norm = cur_norm;
  }
  return sums;
}

// ---------------------------------------------------------------------------
// Greedy subsequence selection

struct SelectionProbe {
  std::size_t step = 0;         // greedy step k
  std::size_t chain_index = 0;  // probed chain position n
  std::size_t rank = 0;         // rank r_n
  double max_active_norm = 0.0; // max over active elements of ||[a_i, P_n]||
  double envelope = 0.0;        // admissibility bound at this step
  bool accepted = false;
};

struct SelectionStep {
  std::size_t step = 0;
  std::size_t chain_index = 0;
  std::size_t rank = 0;
  double max_active_norm = 0.0;
  double envelope = 0.0;
  std::vector<double> element_norms;  // ||[a_i, P_{n_k}]|| for every element
};

struct SelectionCertificate {
  std::vector<std::size_t> chosen;           // chain indices n_1 < n_2 < ...
  std::vector<SelectionStep> steps;
  std::vector<std::string> element_labels;
  std::vector<double> per_element_series;    // S_i = sum_k |alpha_k| (w_i(n_k) + w_i(n_{k-1}))
  std::vector<double> pre_activation_terms;  // per element, the unconstrained part of S_i
  std::vector<std::size_t> multiplicities;   // observed r_{n_k} - r_{n_{k-1}}
  double pre_activation_total = 0.0;
  double constrained_total = 0.0;
  double certified_total = 0.0;              // pre_activation_total + constrained_total
};

struct NoProgressError : std::runtime_error {
  NoProgressError(std::size_t step, std::vector<SelectionProbe> probes)
      : std::runtime_error("select_chain: no admissible chain index within budget at step " +
                           std::to_string(step)),
        failed_step(step),
        probes(std::move(probes)) {}

  std::size_t failed_step;
  std::vector<SelectionProbe> probes;
};

struct EmptyElementsError : std::invalid_argument {
  EmptyElementsError() : std::invalid_argument("select_chain: element list is empty") {}
};

/// Greedy realization of the subsequence selection. At step k, elements
/// a_1..a_min(k, L) are active and the smallest unused chain index n with
/// max_i ||[a_i, P_n]|| <= 2^{-(k+1)} / max(|alpha_k|, |alpha_{k+1}|) is
/// chosen. The scan pointer never revisits indices and stops at `budget`.
inline SelectionCertificate select_chain(const std::vector<ElementDescriptor>& elements,
                                         const RepresentationModel& model,
                                         const ProjectionChain& chain, const AlphaSequence& alpha,
                                         std::size_t budget) {
  if (elements.empty()) throw EmptyElementsError();
  if (budget < 1 || budget > chain.length()) {
    throw std::invalid_argument("select_chain: budget must satisfy 1 <= budget <= chain length");
  }
  const std::size_t L = elements.size();

  std::vector<OperatorMatrix> mats;
  mats.reserve(L);
  for (const auto& e : elements) mats.push_back(realize(model, e, chain.ambient_dim()));

  // alpha_k for k up to budget+1; a custom list one shy of that falls back
  // to its final magnitude for the trailing envelope denominator.
  std::size_t alpha_count = budget + 1;
  if (auto fin = alpha.finite_length()) {
    if (*fin < budget) {
      throw std::invalid_argument("select_chain: custom alpha shorter than budget");
    }
    alpha_count = std::min(alpha_count, *fin);
  }
  const std::vector<double> av = alpha.values(alpha_count);
  auto abs_alpha = [&](std::size_t k) {  // 1-based, clamped to the last known value
    return std::abs(av[std::min(k, av.size()) - 1]);
  };

  std::vector<SelectionProbe> probes;
  std::vector<SelectionStep> steps;
  // w[i][t] = ||[a_i, P_{n_t}]|| for accepted steps t (w[i][0] = 0).
  std::vector<std::vector<double>> w(L, std::vector<double>{0.0});

  std::size_t next = 1;
  for (std::size_t k = 1; next <= budget; ++k) {
    const double denom = std::max(abs_alpha(k), abs_alpha(k + 1));
    const double envelope = std::pow(2.0, -static_cast<double>(k + 1)) / denom;
    const std::size_t active = std::min(k, L);
    bool found = false;
    while (next <= budget) {
      std::vector<double> norms(L, 0.0);
      double max_active = 0.0;
      for (std::size_t i = 0; i < L; ++i) {
        norms[i] = projection_commutator_norm(mats[i], chain.rank(next));
        if (i < active) max_active = std::max(max_active, norms[i]);
      }
      const bool ok = max_active <= envelope;
      probes.push_back(SelectionProbe{k, next, chain.rank(next), max_active, envelope, ok});
      if (ok) {
        SelectionStep st;
        st.step = k;
        st.chain_index = next;
        st.rank = chain.rank(next);
        st.max_active_norm = max_active;
        st.envelope = envelope;
        st.element_norms = norms;
        steps.push_back(std::move(st));
        for (std::size_t i = 0; i < L; ++i) w[i].push_back(norms[i]);
        ++next;
        found = true;
        break;
      }
      ++next;
    }
    if (!found) throw NoProgressError(k, std::move(probes));
  }

  const std::size_t K = steps.size();
  SelectionCertificate cert;
  cert.steps = steps;
  for (const auto& st : steps) cert.chosen.push_back(st.chain_index);
  for (const auto& e : elements) cert.element_labels.push_back(e.label());
  for (std::size_t t = 1; t <= K; ++t) {
    cert.multiplicities.push_back(chain.rank(cert.chosen[t - 1]) -
                                  (t == 1 ? 0 : chain.rank(cert.chosen[t - 2])));
  }
  for (std::size_t i = 0; i < L; ++i) {
    double series = 0.0;
    double pre = 0.0;
    for (std::size_t t = 1; t <= K; ++t) {
      const double term = abs_alpha(t) * (w[i][t] + w[i][t - 1]);
      series += term;
      // Element i joins the constraint set at step i+1 of the 0-based loop:
      // steps t < i+1 are fully unconstrained, and at t == i+1 the trailing
      // w[i][t-1] was fixed before activation.
      if (t < i + 1) pre += term;
      else if (t == i + 1) pre += abs_alpha(t) * w[i][t - 1];
    }
    cert.per_element_series.push_back(series);
    cert.pre_activation_terms.push_back(pre);
    cert.pre_activation_total += pre;
    cert.constrained_total += series - pre;
  }
  cert.certified_total = cert.pre_activation_total + cert.constrained_total;
  return cert;
}

}  // namespace ncglab
