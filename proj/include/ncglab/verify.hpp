#pragma once

// Spectral-triple verdicts at finite truncation: boundedness stability,
// compactness via singular-value tails, the off-diagonal decay bound, and
// p-summability profiling. Verdicts are governed by the fixed numeric rules
// below; every constant is echoed into the reports.

#include <ncglab/dirac.hpp>
#include <ncglab/models.hpp>
#include <ncglab/opcore.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace ncglab {

inline constexpr double kStabilityWindow = 1e-6;     // boundedness: |last - prev| < window*(1+last)
inline constexpr double kMonotoneSlack = 1e-12;      // compactness: nonincreasing up to this slack
inline constexpr double kZeroReference = 1e-12;      // compactness: reference below this is a zero tail
inline constexpr double kConvergedWindow = 1e-6;     // summability: tail bound < window * partial sum
inline constexpr double kDivergingIncrement = 1e-6;  // summability: doubling increments above this
inline constexpr std::size_t kFirstCheckpoint = 16;  // summability: first doubling checkpoint

enum class ScanVerdict { stable, growing, inconclusive };

inline const char* to_string(ScanVerdict v) {
  switch (v) {
    case ScanVerdict::stable: return "stable";
    case ScanVerdict::growing: return "growing";
    case ScanVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct ScanRecord {
  std::size_t dim = 0;
  double value = 0.0;                  // ||[D,a]||_N or sigma_{J+1}([D,a]_N)
  std::vector<double> singular_values; // compactness only
};

struct ScanEvidence {
  double last = 0.0;
  double previous = 0.0;
  double window = 0.0;          // boundedness comparison threshold
  bool nonincreasing = true;    // compactness
  double tail_reference = 0.0;  // sigma_J at the largest dim
  bool zero_reference = false;
  bool tail_ok = false;
  std::size_t tail_hit = 0;     // 1-based j with sigma_j < reference/2 (0 if none)
};

struct ScanReport {
  std::string scan;     // "boundedness" | "compactness"
  std::string element;
  std::string alpha;
  std::size_t tail_index = 0;  // J, compactness only
  std::vector<ScanRecord> records;
  ScanVerdict verdict = ScanVerdict::inconclusive;
  ScanEvidence evidence;
};

namespace detail {

inline void require_increasing_dims(const std::vector<std::size_t>& dims) {
  if (dims.empty()) throw std::invalid_argument("scan: dims list is empty");
  std::size_t prev = 0;
  for (std::size_t d : dims) {
    if (d <= prev) throw std::invalid_argument("scan: dims must be strictly increasing and >= 1");
    prev = d;
  }
}

inline OperatorMatrix scan_commutator(const RepresentationModel& model, const ElementDescriptor& e,
                                      const AlphaSequence& alpha, std::size_t N) {
  const ProjectionChain chain(N, default_chain(model, N));
  const OperatorMatrix a = realize(model, e, N);
  return commutator_blocks(a, chain, alpha);
}

}  // namespace detail

/// ||[D,a]||_N over the model's default chains, with the stability verdict.
inline ScanReport boundedness_scan(const RepresentationModel& model, const ElementDescriptor& e,
                                   const AlphaSequence& alpha, const std::vector<std::size_t>& dims) {
  detail::require_increasing_dims(dims);
  ScanReport report;
  report.scan = "boundedness";
  report.element = e.label();
  report.alpha = alpha.label();
  for (std::size_t N : dims) {
    ScanRecord rec;
    rec.dim = N;
    rec.value = op_norm(detail::scan_commutator(model, e, alpha, N));
    report.records.push_back(std::move(rec));
  }
  if (report.records.size() < 2) {
    report.verdict = ScanVerdict::inconclusive;
    return report;
  }
  const double last = report.records.back().value;
  const double prev = report.records[report.records.size() - 2].value;
  report.evidence.last = last;
  report.evidence.previous = prev;
  report.evidence.window = kStabilityWindow * (1.0 + last);
  if (std::abs(last - prev) < report.evidence.window) report.verdict = ScanVerdict::stable;
  else if (last > prev) report.verdict = ScanVerdict::growing;
  else report.verdict = ScanVerdict::inconclusive;
  return report;
}

/// sigma_{J+1}([D,a]_N) per truncation plus the singular-value tail at the
/// largest one. Stable (compact-consistent) iff the recorded values are
/// nonincreasing and the tail drops below half of sigma_J; a reference
/// already at numerical zero counts as a trivially vanishing tail.
inline ScanReport compactness_scan(const RepresentationModel& model, const ElementDescriptor& e,
                                   const AlphaSequence& alpha, const std::vector<std::size_t>& dims,
                                   std::size_t tail_index) {
  detail::require_increasing_dims(dims);
  if (tail_index < 1 || tail_index >= dims.front()) {
    throw std::invalid_argument("compactness_scan: need 1 <= tail_index < min(dims)");
  }
  ScanReport report;
  report.scan = "compactness";
  report.element = e.label();
  report.alpha = alpha.label();
  report.tail_index = tail_index;
  for (std::size_t N : dims) {
    ScanRecord rec;
    rec.dim = N;
    rec.singular_values = singular_values(detail::scan_commutator(model, e, alpha, N));
    rec.value = rec.singular_values[tail_index];  // sigma_{J+1}, 1-based J
    report.records.push_back(std::move(rec));
  }
  bool nonincreasing = true;
  for (std::size_t t = 1; t < report.records.size(); ++t) {
    const double prev = report.records[t - 1].value;
    if (report.records[t].value > prev + kMonotoneSlack * (1.0 + prev)) nonincreasing = false;
  }
  const auto& tail = report.records.back().singular_values;
  const double reference = tail[tail_index - 1];  // sigma_J at the largest dim
  report.evidence.nonincreasing = nonincreasing;
  report.evidence.tail_reference = reference;
  report.evidence.zero_reference = reference <= kZeroReference;
  if (report.evidence.zero_reference) {
    report.evidence.tail_ok = true;
  } else {
    for (std::size_t j = 0; j < tail.size(); ++j) {
      if (tail[j] < reference / 2.0) {
        report.evidence.tail_ok = true;
        report.evidence.tail_hit = j + 1;
        break;
      }
    }
  }
  report.verdict = nonincreasing && report.evidence.tail_ok ? ScanVerdict::stable : ScanVerdict::growing;
  return report;
}

struct OffdiagReport {
  bool passed = true;
  double commutator_norm = 0.0;  // C
  double slack = 0.0;
  std::size_t checked_pairs = 0;
  double worst_ratio = 0.0;      // ||a_ij|| |alpha_i - alpha_j| / C
  double worst_margin = 0.0;     // ||a_ij|| - (C/|gap| + slack), most positive
  BlockIndex worst{0, 0};
  std::vector<BlockIndex> skipped;  // pairs with (numerically) repeated alpha
};

/// Asserts ||a_ij|| <= C/|alpha_i - alpha_j| + slack for all off-diagonal
/// blocks; pairs with repeated alpha are reported and skipped.
inline OffdiagReport offdiag_check(const OperatorMatrix& a, const ProjectionChain& chain,
                                   const AlphaSequence& alpha, const Tolerance& tol = {}) {
  tol.validate();
  require_top_rank(a, chain, "offdiag_check");
  const auto av = alpha.values(chain.length());
  OffdiagReport report;
  report.slack = tol.bound_slack;
  report.commutator_norm = op_norm(commutator_blocks(a, chain, alpha));
  const double c = report.commutator_norm;
  report.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i <= chain.length(); ++i) {
    for (std::size_t j = 1; j <= chain.length(); ++j) {
      if (i == j) continue;
      const double gap = std::abs(av[i - 1] - av[j - 1]);
      if (gap <= 1e-12 * std::max({1.0, std::abs(av[i - 1]), std::abs(av[j - 1])})) {
        report.skipped.push_back(BlockIndex{i, j});
        continue;
      }
      const double norm_ij = detail::spectral_norm(block_of(a, chain, BlockIndex{i, j}));
      const double margin = norm_ij - (c / gap + tol.bound_slack);
      const double ratio = c > 0.0 ? norm_ij * gap / c
                                   : (norm_ij > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
      ++report.checked_pairs;
      if (margin > report.worst_margin) {
        report.worst_margin = margin;
        report.worst = BlockIndex{i, j};
        report.worst_ratio = ratio;
      }
      if (margin > 0.0) report.passed = false;
    }
  }
  if (report.checked_pairs == 0) report.worst_margin = 0.0;
  return report;
}

enum class SummabilityVerdict { converged, diverging, inconclusive };

inline const char* to_string(SummabilityVerdict v) {
  switch (v) {
    case SummabilityVerdict::converged: return "converged";
    case SummabilityVerdict::diverging: return "diverging";
    case SummabilityVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

struct SummabilityCheckpoint {
  std::size_t K = 0;
  double partial_sum = 0.0;
  double tail_bound = 0.0;  // +inf when no sound bound exists
};

struct SummabilityReport {
  double p = 0.0;
  std::string alpha;
  std::size_t k_max = 0;   // requested
  std::size_t k_used = 0;  // custom sequences may cap the range
  std::vector<SummabilityCheckpoint> checkpoints;
  double final_sum = 0.0;
  double final_tail_bound = 0.0;
  std::vector<double> last_increments;  // across the last three doublings
  SummabilityVerdict verdict = SummabilityVerdict::inconclusive;
  std::string note;
};

namespace detail {

// Sound integral-test bound on sum_{k>K} (1+alpha_k^2)^{-p/2} assuming
// multiplicity 1 beyond K; +inf where no convergent bound exists (harmonic
// alpha grows like ln k, custom data ends).
inline double summability_tail_bound(const AlphaSequence& alpha, double p, std::size_t K) {
  const double inf = std::numeric_limits<double>::infinity();
  switch (alpha.kind()) {
    case AlphaSequence::Kind::harmonic:
      return inf;
    case AlphaSequence::Kind::power: {
      const double pq = p * alpha.parameter();
      if (pq <= 1.0) return inf;
      return std::pow(static_cast<double>(K), 1.0 - pq) / (pq - 1.0);
    }
    case AlphaSequence::Kind::geometric: {
      const double r = std::pow(alpha.parameter(), -p);
      return std::pow(alpha.parameter(), -p * static_cast<double>(K + 1)) / (1.0 - r);
    }
    case AlphaSequence::Kind::custom:
      return inf;
  }
  return inf;
}

}  // namespace detail

/// Partial sums of mult_k (1+alpha_k^2)^{-p/2} at doubling checkpoints, one
/// report per p.
inline std::vector<SummabilityReport> summability_profile(const AlphaSequence& alpha,
                                                          const std::vector<std::size_t>& multiplicities,
                                                          const std::vector<double>& p_values,
                                                          std::size_t k_max) {
  if (k_max < 1) throw std::invalid_argument("summability_profile: K_max must be >= 1");
  if (p_values.empty()) throw std::invalid_argument("summability_profile: no p values");
  for (double p : p_values) {
    if (!(p > 0.0)) throw std::invalid_argument("summability_profile: p must be positive");
  }
  for (std::size_t m : multiplicities) {
    if (m < 1) throw std::invalid_argument("summability_profile: multiplicities must be >= 1");
  }

  std::size_t k_used = k_max;
  std::string cap_note;
  if (auto fin = alpha.finite_length()) {
    if (*fin < k_used) {
      k_used = *fin;
      cap_note = "custom alpha ends at K = " + std::to_string(k_used) +
                 "; no tail information beyond the data";
    }
  }

  std::vector<std::size_t> checkpoints;
  for (std::size_t K = kFirstCheckpoint; K <= k_used; K *= 2) checkpoints.push_back(K);
  if (checkpoints.empty() || checkpoints.back() != k_used) checkpoints.push_back(k_used);

  std::vector<SummabilityReport> reports;
  for (double p : p_values) {
    SummabilityReport rep;
    rep.p = p;
    rep.alpha = alpha.label();
    rep.k_max = k_max;
    rep.k_used = k_used;
    rep.note = cap_note;

    auto cursor = alpha.cursor();
    double sum = 0.0;
    std::size_t next_cp = 0;
    for (std::size_t k = 1; k <= k_used; ++k) {
      const double a = cursor.next();
      const double mult = k <= multiplicities.size() ? static_cast<double>(multiplicities[k - 1]) : 1.0;
      sum += mult * std::pow(1.0 + a * a, -p / 2.0);
      if (next_cp < checkpoints.size() && k == checkpoints[next_cp]) {
        SummabilityCheckpoint cp;
        cp.K = k;
        cp.partial_sum = sum;
        // Bounds assume multiplicity 1 past K; inside the declared list no
        // sound tail statement is made.
        cp.tail_bound = k >= multiplicities.size()
                            ? detail::summability_tail_bound(alpha, p, k)
                            : std::numeric_limits<double>::infinity();
        rep.checkpoints.push_back(cp);
        ++next_cp;
      }
    }
    rep.final_sum = rep.checkpoints.back().partial_sum;
    rep.final_tail_bound = rep.checkpoints.back().tail_bound;

    // Doubling increments: the last three consecutive checkpoint pairs with
    // K ratio exactly 2.
    const auto& cps = rep.checkpoints;
    for (std::size_t t = 0; t + 1 < cps.size(); ++t) {
      if (cps[t + 1].K == 2 * cps[t].K) {
        rep.last_increments.push_back(cps[t + 1].partial_sum - cps[t].partial_sum);
      }
    }
    if (rep.last_increments.size() > 3) {
      rep.last_increments.erase(rep.last_increments.begin(),
                                rep.last_increments.end() - 3);
    }

    if (std::isfinite(rep.final_tail_bound) &&
        rep.final_tail_bound < kConvergedWindow * rep.final_sum) {
      rep.verdict = SummabilityVerdict::converged;
    } else if (rep.last_increments.size() == 3 &&
               rep.last_increments[0] > kDivergingIncrement &&
               rep.last_increments[1] > kDivergingIncrement &&
               rep.last_increments[2] > kDivergingIncrement) {
      rep.verdict = SummabilityVerdict::diverging;
    } else {
      rep.verdict = SummabilityVerdict::inconclusive;
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

}  // namespace ncglab
