#pragma once

// Representation families (Toeplitz/shift, compacts-plus-unit, commutative
// diagonal, RFD blocks), symbolic element descriptors over their generators,
// truncated realization, default filtrations, and the symbol winding number.

#include <ncglab/opcore.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ncglab {

/// Descriptor cannot be formed or is invalid for the target model.
struct DescriptorError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class ModelKind { toeplitz, compacts_unit, diagonal, rfd };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::toeplitz: return "toeplitz";
    case ModelKind::compacts_unit: return "compacts_unit";
    case ModelKind::diagonal: return "diagonal";
    case ModelKind::rfd: return "rfd";
  }
  return "?";
}

struct ModelMetadata {
  bool af_filtration = false;
  bool rfd = false;
  bool known_non_qd = false;
};

/// Real sequence x_i defining the diagonal multiplication operator.
struct DiagonalSequence {
  enum class Kind { inv_index, custom };
  Kind kind = Kind::inv_index;
  std::vector<double> values;  // custom only

  double value(std::size_t i) const {  // 1-based
    if (kind == Kind::inv_index) return 1.0 / static_cast<double>(i);
    if (i < 1 || i > values.size()) {
      throw std::out_of_range("diagonal sequence has no value at index " + std::to_string(i));
    }
    return values[i - 1];
  }

  std::string label() const {
    if (kind == Kind::inv_index) return "inv_index";
    return "custom[" + std::to_string(values.size()) + "]";
  }
};

struct RfdBlock {
  std::size_t dim = 1;
  std::size_t count = 1;
};

class RepresentationModel {
 public:
  static RepresentationModel toeplitz() {
    return RepresentationModel(ModelKind::toeplitz, {false, false, true});
  }

  static RepresentationModel compacts_unit() {
    return RepresentationModel(ModelKind::compacts_unit, {true, false, false});
  }

  static RepresentationModel diagonal(DiagonalSequence seq = {}) {
    RepresentationModel m(ModelKind::diagonal, {true, true, false});
    m.diag_ = std::move(seq);
    return m;
  }

  static RepresentationModel rfd(std::vector<RfdBlock> blocks) {
    if (blocks.empty()) throw std::invalid_argument("rfd model needs at least one block");
    for (const auto& b : blocks) {
      if (b.dim < 1 || b.count < 1) throw std::invalid_argument("rfd blocks need positive dim and count");
    }
    RepresentationModel m(ModelKind::rfd, {true, true, false});
    m.blocks_ = std::move(blocks);
    return m;
  }

  ModelKind kind() const { return kind_; }
  const ModelMetadata& metadata() const { return meta_; }
  const char* name() const { return to_string(kind_); }

  const DiagonalSequence& diagonal_sequence() const {
    if (kind_ != ModelKind::diagonal) throw std::logic_error("not a diagonal model");
    return diag_;
  }

  const std::vector<RfdBlock>& rfd_blocks() const {
    if (kind_ != ModelKind::rfd) throw std::logic_error("not an rfd model");
    return blocks_;
  }

  /// Dimension of the index-th irreducible block (1-based); the declared
  /// pattern repeats cyclically so the model exists at every truncation.
  std::size_t rfd_block_dim(std::size_t index) const {
    if (kind_ != ModelKind::rfd || index < 1) throw std::invalid_argument("bad rfd block index");
    std::size_t total = 0;
    for (const auto& b : blocks_) total += b.count;
    std::size_t pos = (index - 1) % total;
    for (const auto& b : blocks_) {
      if (pos < b.count) return b.dim;
      pos -= b.count;
    }
    return blocks_.back().dim;  // unreachable
  }

  /// 0-based ambient offset where block `index` starts.
  std::size_t rfd_block_offset(std::size_t index) const {
    std::size_t off = 0;
    for (std::size_t k = 1; k < index; ++k) off += rfd_block_dim(k);
    return off;
  }

 private:
  RepresentationModel(ModelKind k, ModelMetadata m) : kind_(k), meta_(m) {}

  ModelKind kind_;
  ModelMetadata meta_;
  DiagonalSequence diag_;
  std::vector<RfdBlock> blocks_;
};

// ---------------------------------------------------------------------------
// Element descriptors

enum class TermKind { identity, shift_power, adj_shift_power, matrix_unit, diag_power, block };

struct ElementTerm {
  TermKind kind = TermKind::identity;
  std::size_t i = 0;  // shift/adj exponent, unit row, diag exponent, block index
  std::size_t j = 0;  // unit column
  Complex coeff{1.0, 0.0};
  CMatrix block;  // block terms only

  static ElementTerm make(TermKind k, std::size_t i = 0, std::size_t j = 0,
                          Complex c = Complex{1.0, 0.0}) {
    ElementTerm t;
    t.kind = k;
    t.i = i;
    t.j = j;
    t.coeff = c;
    return t;
  }
};

namespace detail {

inline int term_rank(TermKind k) {
  switch (k) {
    case TermKind::identity: return 0;
    case TermKind::shift_power: return 1;
    case TermKind::adj_shift_power: return 2;
    case TermKind::matrix_unit: return 3;
    case TermKind::diag_power: return 4;
    case TermKind::block: return 5;
  }
  return 6;
}

inline bool term_before(const ElementTerm& a, const ElementTerm& b) {
  if (a.kind != b.kind) return term_rank(a.kind) < term_rank(b.kind);
  if (a.i != b.i) return a.i < b.i;
  return a.j < b.j;
}

inline std::string format_coeff(Complex c) {
  char buf[64];
  if (c.imag() == 0.0) {
    std::snprintf(buf, sizeof(buf), "%.12g", c.real());
    return buf;
  }
  std::snprintf(buf, sizeof(buf), "(%.12g,%.12g)", c.real(), c.imag());
  return buf;
}

}  // namespace detail

/// Finite complex-linear combination of generator words. The symbolic
/// product applies the Toeplitz relations s*s = 1, s s* = 1 - e_{11} and the
/// matrix-unit algebra, so closures stay in the span {1, s^i, (s*)^j, e_ij}.
class ElementDescriptor {
 public:
  ElementDescriptor() = default;

  static ElementDescriptor identity() {
    return single(ElementTerm::make(TermKind::identity));
  }

  static ElementDescriptor shift_power(std::size_t i) {
    if (i < 1) throw DescriptorError("shift_power needs exponent >= 1");
    return single(ElementTerm::make(TermKind::shift_power, i));
  }

  static ElementDescriptor adj_shift_power(std::size_t j) {
    if (j < 1) throw DescriptorError("adj_shift_power needs exponent >= 1");
    return single(ElementTerm::make(TermKind::adj_shift_power, j));
  }

  static ElementDescriptor matrix_unit(std::size_t i, std::size_t j) {
    if (i < 1 || j < 1) throw DescriptorError("matrix_unit indices are 1-based");
    return single(ElementTerm::make(TermKind::matrix_unit, i, j));
  }

  static ElementDescriptor diag_function(std::size_t power = 1) {
    if (power < 1) throw DescriptorError("diag_function power must be >= 1");
    return single(ElementTerm::make(TermKind::diag_power, power));
  }

  static ElementDescriptor block_element(std::size_t index, CMatrix m) {
    if (index < 1) throw DescriptorError("block_element index is 1-based");
    if (m.rows() < 1 || m.rows() != m.cols()) {
      throw DescriptorError("block_element payload must be square and nonempty");
    }
    ElementTerm t = ElementTerm::make(TermKind::block, index);
    t.block = std::move(m);
    return single(t);
  }

  const std::vector<ElementTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  ElementDescriptor adjointed() const {
    ElementDescriptor out;
    for (const auto& t : terms_) {
      ElementTerm a = t;
      a.coeff = std::conj(t.coeff);
      switch (t.kind) {
        case TermKind::identity:
        case TermKind::diag_power:
          break;
        case TermKind::shift_power:
          a.kind = TermKind::adj_shift_power;
          break;
        case TermKind::adj_shift_power:
          a.kind = TermKind::shift_power;
          break;
        case TermKind::matrix_unit:
          std::swap(a.i, a.j);
          break;
        case TermKind::block:
          a.block = CMatrix(t.block.adjoint());
          break;
      }
      out.terms_.push_back(std::move(a));
    }
    out.canonicalize();
    return out;
  }

  ElementDescriptor scaled(Complex c) const {
    ElementDescriptor out = *this;
    for (auto& t : out.terms_) t.coeff *= c;
    out.canonicalize();
    return out;
  }

  friend ElementDescriptor operator+(const ElementDescriptor& a, const ElementDescriptor& b) {
    ElementDescriptor out = a;
    out.terms_.insert(out.terms_.end(), b.terms_.begin(), b.terms_.end());
    out.canonicalize();
    return out;
  }

  friend ElementDescriptor operator*(const ElementDescriptor& a, const ElementDescriptor& b) {
    ElementDescriptor out;
    for (const auto& x : a.terms_) {
      for (const auto& y : b.terms_) {
        auto prod = product_terms(x, y);
        out.terms_.insert(out.terms_.end(), prod.begin(), prod.end());
      }
    }
    out.canonicalize();
    return out;
  }

  bool same_as(const ElementDescriptor& other, double tol = 1e-12) const {
    if (terms_.size() != other.terms_.size()) return false;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      const auto& a = terms_[k];
      const auto& b = other.terms_[k];
      if (a.kind != b.kind || a.i != b.i || a.j != b.j) return false;
      if (a.kind == TermKind::block) {
        if (a.block.rows() != b.block.rows()) return false;
        if ((a.block - b.block).cwiseAbs().maxCoeff() > tol) return false;
      } else if (std::abs(a.coeff - b.coeff) > tol * std::max(1.0, std::abs(a.coeff))) {
        return false;
      }
    }
    return true;
  }

  std::string label() const {
    if (terms_.empty()) return "0";
    std::string out;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
      if (k > 0) out += " + ";
      out += term_label(terms_[k]);
    }
    return out;
  }

 private:
  static ElementDescriptor single(ElementTerm t) {
    ElementDescriptor d;
    d.terms_.push_back(std::move(t));
    return d;
  }

  static std::string term_label(const ElementTerm& t) {
    std::string atom;
    switch (t.kind) {
      case TermKind::identity: atom = "1"; break;
      case TermKind::shift_power: atom = t.i == 1 ? "s" : "s^" + std::to_string(t.i); break;
      case TermKind::adj_shift_power: atom = t.i == 1 ? "s*" : "s*^" + std::to_string(t.i); break;
      case TermKind::matrix_unit:
        atom = "e(" + std::to_string(t.i) + "," + std::to_string(t.j) + ")";
        break;
      case TermKind::diag_power: atom = t.i == 1 ? "diag" : "diag^" + std::to_string(t.i); break;
      case TermKind::block: atom = "blk(" + std::to_string(t.i) + ")"; break;
    }
    if (t.kind == TermKind::block) return atom;  // coefficient folded into payload
    if (t.coeff == Complex{1.0, 0.0}) return atom;
    if (t.kind == TermKind::identity) return detail::format_coeff(t.coeff);
    return detail::format_coeff(t.coeff) + "*" + atom;
  }

  // Toeplitz relations: s^a (s*)^b loses one e_{a-t+1,b-t+1} per contraction
  // step; (s*)^a s^b collapses to a pure power since s* s = 1.
  static std::vector<ElementTerm> product_terms(const ElementTerm& x, const ElementTerm& y) {
    using K = TermKind;
    const Complex c = x.coeff * y.coeff;
    auto term = [&](K k, std::size_t i = 0, std::size_t j = 0, Complex cc = Complex{1.0, 0.0}) {
      return ElementTerm::make(k, i, j, cc);
    };

    if (x.kind == K::identity || y.kind == K::identity) {
      ElementTerm t = x.kind == K::identity ? y : x;
      if (t.kind == K::block) {
        t.block = CMatrix(c * t.block);
        t.coeff = Complex{1.0, 0.0};
      } else {
        t.coeff = c;
      }
      return {t};
    }

    auto family = [](K k) {
      switch (k) {
        case K::shift_power:
        case K::adj_shift_power:
        case K::matrix_unit: return 1;
        case K::diag_power: return 2;
        case K::block: return 3;
        default: return 0;
      }
    };
    if (family(x.kind) != family(y.kind)) {
      throw DescriptorError("product mixes incompatible generator families");
    }

    switch (x.kind) {
      case K::shift_power:
        if (y.kind == K::shift_power) return {term(K::shift_power, x.i + y.i, 0, c)};
        if (y.kind == K::adj_shift_power) {
          const std::size_t a = x.i, b = y.i, m = std::min(a, b);
          std::vector<ElementTerm> out;
          if (a == m && b == m) out.push_back(term(K::identity, 0, 0, c));
          else if (a > m) out.push_back(term(K::shift_power, a - m, 0, c));
          else out.push_back(term(K::adj_shift_power, b - m, 0, c));
          for (std::size_t t = 1; t <= m; ++t) {
            out.push_back(term(K::matrix_unit, a - t + 1, b - t + 1, -c));
          }
          return out;
        }
        // s^a e_{ij} = e_{i+a, j}
        return {term(K::matrix_unit, y.i + x.i, y.j, c)};
      case K::adj_shift_power:
        if (y.kind == K::adj_shift_power) return {term(K::adj_shift_power, x.i + y.i, 0, c)};
        if (y.kind == K::shift_power) {
          // (s*)^a s^b: s* s = 1
          if (x.i == y.i) return {term(K::identity, 0, 0, c)};
          if (y.i > x.i) return {term(K::shift_power, y.i - x.i, 0, c)};
          return {term(K::adj_shift_power, x.i - y.i, 0, c)};
        }
        // (s*)^a e_{ij} = e_{i-a, j} when i > a, else 0
        if (y.i > x.i) return {term(K::matrix_unit, y.i - x.i, y.j, c)};
        return {};
      case K::matrix_unit:
        if (y.kind == K::matrix_unit) {
          if (x.j != y.i) return {};
          return {term(K::matrix_unit, x.i, y.j, c)};
        }
        if (y.kind == K::shift_power) {
          // e_{ij} s^a = e_{i, j-a} when j > a, else 0
          if (x.j > y.i) return {term(K::matrix_unit, x.i, x.j - y.i, c)};
          return {};
        }
        // e_{ij} (s*)^a = e_{i, j+a}
        return {term(K::matrix_unit, x.i, x.j + y.i, c)};
      case K::diag_power:
        return {term(K::diag_power, x.i + y.i, 0, c)};
      case K::block: {
        if (x.i != y.i) return {};
        if (x.block.rows() != y.block.rows()) {
          throw DescriptorError("block product with mismatched payload dimensions");
        }
        ElementTerm t = term(K::block, x.i);
        t.block = CMatrix((x.coeff * y.coeff) * (x.block * y.block));
        return {t};
      }
      default:
        throw DescriptorError("unhandled term product");
    }
  }

  void canonicalize() {
    for (auto& t : terms_) {
      if (t.kind == TermKind::block && t.coeff != Complex{1.0, 0.0}) {
        t.block = CMatrix(t.coeff * t.block);
        t.coeff = Complex{1.0, 0.0};
      }
    }
    std::stable_sort(terms_.begin(), terms_.end(), detail::term_before);
    std::vector<ElementTerm> merged;
    for (auto& t : terms_) {
      if (!merged.empty()) {
        auto& m = merged.back();
        if (m.kind == t.kind && m.i == t.i && m.j == t.j) {
          if (t.kind == TermKind::block) m.block += t.block;
          else m.coeff += t.coeff;
          continue;
        }
      }
      merged.push_back(std::move(t));
    }
    terms_.clear();
    for (auto& t : merged) {
      if (t.kind == TermKind::block) {
        if (t.block.cwiseAbs().maxCoeff() == 0.0) continue;
      } else if (t.coeff == Complex{0.0, 0.0}) {
        continue;
      }
      terms_.push_back(std::move(t));
    }
  }

  std::vector<ElementTerm> terms_;
};

// ---------------------------------------------------------------------------
// Realization

namespace detail {

inline bool term_valid_for(TermKind k, ModelKind m) {
  switch (k) {
    case TermKind::identity: return true;
    case TermKind::shift_power:
    case TermKind::adj_shift_power: return m == ModelKind::toeplitz;
    case TermKind::matrix_unit: return m == ModelKind::toeplitz || m == ModelKind::compacts_unit;
    case TermKind::diag_power: return m == ModelKind::diagonal;
    case TermKind::block: return m == ModelKind::rfd;
  }
  return false;
}

}  // namespace detail

/// P_N e P_N in the standard basis.
inline OperatorMatrix realize(const RepresentationModel& model, const ElementDescriptor& e,
                              std::size_t N) {
  if (N < 1) throw std::invalid_argument("realize: N must be >= 1");
  const Eigen::Index n = static_cast<Eigen::Index>(N);
  CMatrix acc = CMatrix::Zero(n, n);
  for (const auto& t : e.terms()) {
    if (!detail::term_valid_for(t.kind, model.kind())) {
      throw DescriptorError(std::string("descriptor term invalid for model ") + model.name());
    }
    switch (t.kind) {
      case TermKind::identity:
        acc += t.coeff * CMatrix::Identity(n, n);
        break;
      case TermKind::shift_power: {
        const Eigen::Index a = static_cast<Eigen::Index>(t.i);
        for (Eigen::Index col = 0; col + a < n; ++col) acc(col + a, col) += t.coeff;
        break;
      }
      case TermKind::adj_shift_power: {
        const Eigen::Index a = static_cast<Eigen::Index>(t.i);
        for (Eigen::Index row = 0; row + a < n; ++row) acc(row, row + a) += t.coeff;
        break;
      }
      case TermKind::matrix_unit:
        if (t.i <= N && t.j <= N) {
          acc(static_cast<Eigen::Index>(t.i - 1), static_cast<Eigen::Index>(t.j - 1)) += t.coeff;
        }
        break;
      case TermKind::diag_power: {
        const auto& seq = model.diagonal_sequence();
        for (Eigen::Index r = 0; r < n; ++r) {
          double v = 1.0;
          const double x = seq.value(static_cast<std::size_t>(r) + 1);
          for (std::size_t p = 0; p < t.i; ++p) v *= x;
          acc(r, r) += t.coeff * v;
        }
        break;
      }
      case TermKind::block: {
        const std::size_t bdim = model.rfd_block_dim(t.i);
        if (static_cast<std::size_t>(t.block.rows()) != bdim) {
          throw DescriptorError("block_element payload dim " + std::to_string(t.block.rows()) +
                                " does not match block dim " + std::to_string(bdim));
        }
        const std::size_t off = model.rfd_block_offset(t.i);
        for (std::size_t r = 0; r < bdim; ++r) {
          for (std::size_t c = 0; c < bdim; ++c) {
            if (off + r < N && off + c < N) {
              acc(static_cast<Eigen::Index>(off + r), static_cast<Eigen::Index>(off + c)) +=
                  t.block(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            }
          }
        }
        break;
      }
    }
  }
  return OperatorMatrix(std::move(acc));
}

/// Standard filtration ranks: 1..N for the first three models, cumulative
/// block boundaries (clipped at N) for rfd.
inline std::vector<std::size_t> default_chain(const RepresentationModel& model, std::size_t N) {
  if (N < 1) throw std::invalid_argument("default_chain: N must be >= 1");
  std::vector<std::size_t> ranks;
  if (model.kind() == ModelKind::rfd) {
    std::size_t acc = 0;
    for (std::size_t k = 1; acc < N; ++k) {
      acc += model.rfd_block_dim(k);
      ranks.push_back(std::min(acc, N));
    }
    return ranks;
  }
  ranks.reserve(N);
  for (std::size_t r = 1; r <= N; ++r) ranks.push_back(r);
  return ranks;
}

/// Closure of `gens` under adjoints and products up to word length `depth`,
/// with symbolic reduction and near-duplicate elimination.
inline std::vector<ElementDescriptor> close_elements(const std::vector<ElementDescriptor>& gens,
                                                     std::size_t depth) {
  if (depth < 1) throw std::invalid_argument("closure depth must be >= 1");
  std::vector<ElementDescriptor> base;
  auto add_unique = [](std::vector<ElementDescriptor>& into, const ElementDescriptor& d) {
    if (d.empty()) return false;
    for (const auto& have : into) {
      if (have.same_as(d)) return false;
    }
    into.push_back(d);
    return true;
  };
  for (const auto& g : gens) {
    add_unique(base, g);
    add_unique(base, g.adjointed());
  }
  std::vector<ElementDescriptor> result = base;
  std::vector<ElementDescriptor> frontier = base;
  for (std::size_t len = 2; len <= depth; ++len) {
    std::vector<ElementDescriptor> next;
    for (const auto& w : frontier) {
      for (const auto& g : base) {
        ElementDescriptor p = w * g;
        if (add_unique(result, p)) next.push_back(p);
      }
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Symbols and the winding index

/// Laurent polynomial phi(z) = sum c_k z^k on the unit circle.
class SymbolPolynomial {
 public:
  SymbolPolynomial() = default;

  static SymbolPolynomial monomial(int degree, Complex coeff = Complex{1.0, 0.0}) {
    SymbolPolynomial p;
    p.set(degree, coeff);
    return p;
  }

  void set(int degree, Complex coeff) {
    if (coeff == Complex{0.0, 0.0}) coeffs_.erase(degree);
    else coeffs_[degree] = coeff;
  }

  void add(int degree, Complex coeff) {
    const Complex next = coefficient(degree) + coeff;
    set(degree, next);
  }

  Complex coefficient(int degree) const {
    auto it = coeffs_.find(degree);
    return it == coeffs_.end() ? Complex{0.0, 0.0} : it->second;
  }

  const std::map<int, Complex>& coefficients() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }
  int min_degree() const { return coeffs_.empty() ? 0 : coeffs_.begin()->first; }
  int max_degree() const { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first; }

  Complex eval(double theta) const {
    Complex acc{0.0, 0.0};
    for (const auto& [k, c] : coeffs_) acc += c * std::polar(1.0, k * theta);
    return acc;
  }

  friend SymbolPolynomial operator*(const SymbolPolynomial& a, const SymbolPolynomial& b) {
    SymbolPolynomial out;
    for (const auto& [ka, ca] : a.coeffs_) {
      for (const auto& [kb, cb] : b.coeffs_) out.add(ka + kb, ca * cb);
    }
    return out;
  }

  std::string label() const {
    if (coeffs_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [k, c] : coeffs_) {
      if (!first) out += " + ";
      first = false;
      std::string atom = k == 0 ? "" : (k == 1 ? "z" : "z^" + std::to_string(k));
      if (atom.empty()) out += detail::format_coeff(c);
      else if (c == Complex{1.0, 0.0}) out += atom;
      else out += detail::format_coeff(c) + "*" + atom;
    }
    return out;
  }

 private:
  std::map<int, Complex> coeffs_;
};

struct WindingResult {
  int index = 0;      // minus the winding number
  long winding = 0;
  double residual = 0.0;  // distance of the accumulated turn count to the integer
  double min_abs = 0.0;   // smallest sampled |phi|
  std::size_t samples = 0;
};

/// Accumulated-argument winding of phi over `samples` uniform circle points.
/// Throws if phi (nearly) vanishes on the sampled circle or if the turn
/// count does not settle on an integer.
inline WindingResult winding_details(const SymbolPolynomial& phi, std::size_t samples = 4096) {
  if (phi.empty()) throw std::domain_error("winding_index: zero symbol has no Fredholm index");
  const int lo = phi.min_degree();
  const int hi = phi.max_degree();
  const long span = std::max<long>({1L, static_cast<long>(hi) - lo, std::labs(lo), std::labs(hi)});
  if (samples < 16UL * static_cast<unsigned long>(span)) {
    throw std::invalid_argument("winding_index: needs at least 16 samples per degree of span");
  }
  const double step = 2.0 * std::numbers::pi / static_cast<double>(samples);
  Complex prev = phi.eval(0.0);
  double min_abs = std::abs(prev);
  double total = 0.0;
  for (std::size_t t = 1; t <= samples; ++t) {
    const Complex cur = phi.eval(t == samples ? 0.0 : step * static_cast<double>(t));
    min_abs = std::min(min_abs, std::abs(cur));
    total += std::arg(cur * std::conj(prev));
    prev = cur;
  }
  if (min_abs <= 1e-8) {
    throw std::domain_error("winding_index: symbol vanishes on the circle (min |phi| = " +
                            std::to_string(min_abs) + "), no Fredholm index");
  }
  const double turns = total / (2.0 * std::numbers::pi);
  const long rounded = std::lround(turns);
  const double residual = std::abs(turns - static_cast<double>(rounded));
  if (residual >= 0.01) {
    throw std::domain_error("winding_index: accumulated turns " + std::to_string(turns) +
                            " too far from an integer");
  }
  WindingResult r;
  r.winding = rounded;
  r.index = static_cast<int>(-rounded);
  r.residual = residual;
  r.min_abs = min_abs;
  r.samples = samples;
  return r;
}

inline int winding_index(const SymbolPolynomial& phi, std::size_t samples = 4096) {
  return winding_details(phi, samples).index;
}

// ---------------------------------------------------------------------------
// Text forms (CLI-facing): descriptors like "s", "s*^2", "e(1,2)", "diag",
// "0.5*s + (0,1)*e(2,2)"; symbols like "z", "z^-1 + 2*z^3".

namespace detail {

inline void skip_ws(const std::string& s, std::size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

inline bool parse_number(const std::string& s, std::size_t& pos, double& out) {
  skip_ws(s, pos);
  const char* start = s.c_str() + pos;
  char* end = nullptr;
  const double v = std::strtod(start, &end);
  if (end == start) return false;
  pos += static_cast<std::size_t>(end - start);
  out = v;
  return true;
}

inline bool parse_size(const std::string& s, std::size_t& pos, std::size_t& out) {
  skip_ws(s, pos);
  std::size_t v = 0;
  bool any = false;
  while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
    v = v * 10 + static_cast<std::size_t>(s[pos] - '0');
    ++pos;
    any = true;
  }
  if (any) out = v;
  return any;
}

// "(re,im)" or a plain real number.
inline bool parse_coeff(const std::string& s, std::size_t& pos, Complex& out) {
  skip_ws(s, pos);
  if (pos < s.size() && s[pos] == '(') {
    std::size_t save = pos;
    ++pos;
    double re = 0.0, im = 0.0;
    if (parse_number(s, pos, re)) {
      skip_ws(s, pos);
      if (pos < s.size() && s[pos] == ',') {
        ++pos;
        if (parse_number(s, pos, im)) {
          skip_ws(s, pos);
          if (pos < s.size() && s[pos] == ')') {
            ++pos;
            out = Complex{re, im};
            return true;
          }
        }
      }
    }
    pos = save;
    return false;
  }
  double re = 0.0;
  std::size_t save = pos;
  if (!parse_number(s, pos, re)) return false;
  // A bare number followed by an atom letter is not a coefficient unless
  // joined with '*', e.g. "2s" is rejected while "2*s" and "2" parse.
  skip_ws(s, pos);
  if (pos < s.size() && s[pos] != '*' && s[pos] != '+' && s[pos] != '-') {
    pos = save;
    return false;
  }
  out = Complex{re, 0.0};
  return true;
}

// Splits on top-level '+' and '-' (outside parentheses), keeping signs.
inline std::vector<std::string> split_terms(const std::string& s) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const char ch = s[k];
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    const bool top_sign = depth == 0 && (ch == '+' || ch == '-');
    // A sign directly after '^', '*', ',' or at the start belongs to a number.
    bool binds_left = false;
    if (top_sign) {
      std::size_t back = cur.find_last_not_of(" \t");
      binds_left = back != std::string::npos && cur[back] != '^' && cur[back] != '*' && cur[back] != ',';
    }
    if (top_sign && binds_left) {
      parts.push_back(cur);
      cur.clear();
      if (ch == '-') cur.push_back('-');
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace detail

inline ElementDescriptor parse_element(const std::string& text) {
  ElementDescriptor out;
  bool any = false;
  for (const std::string& raw : detail::split_terms(text)) {
    std::size_t pos = 0;
    detail::skip_ws(raw, pos);
    if (pos == raw.size()) continue;
    Complex coeff{1.0, 0.0};
    if (raw[pos] == '-' && pos + 1 < raw.size() &&
        !std::isdigit(static_cast<unsigned char>(raw[pos + 1])) && raw[pos + 1] != '.' &&
        raw[pos + 1] != '(') {
      coeff = Complex{-1.0, 0.0};
      ++pos;
      detail::skip_ws(raw, pos);
    }
    Complex mag{1.0, 0.0};
    if (detail::parse_coeff(raw, pos, mag)) {
      coeff *= mag;
      detail::skip_ws(raw, pos);
      if (pos < raw.size() && raw[pos] == '*') {
        ++pos;
      } else if (pos == raw.size()) {
        out = out + ElementDescriptor::identity().scaled(coeff);
        any = true;
        continue;
      }
    }
    detail::skip_ws(raw, pos);
    ElementDescriptor atom;
    if (raw.compare(pos, 2, "s*") == 0) {
      pos += 2;
      std::size_t p = 1;
      if (pos < raw.size() && raw[pos] == '^') {
        ++pos;
        if (!detail::parse_size(raw, pos, p)) throw DescriptorError("bad exponent in: " + raw);
      }
      atom = ElementDescriptor::adj_shift_power(p);
    } else if (raw.compare(pos, 1, "s") == 0 && (pos + 1 == raw.size() || raw[pos + 1] != '*')) {
      pos += 1;
      std::size_t p = 1;
      if (pos < raw.size() && raw[pos] == '^') {
        ++pos;
        if (!detail::parse_size(raw, pos, p)) throw DescriptorError("bad exponent in: " + raw);
      }
      atom = ElementDescriptor::shift_power(p);
    } else if (raw.compare(pos, 2, "e(") == 0) {
      pos += 2;
      std::size_t i = 0, j = 0;
      if (!detail::parse_size(raw, pos, i)) throw DescriptorError("bad matrix unit in: " + raw);
      detail::skip_ws(raw, pos);
      if (pos >= raw.size() || raw[pos] != ',') throw DescriptorError("bad matrix unit in: " + raw);
      ++pos;
      if (!detail::parse_size(raw, pos, j)) throw DescriptorError("bad matrix unit in: " + raw);
      detail::skip_ws(raw, pos);
      if (pos >= raw.size() || raw[pos] != ')') throw DescriptorError("bad matrix unit in: " + raw);
      ++pos;
      atom = ElementDescriptor::matrix_unit(i, j);
    } else if (raw.compare(pos, 4, "diag") == 0) {
      pos += 4;
      std::size_t p = 1;
      if (pos < raw.size() && raw[pos] == '^') {
        ++pos;
        if (!detail::parse_size(raw, pos, p)) throw DescriptorError("bad exponent in: " + raw);
      }
      atom = ElementDescriptor::diag_function(p);
    } else if (raw.compare(pos, 1, "1") == 0) {
      pos += 1;
      atom = ElementDescriptor::identity();
    } else {
      throw DescriptorError("cannot parse element term: " + raw);
    }
    detail::skip_ws(raw, pos);
    if (pos != raw.size()) throw DescriptorError("trailing input in element term: " + raw);
    out = out + atom.scaled(coeff);
    any = true;
  }
  if (!any) throw DescriptorError("empty element text");
  return out;
}

inline SymbolPolynomial parse_symbol(const std::string& text) {
  SymbolPolynomial out;
  bool any = false;
  for (const std::string& raw : detail::split_terms(text)) {
    std::size_t pos = 0;
    detail::skip_ws(raw, pos);
    if (pos == raw.size()) continue;
    Complex coeff{1.0, 0.0};
    if (raw[pos] == '-' && pos + 1 < raw.size() &&
        !std::isdigit(static_cast<unsigned char>(raw[pos + 1])) && raw[pos + 1] != '.' &&
        raw[pos + 1] != '(') {
      coeff = Complex{-1.0, 0.0};
      ++pos;
      detail::skip_ws(raw, pos);
    }
    Complex mag{1.0, 0.0};
    if (detail::parse_coeff(raw, pos, mag)) {
      coeff *= mag;
      detail::skip_ws(raw, pos);
      if (pos < raw.size() && raw[pos] == '*') {
        ++pos;
      } else if (pos == raw.size()) {
        out.add(0, coeff);
        any = true;
        continue;
      }
    }
    detail::skip_ws(raw, pos);
    if (pos >= raw.size() || raw[pos] != 'z') throw std::invalid_argument("cannot parse symbol term: " + raw);
    ++pos;
    long deg = 1;
    if (pos < raw.size() && raw[pos] == '^') {
      ++pos;
      detail::skip_ws(raw, pos);
      long sign = 1;
      if (pos < raw.size() && (raw[pos] == '-' || raw[pos] == '+')) {
        if (raw[pos] == '-') sign = -1;
        ++pos;
      }
      std::size_t mag = 0;
      if (!detail::parse_size(raw, pos, mag)) throw std::invalid_argument("bad degree in symbol term: " + raw);
      deg = sign * static_cast<long>(mag);
    }
    detail::skip_ws(raw, pos);
    if (pos != raw.size()) throw std::invalid_argument("trailing input in symbol term: " + raw);
    out.add(static_cast<int>(deg), coeff);
    any = true;
  }
  if (!any) throw std::invalid_argument("empty symbol text");
  return out;
}

}  // namespace ncglab
