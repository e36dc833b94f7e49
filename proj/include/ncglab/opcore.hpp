#pragma once

// Dense complex matrix calculus: commutators, operator norms, singular
// values and projection diagnostics. Everything in this header is a pure
// function of its inputs; OperatorMatrix values are immutable once built,
// so they are safe to share across threads.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ncglab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

/// Comparison knobs shared by the diagnostic checks.
struct Tolerance {
  double exact_eq = 1e-10;
  double bound_slack = 1e-8;

  void validate() const {
    if (!(exact_eq > 0.0) || !(bound_slack > 0.0)) {
      throw std::invalid_argument("Tolerance fields must be strictly positive");
    }
  }
};

namespace detail {

// If every row and every column carries at most one structurally nonzero
// entry, the singular values are exactly the moduli of those entries.
// Truncated shifts, matrix units, diagonal operators and their commutators
// all land here, which keeps the large scans cheap and exact.
inline std::optional<std::vector<double>> monomial_singular_values(const CMatrix& m) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index cols = m.cols();
  std::vector<bool> row_used(static_cast<std::size_t>(rows), false);
  std::vector<bool> col_used(static_cast<std::size_t>(cols), false);
  std::vector<double> mags;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Complex v = m(r, c);
      if (v == Complex{0.0, 0.0}) continue;
      if (row_used[static_cast<std::size_t>(r)] || col_used[static_cast<std::size_t>(c)]) {
        return std::nullopt;
      }
      row_used[static_cast<std::size_t>(r)] = true;
      col_used[static_cast<std::size_t>(c)] = true;
      mags.push_back(std::abs(v));
    }
  }
  std::sort(mags.begin(), mags.end(), std::greater<>());
  mags.resize(static_cast<std::size_t>(std::min(rows, cols)), 0.0);
  return mags;
}

inline std::vector<double> dense_singular_values(const CMatrix& m) {
  Eigen::BDCSVD<CMatrix> svd(m);
  const auto& sv = svd.singularValues();
  return std::vector<double>(sv.data(), sv.data() + sv.size());
}

// Singular values of a (possibly rectangular) block, nonincreasing,
// min(rows, cols) of them.
inline std::vector<double> singular_values_of(const CMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  if (auto fast = monomial_singular_values(m)) return std::move(*fast);
  return dense_singular_values(m);
}

inline double spectral_norm(const CMatrix& m) {
  const auto sv = singular_values_of(m);
  return sv.empty() ? 0.0 : sv.front();
}

}  // namespace detail

/// Dense complex square matrix with a dimension tag; the concrete form of
/// every truncated operator handled by the library.
class OperatorMatrix {
 public:
  explicit OperatorMatrix(CMatrix entries) : mat_(std::move(entries)) {
    if (mat_.rows() < 1 || mat_.rows() != mat_.cols()) {
      throw std::invalid_argument("OperatorMatrix requires a square matrix of positive dimension");
    }
  }

  static OperatorMatrix zero(std::size_t dim) {
    return OperatorMatrix(CMatrix::Zero(checked(dim), checked(dim)));
  }

  static OperatorMatrix identity(std::size_t dim) {
    return OperatorMatrix(CMatrix::Identity(checked(dim), checked(dim)));
  }

  static OperatorMatrix diagonal(const std::vector<double>& values) {
    const Eigen::Index n = checked(values.size());
    CMatrix m = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = values[static_cast<std::size_t>(i)];
    return OperatorMatrix(std::move(m));
  }

  /// Standard matrix unit e_{ij} (1-based indices).
  static OperatorMatrix matrix_unit(std::size_t dim, std::size_t i, std::size_t j) {
    if (i < 1 || j < 1 || i > dim || j > dim) {
      throw std::invalid_argument("matrix_unit: index out of range");
    }
    CMatrix m = CMatrix::Zero(checked(dim), checked(dim));
    m(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j - 1)) = 1.0;
    return OperatorMatrix(std::move(m));
  }

  std::size_t dim() const { return static_cast<std::size_t>(mat_.rows()); }
  const CMatrix& mat() const { return mat_; }

  /// Entry access, 0-based.
  Complex operator()(std::size_t row, std::size_t col) const {
    return mat_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }

  OperatorMatrix adjoint() const { return OperatorMatrix(mat_.adjoint()); }

  double max_abs() const { return mat_.cwiseAbs().maxCoeff(); }

  double selfadjoint_defect() const { return (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff(); }

  /// Scale-aware self-adjointness test: max|M - M*| <= 1e-12 * max(1, max|entry|).
  bool is_selfadjoint() const { return selfadjoint_defect() <= 1e-12 * std::max(1.0, max_abs()); }

 private:
  static Eigen::Index checked(std::size_t dim) {
    if (dim == 0) throw std::invalid_argument("dimension must be positive");
    return static_cast<Eigen::Index>(dim);
  }

  CMatrix mat_;
};

inline void require_same_dim(const OperatorMatrix& a, const OperatorMatrix& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

inline OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dim(a, b, "operator+");
  return OperatorMatrix(a.mat() + b.mat());
}

inline OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dim(a, b, "operator-");
  return OperatorMatrix(a.mat() - b.mat());
}

inline OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dim(a, b, "operator*");
  return OperatorMatrix(a.mat() * b.mat());
}

inline OperatorMatrix operator*(Complex scale, const OperatorMatrix& m) {
  return OperatorMatrix(scale * m.mat());
}

/// ab - ba.
inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dim(a, b, "commutator");
  return OperatorMatrix(a.mat() * b.mat() - b.mat() * a.mat());
}

/// All dim singular values, nonincreasing.
inline std::vector<double> singular_values(const OperatorMatrix& m) {
  return detail::singular_values_of(m.mat());
}

/// Largest singular value.
inline double op_norm(const OperatorMatrix& m) { return detail::spectral_norm(m.mat()); }

struct ProjectionDiagnostic {
  double idempotency_defect = 0.0;
  double selfadjoint_defect = 0.0;
  std::size_t rank = 0;
  bool passed = false;
};

/// Reports max|p^2 - p|, max|p - p*| and the numerical rank (singular
/// values above 1/2, the maximally separated cut for a spectrum clustering
/// at 0 and 1). Diagnostic only, never throws on a bad projection.
inline ProjectionDiagnostic validate_projection(const OperatorMatrix& p, const Tolerance& tol = {}) {
  tol.validate();
  ProjectionDiagnostic diag;
  diag.idempotency_defect = (p.mat() * p.mat() - p.mat()).cwiseAbs().maxCoeff();
  diag.selfadjoint_defect = p.selfadjoint_defect();
  for (double sv : singular_values(p)) {
    if (sv > 0.5) ++diag.rank;
  }
  diag.passed = diag.idempotency_defect <= tol.exact_eq && diag.selfadjoint_defect <= tol.exact_eq;
  return diag;
}

}  // namespace ncglab
