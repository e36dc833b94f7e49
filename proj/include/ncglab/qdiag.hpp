#pragma once

// Quasidiagonality diagnostics: corner compressions phi_n(a) = P_n a P_n,
// multiplicativity and norm defects, and the trend verdict separating
// AF-like models from the shift.

#include <ncglab/dirac.hpp>
#include <ncglab/models.hpp>
#include <ncglab/opcore.hpp>

#include <string>
#include <vector>

namespace ncglab {

inline constexpr double kQdAbsThreshold = 1e-6;   // "vanishing" absolute cutoff at the last n
inline constexpr double kQdDecayFactor = 10.0;    // or first-to-last decay by this factor
inline constexpr double kQdPersistFloor = 0.1;    // "persistent" once min over n stays above

enum class QdVerdict { vanishing, persistent, inconclusive };

inline const char* to_string(QdVerdict v) {
  switch (v) {
    case QdVerdict::vanishing: return "vanishing";
    case QdVerdict::persistent: return "persistent";
    case QdVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

/// P_n a P_n as an r_n x r_n corner (n is a 1-based chain index).
inline OperatorMatrix compress(const OperatorMatrix& a, const ProjectionChain& chain, std::size_t n) {
  if (n < 1 || n > chain.length()) throw std::out_of_range("compress: chain index out of range");
  if (a.dim() != chain.ambient_dim()) {
    throw std::invalid_argument("compress: matrix dim " + std::to_string(a.dim()) +
                                " != ambient dim " + std::to_string(chain.ambient_dim()));
  }
  const Eigen::Index r = static_cast<Eigen::Index>(chain.rank(n));
  return OperatorMatrix(a.mat().topLeftCorner(r, r));
}

/// ||phi_n(ab) - phi_n(a) phi_n(b)||.
inline double mult_defect(const OperatorMatrix& a, const OperatorMatrix& b,
                          const ProjectionChain& chain, std::size_t n) {
  require_same_dim(a, b, "mult_defect");
  const OperatorMatrix ab = compress(a * b, chain, n);
  const OperatorMatrix cut = compress(a, chain, n) * compress(b, chain, n);
  return op_norm(ab - cut);
}

struct DefectRecord {
  std::size_t n = 0;
  std::size_t rank = 0;
  std::vector<double> mult_defects;  // ordered pairs (i,j), row-major over elements
  std::vector<double> norm_defects;  // | ||phi_n(a_i)|| - ||a_i||_ref | per element
  std::vector<double> comm_norms;    // ||[P_n, a_i]|| per element
};

struct DefectTable {
  std::vector<std::string> element_labels;
  std::size_t reference_dim = 0;
  std::vector<double> reference_norms;
  double abs_threshold = kQdAbsThreshold;
  double decay_factor = kQdDecayFactor;
  double persistence_floor = kQdPersistFloor;
  std::vector<DefectRecord> records;  // ascending n
  QdVerdict verdict = QdVerdict::inconclusive;
};

/// Tabulates multiplicativity defects over all ordered element pairs, norm
/// defects against the reference truncation, and projection commutator
/// norms, then applies the trend rule: vanishing iff every tracked series
/// ends below abs_threshold or decayed by decay_factor; persistent iff some
/// series never drops to persistence_floor.
inline DefectTable qd_scan(const RepresentationModel& model,
                           const std::vector<ElementDescriptor>& elements,
                           const ProjectionChain& chain, const std::vector<std::size_t>& n_values,
                           std::size_t reference_dim) {
  if (elements.empty()) throw std::invalid_argument("qd_scan: element list is empty");
  if (n_values.empty()) throw std::invalid_argument("qd_scan: n_values is empty");
  std::size_t prev = 0;
  for (std::size_t n : n_values) {
    if (n <= prev) throw std::invalid_argument("qd_scan: n_values must be strictly increasing");
    if (n > chain.length()) throw std::invalid_argument("qd_scan: n exceeds chain length");
    prev = n;
  }
  if (reference_dim < chain.ambient_dim()) {
    throw std::invalid_argument("qd_scan: reference_dim must be >= ambient dim");
  }
  const std::size_t L = elements.size();

  DefectTable table;
  table.reference_dim = reference_dim;
  std::vector<OperatorMatrix> mats;
  mats.reserve(L);
  for (const auto& e : elements) {
    table.element_labels.push_back(e.label());
    mats.push_back(realize(model, e, chain.ambient_dim()));
    table.reference_norms.push_back(op_norm(realize(model, e, reference_dim)));
  }

  for (std::size_t n : n_values) {
    DefectRecord rec;
    rec.n = n;
    rec.rank = chain.rank(n);
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < L; ++j) {
        rec.mult_defects.push_back(mult_defect(mats[i], mats[j], chain, n));
      }
    }
    for (std::size_t i = 0; i < L; ++i) {
      rec.norm_defects.push_back(std::abs(op_norm(compress(mats[i], chain, n)) - table.reference_norms[i]));
      rec.comm_norms.push_back(projection_commutator_norm(mats[i], chain.rank(n)));
    }
    table.records.push_back(std::move(rec));
  }

  // Each tracked quantity forms a series over n; judge them together.
  const std::size_t streams = L * L + 2 * L;
  auto stream_value = [&](const DefectRecord& rec, std::size_t s) {
    if (s < L * L) return rec.mult_defects[s];
    if (s < L * L + L) return rec.norm_defects[s - L * L];
    return rec.comm_norms[s - L * L - L];
  };
  bool all_vanishing = true;
  bool any_persistent = false;
  for (std::size_t s = 0; s < streams; ++s) {
    const double first = stream_value(table.records.front(), s);
    const double last = stream_value(table.records.back(), s);
    double min_v = first;
    for (const auto& rec : table.records) min_v = std::min(min_v, stream_value(rec, s));
    if (!(last < kQdAbsThreshold || last <= first / kQdDecayFactor)) all_vanishing = false;
    if (min_v > kQdPersistFloor) any_persistent = true;
  }
  table.verdict = all_vanishing ? QdVerdict::vanishing
                                : (any_persistent ? QdVerdict::persistent : QdVerdict::inconclusive);
  return table;
}

}  // namespace ncglab
