#include <catch2/catch_amalgamated.hpp>

#include <ncglab/verify.hpp>

#include "oracles.hpp"

using ncglab::AlphaSequence;
using ncglab::CMatrix;
using ncglab::Complex;
using ncglab::ElementDescriptor;
using ncglab::OperatorMatrix;
using ncglab::ProjectionChain;
using ncglab::RepresentationModel;
using ncglab::ScanVerdict;
using ncglab::SummabilityVerdict;

namespace {

std::vector<std::size_t> iota_ranks(std::size_t n) {
  std::vector<std::size_t> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = i + 1;
  return r;
}

}  // namespace

TEST_CASE("boundedness scan on the shift is flat at one half") {
  const auto rep = ncglab::boundedness_scan(RepresentationModel::toeplitz(),
                                            ElementDescriptor::shift_power(1),
                                            AlphaSequence::harmonic(), {4, 8, 16});
  REQUIRE(rep.records.size() == 3);
  for (const auto& rec : rep.records) CHECK(rec.value == Catch::Approx(0.5).margin(1e-12));
  CHECK(rep.verdict == ScanVerdict::stable);
  CHECK(rep.evidence.window == Catch::Approx(ncglab::kStabilityWindow * 1.5).margin(1e-18));
  CHECK(rep.scan == "boundedness");
  CHECK(rep.element == "s");
}

TEST_CASE("boundedness scan with linear alpha is flat at one") {
  const auto rep = ncglab::boundedness_scan(RepresentationModel::toeplitz(),
                                            ElementDescriptor::shift_power(1),
                                            AlphaSequence::power(1.0), {4, 8, 16});
  for (const auto& rec : rep.records) CHECK(rec.value == Catch::Approx(1.0).margin(1e-12));
  CHECK(rep.verdict == ScanVerdict::stable);
}

TEST_CASE("boundedness scan on the diagonal model is identically zero") {
  const auto rep = ncglab::boundedness_scan(RepresentationModel::diagonal(),
                                            ElementDescriptor::diag_function(),
                                            AlphaSequence::power(2.0), {4, 8, 16});
  for (const auto& rec : rep.records) CHECK(rec.value == 0.0);
  CHECK(rep.verdict == ScanVerdict::stable);
}

TEST_CASE("boundedness scan agrees with the dense commutator") {
  const auto model = RepresentationModel::toeplitz();
  const auto e = ElementDescriptor::shift_power(2);
  const auto alpha = AlphaSequence::harmonic();
  const std::vector<std::size_t> dims = {5, 9, 17};
  const auto rep = ncglab::boundedness_scan(model, e, alpha, dims);
  for (std::size_t t = 0; t < dims.size(); ++t) {
    const std::size_t N = dims[t];
    const ProjectionChain chain(N, ncglab::default_chain(model, N));
    const auto a = ncglab::realize(model, e, N);
    const double direct = ncglab::op_norm(ncglab::commutator(ncglab::assemble_dirac(chain, alpha), a));
    CHECK(rep.records[t].value == Catch::Approx(direct).margin(1e-12));
  }
}

TEST_CASE("boundedness scan edge cases") {
  const auto one = ncglab::boundedness_scan(RepresentationModel::toeplitz(),
                                            ElementDescriptor::shift_power(1),
                                            AlphaSequence::harmonic(), {8});
  CHECK(one.verdict == ScanVerdict::inconclusive);

  CHECK_THROWS_AS(ncglab::boundedness_scan(RepresentationModel::toeplitz(),
                                           ElementDescriptor::shift_power(1),
                                           AlphaSequence::harmonic(), {8, 8}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ncglab::boundedness_scan(RepresentationModel::toeplitz(),
                                           ElementDescriptor::shift_power(1),
                                           AlphaSequence::harmonic(), {}),
                  std::invalid_argument);

  // Geometric alpha makes the shift commutator blow up across truncations.
  const auto grow = ncglab::boundedness_scan(RepresentationModel::toeplitz(),
                                             ElementDescriptor::shift_power(1),
                                             AlphaSequence::geometric(2.0), {4, 8, 16});
  CHECK(grow.verdict == ScanVerdict::growing);
  CHECK(grow.evidence.last > grow.evidence.previous);
}

TEST_CASE("compactness scan on the shift with harmonic alpha") {
  const auto rep = ncglab::compactness_scan(RepresentationModel::toeplitz(),
                                            ElementDescriptor::shift_power(1),
                                            AlphaSequence::harmonic(), {8, 16, 32}, 2);
  REQUIRE(rep.records.size() == 3);
  for (const auto& rec : rep.records) {
    CHECK(rec.value == Catch::Approx(0.25).margin(1e-12));  // sigma_3 = 1/4
    REQUIRE(rec.singular_values.size() == rec.dim);
    CHECK(rec.singular_values[0] == Catch::Approx(0.5).margin(1e-12));
  }
  CHECK(rep.verdict == ScanVerdict::stable);
  CHECK(rep.evidence.nonincreasing);
  CHECK(rep.evidence.tail_reference == Catch::Approx(1.0 / 3.0).margin(1e-12));
  CHECK_FALSE(rep.evidence.zero_reference);
  CHECK(rep.evidence.tail_ok);
  CHECK(rep.evidence.tail_hit >= 5);  // first sigma_j below reference/2 = 1/6
  CHECK(rep.evidence.tail_hit <= 6);
  CHECK(rep.tail_index == 2);
}

TEST_CASE("compactness scan flags geometric growth") {
  const auto rep = ncglab::compactness_scan(RepresentationModel::toeplitz(),
                                            ElementDescriptor::shift_power(1),
                                            AlphaSequence::geometric(2.0), {8, 16}, 2);
  // Subdiagonal gaps are 2^i, so sigma_3 = 2^(N-3) keeps growing.
  CHECK(rep.records[0].value == Catch::Approx(32.0).margin(1e-9));
  CHECK(rep.records[1].value == Catch::Approx(8192.0).margin(1e-6));
  CHECK_FALSE(rep.evidence.nonincreasing);
  CHECK(rep.verdict == ScanVerdict::growing);
}

TEST_CASE("compactness scan with a flat spectrum still sees the zero tail") {
  // Linear alpha gives all gaps equal to 1; the padded zero singular value
  // is what satisfies the tail inspection.
  const auto rep = ncglab::compactness_scan(RepresentationModel::toeplitz(),
                                            ElementDescriptor::shift_power(1),
                                            AlphaSequence::power(1.0), {4, 8}, 2);
  for (const auto& rec : rep.records) CHECK(rec.value == Catch::Approx(1.0).margin(1e-12));
  CHECK(rep.evidence.tail_ok);
  CHECK(rep.evidence.tail_hit == 8);
  CHECK(rep.verdict == ScanVerdict::stable);
}

TEST_CASE("compactness scan on a block element is identically zero") {
  const auto model = RepresentationModel::rfd({{2, 1}, {3, 1}});
  CMatrix payload(2, 2);
  payload << Complex{1.0, 0.0}, Complex{0.0, 2.0}, Complex{0.0, -2.0}, Complex{0.5, 0.0};
  const auto rep = ncglab::compactness_scan(model, ElementDescriptor::block_element(1, payload),
                                            AlphaSequence::harmonic(), {5, 10, 20}, 2);
  for (const auto& rec : rep.records) CHECK(rec.value == 0.0);
  CHECK(rep.evidence.zero_reference);
  CHECK(rep.evidence.tail_ok);
  CHECK(rep.verdict == ScanVerdict::stable);
}

TEST_CASE("compactness scan validates the tail index") {
  CHECK_THROWS_AS(ncglab::compactness_scan(RepresentationModel::toeplitz(),
                                           ElementDescriptor::shift_power(1),
                                           AlphaSequence::harmonic(), {8, 16}, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ncglab::compactness_scan(RepresentationModel::toeplitz(),
                                           ElementDescriptor::shift_power(1),
                                           AlphaSequence::harmonic(), {8, 16}, 8),
                  std::invalid_argument);
}

TEST_CASE("offdiag check is vacuous on the identity") {
  const ProjectionChain chain(4, iota_ranks(4));
  const auto rep = ncglab::offdiag_check(OperatorMatrix::identity(4), chain,
                                         AlphaSequence::harmonic());
  CHECK(rep.passed);
  CHECK(rep.commutator_norm == 0.0);
  CHECK(rep.checked_pairs == 12);
  CHECK(rep.worst_ratio == 0.0);
  CHECK(rep.skipped.empty());
}

TEST_CASE("offdiag check is tight on a matrix unit") {
  const ProjectionChain chain(4, iota_ranks(4));
  const auto alpha = AlphaSequence::custom({0.0, 1.0, 2.0, 4.0});
  const auto rep = ncglab::offdiag_check(OperatorMatrix::matrix_unit(4, 1, 4), chain, alpha);
  CHECK(rep.passed);
  CHECK(rep.commutator_norm == Catch::Approx(4.0).margin(1e-12));
  CHECK(rep.worst.i == 1);
  CHECK(rep.worst.j == 4);
  CHECK(rep.worst_ratio == Catch::Approx(1.0).margin(1e-12));  // equality case
  CHECK(rep.worst_margin == Catch::Approx(-1e-8).margin(1e-12));
}

TEST_CASE("offdiag check passes on the shift") {
  const std::size_t N = 16;
  const auto model = RepresentationModel::toeplitz();
  const ProjectionChain chain(N, ncglab::default_chain(model, N));
  const auto a = ncglab::realize(model, ElementDescriptor::shift_power(1), N);
  const auto rep = ncglab::offdiag_check(a, chain, AlphaSequence::harmonic());
  CHECK(rep.passed);
  CHECK(rep.worst_ratio <= 1.0 + 1e-9);
  CHECK(rep.checked_pairs == N * (N - 1));
}

TEST_CASE("offdiag bound holds on random instances") {
  oracle::Rng rng(21ULL);
  for (int t = 0; t < 40; ++t) {
    const std::size_t dim = rng.index(2, 24);
    const ProjectionChain chain(dim, rng.chain_ranks(dim));
    std::vector<double> vals;
    double mag = 0.0;
    for (std::size_t k = 0; k < chain.length(); ++k) {
      mag += rng.real(0.1, 2.0);  // spaced, so no pair gets skipped
      vals.push_back(mag);
    }
    const auto rep = ncglab::offdiag_check(OperatorMatrix(rng.matrix(dim)), chain,
                                           AlphaSequence::custom(vals));
    CHECK(rep.passed);
    CHECK(rep.skipped.empty());
    CHECK(rep.worst_ratio <= 1.0 + 1e-9);
  }
}

TEST_CASE("offdiag check skips repeated alpha pairs") {
  const ProjectionChain chain(3, iota_ranks(3));
  const auto rep = ncglab::offdiag_check(OperatorMatrix::identity(3), chain,
                                         AlphaSequence::custom({1.0, 1.0, 2.0}));
  CHECK(rep.skipped.size() == 2);
  CHECK(rep.checked_pairs == 4);
  CHECK(rep.passed);

  CHECK_THROWS_AS(ncglab::offdiag_check(OperatorMatrix::identity(4), chain,
                                        AlphaSequence::harmonic()),
                  std::invalid_argument);
}

TEST_CASE("summability of harmonic alpha diverges for every p") {
  const auto reports = ncglab::summability_profile(AlphaSequence::harmonic(), {},
                                                   {1.0, 2.0, 4.0}, 1u << 20);
  REQUIRE(reports.size() == 3);
  for (const auto& rep : reports) {
    CHECK(rep.verdict == SummabilityVerdict::diverging);
    CHECK(rep.k_used == (1u << 20));
    CHECK(std::isinf(rep.final_tail_bound));
    REQUIRE(rep.last_increments.size() == 3);
    for (double inc : rep.last_increments) CHECK(inc > ncglab::kDivergingIncrement);
  }
  // Larger p makes every checkpoint sum smaller.
  for (std::size_t cp = 0; cp < reports[0].checkpoints.size(); ++cp) {
    CHECK(reports[1].checkpoints[cp].partial_sum < reports[0].checkpoints[cp].partial_sum);
    CHECK(reports[2].checkpoints[cp].partial_sum < reports[1].checkpoints[cp].partial_sum);
  }
}

TEST_CASE("summability of linear alpha converges at p = 3") {
  const auto reports = ncglab::summability_profile(AlphaSequence::power(1.0), {}, {3.0}, 1u << 20);
  REQUIRE(reports.size() == 1);
  const auto& rep = reports[0];
  CHECK(rep.verdict == SummabilityVerdict::converged);
  CHECK(rep.final_tail_bound < ncglab::kConvergedWindow * rep.final_sum);

  double brute = 0.0;
  for (std::size_t k = 10'000'000; k >= 1; --k) {
    const double w = 1.0 + static_cast<double>(k) * static_cast<double>(k);
    brute += 1.0 / (w * std::sqrt(w));
  }
  CHECK(std::abs(rep.final_sum - brute) <= 1e-6 * brute);

  // Partial sums are nondecreasing across checkpoints, tail bounds shrink.
  for (std::size_t t = 1; t < rep.checkpoints.size(); ++t) {
    CHECK(rep.checkpoints[t].partial_sum >= rep.checkpoints[t - 1].partial_sum);
    CHECK(rep.checkpoints[t].tail_bound <= rep.checkpoints[t - 1].tail_bound);
  }
}

TEST_CASE("summability of geometric alpha converges below p = 1") {
  const auto reports = ncglab::summability_profile(AlphaSequence::geometric(2.0), {}, {0.5}, 4096);
  CHECK(reports[0].verdict == SummabilityVerdict::converged);
}

TEST_CASE("summability with a finite custom list is inconclusive") {
  const auto reports = ncglab::summability_profile(
      AlphaSequence::custom({1, 2, 3, 4, 5, 6, 7, 8}), {}, {2.0}, 64);
  const auto& rep = reports[0];
  CHECK(rep.k_max == 64);
  CHECK(rep.k_used == 8);
  CHECK(rep.verdict == SummabilityVerdict::inconclusive);
  CHECK_FALSE(rep.note.empty());
  REQUIRE(rep.checkpoints.size() == 1);
  CHECK(rep.checkpoints[0].K == 8);
  CHECK(std::isinf(rep.checkpoints[0].tail_bound));
}

TEST_CASE("summability respects declared multiplicities") {
  const std::vector<std::size_t> mult = {3, 2};
  const auto reports = ncglab::summability_profile(AlphaSequence::power(1.0), mult, {3.0}, 16);
  const auto& rep = reports[0];

  double manual = 0.0;
  for (std::size_t k = 1; k <= 16; ++k) {
    const double m = k <= mult.size() ? static_cast<double>(mult[k - 1]) : 1.0;
    const double a = static_cast<double>(k);
    manual += m * std::pow(1.0 + a * a, -1.5);
  }
  CHECK(rep.final_sum == Catch::Approx(manual).margin(1e-12));

  // The K = 16 checkpoint is past the declared list, so the bound is sound:
  // K^(1-pq)/(pq-1) with pq = 3.
  CHECK(rep.checkpoints.back().tail_bound == Catch::Approx(std::pow(16.0, -2.0) / 2.0).margin(1e-15));
}

TEST_CASE("summability input validation") {
  const auto alpha = AlphaSequence::harmonic();
  CHECK_THROWS_AS(ncglab::summability_profile(alpha, {}, {0.0}, 64), std::invalid_argument);
  CHECK_THROWS_AS(ncglab::summability_profile(alpha, {}, {-1.0}, 64), std::invalid_argument);
  CHECK_THROWS_AS(ncglab::summability_profile(alpha, {}, {}, 64), std::invalid_argument);
  CHECK_THROWS_AS(ncglab::summability_profile(alpha, {0}, {1.0}, 64), std::invalid_argument);
  CHECK_THROWS_AS(ncglab::summability_profile(alpha, {}, {1.0}, 0), std::invalid_argument);
}

TEST_CASE("verdict thresholds are the frozen constants") {
  CHECK(ncglab::kStabilityWindow == 1e-6);
  CHECK(ncglab::kMonotoneSlack == 1e-12);
  CHECK(ncglab::kZeroReference == 1e-12);
  CHECK(ncglab::kConvergedWindow == 1e-6);
  CHECK(ncglab::kDivergingIncrement == 1e-6);
  CHECK(ncglab::kFirstCheckpoint == 16);
}
