#include <catch2/catch_amalgamated.hpp>

#include <ncglab/models.hpp>

#include "oracles.hpp"

using ncglab::CMatrix;
using ncglab::Complex;
using ncglab::ElementDescriptor;
using ncglab::OperatorMatrix;
using ncglab::RepresentationModel;

namespace {

double entry_diff(const OperatorMatrix& a, const CMatrix& b) {
  return (a.mat() - b).cwiseAbs().maxCoeff();
}

// Descriptor battery valid for a given model, used by the property tests.
std::vector<ElementDescriptor> battery(const RepresentationModel& m) {
  using ED = ElementDescriptor;
  switch (m.kind()) {
    case ncglab::ModelKind::toeplitz:
      return {ED::identity(), ED::shift_power(1), ED::shift_power(2), ED::adj_shift_power(1),
              ED::matrix_unit(1, 2), ED::matrix_unit(2, 2),
              ED::shift_power(1).scaled(Complex{0.0, 2.0}) + ED::matrix_unit(1, 3)};
    case ncglab::ModelKind::compacts_unit:
      return {ED::identity(), ED::matrix_unit(1, 2), ED::matrix_unit(3, 1),
              ED::matrix_unit(2, 2).scaled(Complex{-1.5, 0.5}) + ED::identity()};
    case ncglab::ModelKind::diagonal:
      return {ED::identity(), ED::diag_function(), ED::diag_function(2),
              ED::diag_function().scaled(Complex{2.0, 1.0})};
    case ncglab::ModelKind::rfd: {
      CMatrix m2(2, 2);
      m2 << Complex{1.0, 0.0}, Complex{0.0, 2.0}, Complex{-1.0, 0.0}, Complex{0.5, 0.5};
      return {ED::identity(), ED::block_element(1, m2),
              ED::block_element(2, CMatrix::Identity(3, 3) * Complex{0.0, 1.0})};
    }
  }
  return {};
}

}  // namespace

TEST_CASE("realize pinned examples") {
  const auto shift3 = ncglab::realize(RepresentationModel::toeplitz(),
                                      ElementDescriptor::shift_power(1), 3);
  CMatrix expect = CMatrix::Zero(3, 3);
  expect(1, 0) = 1.0;
  expect(2, 1) = 1.0;
  CHECK(entry_diff(shift3, expect) == 0.0);

  const auto diag3 = ncglab::realize(RepresentationModel::diagonal(),
                                     ElementDescriptor::diag_function(), 3);
  CHECK(diag3(0, 0) == Complex{1.0, 0.0});
  CHECK(diag3(1, 1) == Complex{0.5, 0.0});
  CHECK(diag3(2, 2) == Complex{1.0 / 3.0, 0.0});
  CHECK(diag3(0, 1) == Complex{0.0, 0.0});

  const auto e12 = ncglab::realize(RepresentationModel::compacts_unit(),
                                   ElementDescriptor::matrix_unit(1, 2), 4);
  CHECK(entry_diff(e12, OperatorMatrix::matrix_unit(4, 1, 2).mat()) == 0.0);
}

TEST_CASE("realize rejects descriptor/model mismatches") {
  CHECK_THROWS_AS(ncglab::realize(RepresentationModel::toeplitz(),
                                  ElementDescriptor::diag_function(), 4),
                  ncglab::DescriptorError);
  CHECK_THROWS_AS(ncglab::realize(RepresentationModel::diagonal(),
                                  ElementDescriptor::matrix_unit(1, 2), 4),
                  ncglab::DescriptorError);
  CHECK_THROWS_AS(ncglab::realize(RepresentationModel::compacts_unit(),
                                  ElementDescriptor::shift_power(1), 4),
                  ncglab::DescriptorError);
}

TEST_CASE("default_chain pinned examples") {
  CHECK(ncglab::default_chain(RepresentationModel::toeplitz(), 4) ==
        std::vector<std::size_t>{1, 2, 3, 4});
  CHECK(ncglab::default_chain(RepresentationModel::rfd({{2, 1}, {3, 1}}), 5) ==
        std::vector<std::size_t>{2, 5});
  CHECK(ncglab::default_chain(RepresentationModel::diagonal(), 1) == std::vector<std::size_t>{1});
  // Clipped at the ambient dim even mid-block.
  CHECK(ncglab::default_chain(RepresentationModel::rfd({{2, 1}, {3, 1}}), 4) ==
        std::vector<std::size_t>{2, 4});
  // Cyclic repetition of the declared pattern.
  CHECK(ncglab::default_chain(RepresentationModel::rfd({{2, 2}}), 8) ==
        std::vector<std::size_t>{2, 4, 6, 8});
}

TEST_CASE("model metadata flags") {
  CHECK(RepresentationModel::toeplitz().metadata().known_non_qd);
  CHECK_FALSE(RepresentationModel::toeplitz().metadata().af_filtration);
  CHECK(RepresentationModel::compacts_unit().metadata().af_filtration);
  CHECK(RepresentationModel::diagonal().metadata().af_filtration);
  CHECK(RepresentationModel::rfd({{2, 1}}).metadata().rfd);
}

TEST_CASE("realize is star-compatible exactly") {
  const RepresentationModel models[] = {
      RepresentationModel::toeplitz(), RepresentationModel::compacts_unit(),
      RepresentationModel::diagonal(), RepresentationModel::rfd({{2, 1}, {3, 1}})};
  for (const auto& m : models) {
    for (const auto& e : battery(m)) {
      const auto direct = ncglab::realize(m, e.adjointed(), 8);
      const auto star = ncglab::realize(m, e, 8).adjoint();
      CHECK(entry_diff(direct, star.mat()) == 0.0);
    }
  }
}

TEST_CASE("realize nests across truncation sizes") {
  const RepresentationModel models[] = {
      RepresentationModel::toeplitz(), RepresentationModel::compacts_unit(),
      RepresentationModel::diagonal(), RepresentationModel::rfd({{2, 1}, {3, 1}})};
  for (const auto& m : models) {
    for (const auto& e : battery(m)) {
      const auto small = ncglab::realize(m, e, 6);
      const auto large = ncglab::realize(m, e, 11);
      CHECK((large.mat().topLeftCorner(6, 6) - small.mat()).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("diagonal and rfd realizations commute with their default chains") {
  const RepresentationModel models[] = {RepresentationModel::diagonal(),
                                        RepresentationModel::rfd({{2, 1}, {3, 2}})};
  for (const auto& m : models) {
    for (const auto& e : battery(m)) {
      const auto a = ncglab::realize(m, e, 10);
      for (const std::size_t r : ncglab::default_chain(m, 10)) {
        CMatrix p = CMatrix::Zero(10, 10);
        for (std::size_t i = 0; i < r; ++i) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
        const CMatrix comm = p * a.mat() - a.mat() * p;
        CHECK(comm.cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
}

TEST_CASE("realize is linear in the descriptor") {
  using ED = ElementDescriptor;
  const auto m = RepresentationModel::toeplitz();
  const Complex c{0.75, -2.0};
  const auto e1 = ED::shift_power(1);
  const auto e2 = ED::matrix_unit(2, 3);
  const auto combo = e1.scaled(c) + e2;
  const CMatrix want = c * ncglab::realize(m, e1, 6).mat() + ncglab::realize(m, e2, 6).mat();
  CHECK(entry_diff(ncglab::realize(m, combo, 6), want) == 0.0);
}

TEST_CASE("descriptor products follow the shift relations") {
  using ED = ElementDescriptor;
  const auto m = RepresentationModel::toeplitz();
  const std::size_t N = 7;

  // s* s = 1 in the algebra (exact, before truncation).
  CHECK((ED::adj_shift_power(1) * ED::shift_power(1)).same_as(ED::identity()));
  // s s* = 1 - e11.
  const auto ss_star = ED::shift_power(1) * ED::adj_shift_power(1);
  CHECK(ss_star.same_as(ED::identity() + ED::matrix_unit(1, 1).scaled(Complex{-1.0, 0.0})));
  // s^2 (s*)^2 = 1 - e11 - e22.
  const auto s2s2 = ED::shift_power(2) * ED::adj_shift_power(2);
  CHECK(s2s2.same_as(ED::identity() + ED::matrix_unit(1, 1).scaled(Complex{-1.0, 0.0}) +
                     ED::matrix_unit(2, 2).scaled(Complex{-1.0, 0.0})));
  // Matrix unit algebra.
  CHECK((ED::matrix_unit(1, 2) * ED::matrix_unit(2, 1)).same_as(ED::matrix_unit(1, 1)));
  CHECK((ED::matrix_unit(1, 2) * ED::matrix_unit(3, 1)).empty());
  CHECK((ED::shift_power(1) * ED::matrix_unit(1, 1)).same_as(ED::matrix_unit(2, 1)));
  // e_ij s = e_{i, j-1}, annihilated when j = 1.
  CHECK((ED::matrix_unit(1, 2) * ED::shift_power(1)).same_as(ED::matrix_unit(1, 1)));
  CHECK((ED::matrix_unit(1, 1) * ED::shift_power(1)).empty());

  // Realized product of interior-supported words matches the matrix product.
  const auto w1 = ED::matrix_unit(1, 2) + ED::shift_power(1).scaled(Complex{0.5, 0.0});
  const auto w2 = ED::matrix_unit(2, 3);
  const auto sym = ncglab::realize(m, w1 * w2, N);
  const CMatrix direct = ncglab::realize(m, w1, N).mat() * ncglab::realize(m, w2, N).mat();
  CHECK(entry_diff(sym, direct) <= 1e-15);
}

TEST_CASE("descriptor sums canonicalize") {
  using ED = ElementDescriptor;
  const auto two_s = ED::shift_power(1) + ED::shift_power(1);
  REQUIRE(two_s.terms().size() == 1);
  CHECK(two_s.terms().front().coeff == Complex{2.0, 0.0});
  const auto cancel = ED::shift_power(1) + ED::shift_power(1).scaled(Complex{-1.0, 0.0});
  CHECK(cancel.empty());
}

TEST_CASE("adjoint of descriptors") {
  using ED = ElementDescriptor;
  CHECK(ED::shift_power(2).adjointed().same_as(ED::adj_shift_power(2)));
  CHECK(ED::matrix_unit(1, 2).adjointed().same_as(ED::matrix_unit(2, 1)));
  const Complex c{2.0, 3.0};
  const auto scaled = ED::matrix_unit(1, 2).scaled(c).adjointed();
  CHECK(scaled.same_as(ED::matrix_unit(2, 1).scaled(std::conj(c))));
  CHECK(ED::diag_function(2).adjointed().same_as(ED::diag_function(2)));
}

TEST_CASE("close_elements contains adjoints and bounded products") {
  using ED = ElementDescriptor;
  const auto closed = ncglab::close_elements({ED::matrix_unit(1, 2)}, 3);
  auto contains = [&](const ED& e) {
    for (const auto& x : closed) {
      if (x.same_as(e)) return true;
    }
    return false;
  };
  CHECK(contains(ED::matrix_unit(1, 2)));
  CHECK(contains(ED::matrix_unit(2, 1)));
  CHECK(contains(ED::matrix_unit(1, 1)));
  CHECK(contains(ED::matrix_unit(2, 2)));
  CHECK(closed.size() == 4);

  const auto shift_closed = ncglab::close_elements({ED::shift_power(1)}, 2);
  auto in_shift = [&](const ED& e) {
    for (const auto& x : shift_closed) {
      if (x.same_as(e)) return true;
    }
    return false;
  };
  CHECK(in_shift(ED::shift_power(1)));
  CHECK(in_shift(ED::adj_shift_power(1)));
  CHECK(in_shift(ED::shift_power(2)));
  CHECK(in_shift(ED::identity()));  // from s* s
  CHECK(in_shift(ED::identity() + ED::matrix_unit(1, 1).scaled(Complex{-1.0, 0.0})));  // s s*
}

TEST_CASE("winding pinned examples") {
  using ncglab::SymbolPolynomial;
  CHECK(ncglab::winding_index(SymbolPolynomial::monomial(1), 4096) == -1);
  CHECK(ncglab::winding_index(SymbolPolynomial::monomial(0), 4096) == 0);
  CHECK(ncglab::winding_index(SymbolPolynomial::monomial(2), 4096) == -2);
  const auto details = ncglab::winding_details(SymbolPolynomial::monomial(1), 4096);
  CHECK(details.winding == 1);
  CHECK(details.residual < 0.01);
  CHECK(details.min_abs > 1e-8);
}

TEST_CASE("winding is additive over products") {
  using ncglab::SymbolPolynomial;
  // phi = z^2 + 0.2 (nonvanishing), psi = 3 + z (dominant constant).
  SymbolPolynomial phi = SymbolPolynomial::monomial(2);
  phi.add(0, Complex{0.2, 0.0});
  SymbolPolynomial psi = SymbolPolynomial::monomial(0, Complex{3.0, 0.0});
  psi.add(1, Complex{1.0, 0.0});
  const int wp = ncglab::winding_index(phi, 4096);
  const int wq = ncglab::winding_index(psi, 4096);
  const int wpq = ncglab::winding_index(phi * psi, 4096);
  CHECK(wp == -2);
  CHECK(wq == 0);
  CHECK(wpq == wp + wq);
}

TEST_CASE("winding rejects vanishing symbols and undersampling") {
  using ncglab::SymbolPolynomial;
  SymbolPolynomial bad = SymbolPolynomial::monomial(1);
  bad.add(0, Complex{-1.0, 0.0});  // z - 1 vanishes at z = 1
  CHECK_THROWS_AS(ncglab::winding_index(bad, 4096), std::domain_error);
  CHECK_THROWS_AS(ncglab::winding_details(SymbolPolynomial::monomial(2), 16),
                  std::invalid_argument);
}

TEST_CASE("parse_element round trips through labels") {
  const char* texts[] = {"s",      "s*",          "s^2",    "s*^3", "e(1,2)",
                         "diag",   "diag^2",      "1",      "2*s",  "s + s*",
                         "1 - s",  "(0,1)*e(2,3)", "-s + 2"};
  for (const char* t : texts) {
    const auto e = ncglab::parse_element(t);
    const auto again = ncglab::parse_element(e.label());
    CHECK(again.same_as(e));
  }
  CHECK_THROWS_AS(ncglab::parse_element("q"), ncglab::DescriptorError);
  CHECK_THROWS_AS(ncglab::parse_element(""), ncglab::DescriptorError);
  CHECK_THROWS_AS(ncglab::parse_element("e(0,1)"), ncglab::DescriptorError);
}

TEST_CASE("parse_symbol handles signs, powers and constants") {
  const auto p = ncglab::parse_symbol("2*z^3 - 0.5 + z^-1");
  CHECK(p.eval(0.0) == Complex{2.0, 0.0} - Complex{0.5, 0.0} + Complex{1.0, 0.0});
  CHECK(ncglab::winding_index(ncglab::parse_symbol("z"), 4096) == -1);
  CHECK_THROWS_AS(ncglab::parse_symbol("w"), std::invalid_argument);
}

TEST_CASE("rfd block realization places payloads on the block diagonal") {
  const auto model = RepresentationModel::rfd({{2, 1}, {3, 1}});
  CMatrix payload(3, 3);
  payload.setZero();
  payload(0, 2) = Complex{0.0, 1.0};
  const auto a = ncglab::realize(model, ncglab::ElementDescriptor::block_element(2, payload), 10);
  // Block 2 spans rows/cols 3..5 (1-based); the cyclic pattern repeats at 6.
  CHECK(a(2, 4) == Complex{0.0, 1.0});
  CMatrix mask = a.mat();
  mask(2, 4) = 0.0;
  CHECK(mask.cwiseAbs().maxCoeff() == 0.0);
  // Payload dim must match the block dim at realization time.
  CHECK_THROWS_AS(
      ncglab::realize(model, ncglab::ElementDescriptor::block_element(1, payload), 10),
      ncglab::DescriptorError);
}
