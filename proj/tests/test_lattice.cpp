#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "zeno/lattice.hpp"
#include "zeno/measurement.hpp"

using namespace zeno;
using namespace zeno::lattice;

namespace {

// Dense one-step matrix on [e, staging, ring cells 0..L-1], built from the
// shift-after-core-rotation definition.
Eigen::MatrixXcd dense_ring_step(double theta, std::size_t L) {
  const double c = std::cos(theta), s = std::sin(theta);
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Identity(2 + L, 2 + L);
  k(0, 0) = c;
  k(0, 1) = -s;
  k(1, 0) = s;
  k(1, 1) = c;
  Eigen::MatrixXcd shift = Eigen::MatrixXcd::Zero(2 + L, 2 + L);
  shift(0, 0) = 1.0;
  shift(2, 1) = 1.0;  // staging -> first ring cell
  for (std::size_t j = 0; j + 1 < L; ++j) shift(3 + j, 2 + j) = 1.0;
  shift(1, 1 + L) = 1.0;  // last ring cell -> staging
  return shift * k;
}

LatticeModel unilateral(double theta, std::int64_t horizon = 64) {
  return LatticeModel(2, emission_rotation(theta), Unilateral{}, horizon);
}

}  // namespace

TEST_SUITE("lattice") {
  TEST_CASE("constructor rejects bad inputs") {
    CHECK_THROWS_AS(LatticeModel(1, {1.0}, Unilateral{}, 4), InvalidArgument);
    CHECK_THROWS_AS(LatticeModel(2, {1.0, 1.0, 0.0, 1.0}, Unilateral{}, 4), InvalidArgument);
    CHECK_THROWS_AS(LatticeModel(2, emission_rotation(0.3), Ring{0}, 4), InvalidArgument);
    CHECK_THROWS_AS(LatticeModel(2, emission_rotation(0.3), Unilateral{}, 0), InvalidArgument);
    CHECK_THROWS_AS(LatticeModel(2, {1.0, 0.0, 0.0}, Unilateral{}, 4), InvalidArgument);
  }

  TEST_CASE("emission rotation is unitary with the expected entries") {
    const auto k = emission_rotation(0.4, 1.2);
    const cplx e = std::polar(1.0, 1.2);
    CHECK(std::abs(k[0] - std::cos(0.4)) < 1e-15);
    CHECK(std::abs(k[2] - std::sin(0.4) * e) < 1e-15);
    CHECK(std::abs(k[1] + std::sin(0.4) * std::conj(e)) < 1e-15);
  }

  TEST_CASE("unilateral survival decays as cos^2T") {
    const double theta = 0.3;
    const auto model = unilateral(theta);
    auto s = model.initial_state();
    for (int t = 1; t <= 40; ++t) {
      model.step_in_place(s);
      CHECK(measure::survival_probability(model, s) == doctest::Approx(std::pow(std::cos(theta), 2 * t)).epsilon(1e-13));
      CHECK(norm2(s) == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  TEST_CASE("ring evolution matches a dense matrix power") {
    const double theta = 0.3;
    for (std::size_t L : {1u, 2u, 4u, 7u}) {
      CAPTURE(L);
      const LatticeModel model(2, emission_rotation(theta), Ring{L}, 64);
      const Eigen::MatrixXcd u = dense_ring_step(theta, L);
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(2 + L));
      v(0) = 1.0;
      auto s = model.initial_state();
      for (int t = 1; t <= 30; ++t) {
        v = u * v;
        model.step_in_place(s);
        CHECK(std::abs(s.core[0] - v(0)) < 1e-13);
        CHECK(std::abs(s.core[1] - v(1)) < 1e-13);
        for (std::size_t j = 0; j < L; ++j) CHECK(std::abs(s.wave[j] - v(static_cast<Eigen::Index>(2 + j))) < 1e-13);
      }
    }
  }

  TEST_CASE("returning ring amplitude breaks the geometric decay") {
    const double theta = 0.3;
    const LatticeModel ring(2, emission_rotation(theta), Ring{4}, 64);
    auto s = ring.initial_state();
    ring.advance(s, 8);
    CHECK(std::abs(measure::survival_probability(ring, s) - std::pow(std::cos(theta), 16)) > 1e-3);
  }

  TEST_CASE("one-sidedness: exact for unilateral, violated for ring") {
    CHECK(verify_one_sided(unilateral(0.3), 12) <= 1e-12);
    CHECK(verify_one_sided(LatticeModel(2, emission_rotation(0.3), Ring{4}, 64), 4) > 1e-3);
    CHECK(verify_one_sided(LatticeModel(2, emission_rotation(0.3), Ring{1}, 64), 1) > 1e-3);
  }

  TEST_CASE("wave basis vectors never reach the core (dense check)") {
    const auto model = unilateral(0.7);
    for (std::size_t j = 0; j < 6; ++j) {
      auto s = model.zero_state(6);
      s.wave[j] = 1.0;
      model.advance(s, 20);
      CHECK(s.core[0] == cplx{});
      CHECK(s.core[1] == cplx{});
    }
  }

  TEST_CASE("product identity holds for unilateral and fails for ring") {
    const auto model = unilateral(0.3);
    for (std::int64_t n = 1; n <= 20; ++n) CHECK(product_identity_residual(model, n) <= 1e-12);
    CHECK(product_identity_residual(LatticeModel(2, emission_rotation(0.3), Ring{4}, 64), 8) > 1e-3);
  }

  TEST_CASE("lemma: states with equal core blocks keep equal core blocks") {
    const auto model = unilateral(0.45);
    LatticeState a = model.zero_state(5), b = model.zero_state(5);
    a.core = b.core = {cplx{0.5, 0.1}, cplx{-0.3, 0.2}};
    a.wave = {0.1, 0.2, 0.3, 0.0, 0.1};
    b.wave = {0.0, -0.4, 0.1, 0.2, 0.3};
    CHECK(core_divergence(model, a, b, 30) <= 1e-15);

    const LatticeModel ring(2, emission_rotation(0.45), Ring{5}, 64);
    a.wave = {0.1, 0.2, 0.3, 0.0, 0.1};
    CHECK(core_divergence(ring, a, b, 10) > 1e-3);
  }

  TEST_CASE("horizon is enforced") {
    const auto model = unilateral(0.3, 5);
    auto s = model.initial_state();
    model.advance(s, 5);
    CHECK_THROWS_AS(model.advance(s, 1), HorizonError);
    CHECK_THROWS_AS(model.advance(s, -1), InvalidArgument);
  }

  TEST_CASE("regions split wave cells and keep the core on the complement") {
    LatticeState s;
    s.core = {1.0, 2.0};
    s.wave = {3.0, 4.0, 5.0};
    auto in = s, out = s;
    const auto r = LatticeRegion::cells({0, 2});
    r.keep(in, true);
    r.keep(out, false);
    CHECK(in.core[0] == cplx{});
    CHECK(in.wave[0] == cplx{3.0});
    CHECK(in.wave[1] == cplx{});
    CHECK(out.core[1] == cplx{2.0});
    CHECK(out.wave[1] == cplx{4.0});
    CHECK(norm2(in) + norm2(out) == doctest::Approx(norm2(s)));
    CHECK(LatticeRegion::all_wave().is_wave_zone());
    CHECK_FALSE(r.is_wave_zone());
    CHECK_FALSE(LatticeRegion::all_wave().complement().is_wave_zone());
  }
}
