#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "zeno/detector.hpp"
#include "zeno/measurement.hpp"
#include "support/detector_reference.hpp"

using namespace zeno;
using namespace zeno::detector;

namespace {

atom_field::ModelParams atom_params(double dx, double t_max, double margin) {
  atom_field::ModelParams p;
  p.grid.dx = dx;
  p.grid.t_max = t_max;
  p.grid.margin = margin;
  return p;
}

DetectorParams det_params(double x_minus, double x_plus, std::int64_t n_k, double k_max, double lambda) {
  DetectorParams d;
  d.x_minus = x_minus;
  d.x_plus = x_plus;
  d.n_k = n_k;
  d.k_max = k_max;
  d.lambda_r = d.lambda_l = constant_coupling(lambda);
  return d;
}

}  // namespace

TEST_SUITE("detector") {
  TEST_CASE("parameter validation") {
    const auto p = atom_params(1.0 / 16, 1.0, 0.5);
    CHECK_THROWS_AS(DetectorModel(p, det_params(0.4, 1.0, 4, 2.0, 0.5)), InvalidArgument);
    CHECK_THROWS_AS(DetectorModel(p, det_params(1.0, 1.0, 4, 2.0, 0.5)), InvalidArgument);
    CHECK_THROWS_AS(DetectorModel(p, det_params(1.0, 1.5, 0, 2.0, 0.5)), InvalidArgument);
    CHECK_THROWS_AS(DetectorModel(p, det_params(1.01, 1.5, 4, 2.0, 0.5)), InvalidArgument);
    CHECK_THROWS_WITH_AS(DetectorModel(atom_params(1.0 / 16, 1.0, 0.0), det_params(1.0, 1.5, 4, 2.0, 0.5)),
                         doctest::Contains("margin"), InvalidArgument);
  }

  TEST_CASE("uncoupled detector reproduces the bare atom bit for bit") {
    const auto p = atom_params(1.0 / 32, 2.0, 0.5);
    const DetectorModel det(p, det_params(1.0, 1.5, 8, 4.0, 0.0));
    CHECK_FALSE(det.coupled());
    const atom_field::AtomFieldModel atom(p);
    auto a = atom.initial_state();
    auto s = det.initial_state();
    for (std::int64_t n = 0; n < atom.max_steps(); ++n) {
      atom.step_in_place(a);
      det.step_in_place(s);
      REQUIRE(s.atom.C == a.C);
    }
    CHECK(s.atom.F == a.F);
  }

  TEST_CASE("survival is independent of the detector coupling") {
    const auto p = atom_params(1.0 / 32, 3.0, 0.5);
    const DetectorModel bare(p, det_params(1.0, 1.5, 8, 4.0, 0.0));
    const DetectorModel strong(p, det_params(1.0, 1.5, 8, 4.0, 2.0));
    auto a = bare.initial_state(), b = strong.initial_state();
    double drift = 0.0;
    for (std::int64_t n = 0; n < bare.atom().max_steps(); ++n) {
      const double before = norm2(b);
      bare.step_in_place(a);
      strong.step_in_place(b);
      drift = std::max(drift, std::abs(norm2(b) - before));
      REQUIRE(std::abs(std::norm(a.atom.C) - std::norm(b.atom.C)) <= 1e-12);
    }
    CHECK(drift <= 1e-11);
    const auto na = bare.sector_norms(a), nb = strong.sector_norms(b);
    CHECK(na.g == 0.0);
    CHECK(na.d == 0.0);
    CHECK(nb.g > 1e-4);
    CHECK(nb.total() == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("tiny grid agrees with a dense matrix exponential") {
    const auto p = atom_params(0.25, 1.0, 0.5);
    const auto dp = det_params(0.75, 1.25, 4, 2.0, 0.8);
    const DetectorModel model(p, dp);
    const auto& atom = model.atom();
    const auto ref = zeno::testing::DenseDetectorReference::from(model, p, dp, 0.8);
    CHECK(ref.dim <= 400);
    CHECK(model.block_size() == 2 * ref.n_det + ref.nk);
    const Eigen::MatrixXcd u = ref.step();

    auto s = model.initial_state();
    Eigen::VectorXcd v = ref.flatten(model, s);
    for (std::int64_t n = 0; n < atom.max_steps(); ++n) {
      model.step_in_place(s);
      v = u * v;
      CHECK((ref.flatten(model, s) - v).cwiseAbs().maxCoeff() <= 1e-8);
    }
    CHECK(model.sector_norms(s).g > 0.0);
  }

  TEST_CASE("detector excitations never reach the atom") {
    const auto p = atom_params(1.0 / 16, 2.0, 0.5);
    const DetectorModel model(p, det_params(1.0, 1.5, 4, 2.0, 1.0));
    auto s = model.embed(model.atom().two_particle_state(1.1, 0.2));
    s.atom.C = 0.0;
    s.D[3] = 0.5;
    model.advance(s, 16);
    CHECK(s.atom.C == cplx{});
    CHECK(model.atom().interior_norm2(s.atom) == 0.0);
    CHECK(model.sector_norms(s).g > 0.0);
  }

  TEST_CASE("lambda sweep keeps survival fixed while the detector field changes") {
    const auto p = atom_params(1.0 / 32, 2.0, 0.5);
    const auto sweep = lambda_sweep(p, det_params(1.0, 1.5, 8, 4.0, 0.0), {0.5, 2.0}, 2.0, 4, 2);
    REQUIRE(sweep.traces.size() == 2);
    CHECK(sweep.traces[0].lambda == 0.5);
    CHECK(sweep.max_deviation <= 1e-12);
    CHECK(std::abs(sweep.traces[0].norms.back().g - sweep.traces[1].norms.back().g) > 1e-4);
    CHECK(sweep.traces[0].t.back() == doctest::Approx(2.0));
    CHECK_THROWS_AS(lambda_sweep(p, det_params(1.0, 1.5, 8, 4.0, 0.0), {1.0}, 2.5, 1, 1), HorizonError);
  }
}
