// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/detector_reference.hpp"
#include "zeno/atom_field.hpp"
#include "zeno/detector.hpp"
#include "zeno/experiment.hpp"
#include "zeno/lattice.hpp"
#include "zeno/measurement.hpp"
#include "zeno/survival.hpp"

using namespace zeno;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

atom_field::ModelParams atom_params(double dx, double t_max, double margin = 0.0) {
  atom_field::ModelParams p;
  p.d = 1.0;
  p.omega = 5.0;
  p.g0 = 0.5;
  p.grid.dx = dx;
  p.grid.t_max = t_max;
  p.grid.margin = margin;
  return p;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Midpoint quadrature of |g|^2 over a square that contains the box.
double perturbative_alpha(const atom_field::ModelParams& p) {
  const int q = 1000;
  const double h = 2.0 * p.d / q;
  double acc = 0.0;
  for (int i = 0; i < q; ++i) {
    const double x = -p.d + (i + 0.5) * h;
    for (int j = 0; j < q; ++j) {
      const double y = -p.d + (j + 0.5) * h;
      const double g = (std::abs(x) < 0.5 * p.d && std::abs(y) < 0.5 * p.d) ? p.g0 : 0.0;
      acc += g * g * h * h;
    }
  }
  return acc;
}

double fitted_alpha = 0.0;

Outcome theorem() {
  const atom_field::AtomFieldModel m(atom_params(1.0 / 64, 3.0));
  const auto region = atom_field::AtomFieldRegion::wave_zone(m);
  const std::int64_t total = steps_for(3.0, m.dt(), "t");
  std::mt19937_64 gen(2024);
  double worst = 0.0;
  int count = 0;
  for (std::int64_t n : {1, 4, 16, 64}) {
    std::vector<std::int64_t> equal, scattered;
    for (std::int64_t k = 1; k <= n; ++k) equal.push_back(k * total / n);
    std::vector<std::int64_t> pool(static_cast<std::size_t>(total - 1));
    std::iota(pool.begin(), pool.end(), 1);
    std::shuffle(pool.begin(), pool.end(), gen);
    scattered.assign(pool.begin(), pool.begin() + n);
    std::sort(scattered.begin(), scattered.end());
    for (const auto& steps : {equal, scattered}) {
      const measure::MeasurementSchedule<atom_field::AtomFieldRegion> sched{steps, total, region};
      worst = std::max(worst, measure::theorem_residual(m, sched));
      ++count;
    }
  }
  return {worst <= 1e-10, fmt("%.0f schedules, max |s_N - s| = %.3g (tol 1e-10)", count, worst)};
}

Outcome lattice_oracles() {
  const auto rot = lattice::emission_rotation(0.3);
  const lattice::LatticeModel uni(2, rot, lattice::Unilateral{}, 64);
  const lattice::LatticeModel ring(2, rot, lattice::Ring{4}, 64);
  double det_gap = 0.0, worst_z = 0.0, ring_gap = 0.0;
  for (std::int64_t n = 1; n <= 10; ++n) {
    measure::MeasurementSchedule<lattice::LatticeRegion> sched{{}, n + 5, lattice::LatticeRegion::all_wave()};
    for (std::int64_t k = 1; k <= n; ++k) sched.steps.push_back(k);
    const double tree = measure::run_branch_tree(uni, sched).s_n;
    const double noclick = measure::run_noclick_branch(uni, sched).s_n;
    const auto mc = measure::run_monte_carlo(uni, sched, 100000, 1000 + static_cast<std::uint64_t>(n), 1);
    det_gap = std::max(det_gap, std::abs(tree - noclick));
    for (double ref : {tree, noclick}) {
      const double z = std::abs(mc.estimate - ref) / std::max(mc.standard_error, 1e-300);
      worst_z = std::max(worst_z, z);
    }
    ring_gap = std::max(ring_gap, std::abs(measure::run_branch_tree(ring, sched).s_n -
                                           measure::unmeasured_survival(ring, sched.final_step)));
  }
  const bool ok = det_gap <= 1e-12 && worst_z <= 3.0 && ring_gap > 0.01;
  return {ok, fmt("tree vs no-click %.3g (tol 1e-12), MC max z %.2f (tol 3), ring max |s_N - s| %.3g (> 0.01)", det_gap,
                  worst_z, ring_gap)};
}

Outcome one_sided_product() {
  const auto rot = lattice::emission_rotation(0.3);
  const lattice::LatticeModel uni(2, rot, lattice::Unilateral{}, 64);
  const lattice::LatticeModel ring(2, rot, lattice::Ring{4}, 64);
  const double u = lattice::verify_one_sided(uni, 16);
  const double r = lattice::verify_one_sided(ring, 4);
  double product = 0.0;
  for (std::int64_t n = 1; n <= 20; ++n) product = std::max(product, lattice::product_identity_residual(uni, n));
  const bool ok = u <= 1e-12 && r > 1e-3 && product <= 1e-12;
  return {ok, fmt("one-sided unilateral %.3g (tol 1e-12), ring %.3g (> 1e-3), product identity n<=20 %.3g (tol 1e-12)",
                  u, r, product)};
}

Outcome short_time_law() {
  const auto p = atom_params(1.0 / 256, 0.5);
  const atom_field::AtomFieldModel m(p);
  const auto curve = compute_survival_curve(m, 0.5, 1);
  const auto fit = fit_short_time_alpha(curve, 4);
  fitted_alpha = fit.alpha;
  const double target = perturbative_alpha(p);
  const double rel = std::abs(fit.alpha - target) / target;
  return {rel <= 0.01 && fit.quadratic_regime,
          fmt("alpha = %.6f vs perturbative %.6f, rel err %.3g (tol 0.01)", fit.alpha, target, rel)};
}

Outcome zeno_limit() {
  const atom_field::AtomFieldModel m(atom_params(1.0 / 160, 1.0));
  ZenoScanOptions opts;
  opts.threads = 1;
  const auto scan = zeno_scan(m, 1.0, {0.2, 0.1, 0.05, 0.025}, atom_field::AtomFieldRegion::whole(m), opts);
  double worst_ratio = 0.0;
  bool monotone = true;
  for (std::size_t k = 1; k < scan.rows.size(); ++k) {
    const double ratio = scan.rows[k - 1].neg_log_s_n / scan.rows[k].neg_log_s_n;
    worst_ratio = std::max(worst_ratio, std::abs(ratio / 2.0 - 1.0));
    if (!(scan.rows[k].s_n > scan.rows[k - 1].s_n)) monotone = false;
  }
  const double target = fitted_alpha * 1.0;
  const double rel = std::abs(scan.slope - target) / target;
  const bool ok = worst_ratio <= 0.15 && rel <= 0.2 && monotone;
  return {ok, fmt("halving ratio max dev %.3f (tol 0.15), slope %.4f vs alpha t %.4f rel %.3f (tol 0.2), ", worst_ratio,
                  scan.slope, target, rel) +
                  (monotone ? "s_N monotone toward 1" : "s_N NOT monotone")};
}

Outcome unitarity() {
  const atom_field::AtomFieldModel m(atom_params(1.0 / 64, 3.0));
  auto s = m.initial_state();
  double drift = 0.0, closure = 0.0, loss = 0.0;
  double prev = atom_field::norm2(s);
  for (std::int64_t n = 0; n < m.max_steps(); ++n) {
    m.step_in_place(s);
    const double now = atom_field::norm2(s);
    drift = std::max(drift, std::abs(now - prev));
    prev = now;
    double f2 = 0.0;
    for (const cplx& a : s.F) f2 += std::norm(a);
    closure = std::max(closure, std::abs(std::norm(s.C) + f2 - 1.0));
    loss = std::max(loss, std::abs(std::norm(s.C) - (1.0 - f2)));
  }
  const bool ok = drift <= 1e-12 && closure <= 1e-12 && loss <= 1e-12;
  return {ok, fmt("per-step drift %.3g, |C|^2+|F|^2-1 %.3g, s-(1-|F|^2) %.3g (tol 1e-12)", drift, closure, loss)};
}

Outcome detector_invariance() {
  const auto p = atom_params(1.0 / 64, 3.0, 0.5);
  detector::DetectorParams family;
  const auto sweep = detector::lambda_sweep(p, family, {0.0, 0.5, 2.0}, 3.0, 1, 1);
  double g_lo = INFINITY, g_hi = -INFINITY, drift = 0.0;
  for (const auto& tr : sweep.traces) {
    g_lo = std::min(g_lo, tr.norms.back().g);
    g_hi = std::max(g_hi, tr.norms.back().g);
    drift = std::max(drift, tr.max_norm_drift_per_step);
  }

  const auto tiny = atom_params(0.25, 1.0, 0.5);
  detector::DetectorParams dp;
  dp.x_minus = 0.75;
  dp.x_plus = 1.25;
  dp.n_k = 4;
  dp.k_max = 2.0;
  dp.lambda_r = dp.lambda_l = detector::constant_coupling(0.8);
  const detector::DetectorModel model(tiny, dp);
  const auto ref = testing::DenseDetectorReference::from(model, tiny, dp, 0.8);
  const Eigen::MatrixXcd u = ref.step();
  auto s = model.initial_state();
  Eigen::VectorXcd v = ref.flatten(model, s);
  double dense = 0.0;
  for (std::int64_t n = 0; n < model.atom().max_steps(); ++n) {
    model.step_in_place(s);
    v = u * v;
    dense = std::max(dense, (ref.flatten(model, s) - v).cwiseAbs().maxCoeff());
  }
  const bool ok = sweep.max_deviation <= 1e-12 && g_hi - g_lo > 1e-4 && drift <= 1e-11 && dense <= 1e-8;
  return {ok, fmt("max |s_l - s_0| %.3g (tol 1e-12), |G|^2 spread %.3g (> 1e-4), drift/step %.3g (tol 1e-11), ",
                  sweep.max_deviation, g_hi - g_lo, drift) +
                  fmt("dense oracle %.3g (tol 1e-8)", dense)};
}

Outcome convergence() {
  std::vector<double> s;
  for (double dx : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const atom_field::AtomFieldModel m(atom_params(dx, 2.0));
    s.push_back(std::norm(atom_field::evolve_to(m, m.initial_state(), 2.0).C));
  }
  const double e1 = std::abs(s[0] - s[1]), e2 = std::abs(s[1] - s[2]);
  const double order = std::log2(e1 / e2);
  const double extrapolated = s[2] + (s[2] - s[1]) / (std::pow(2.0, order) - 1.0);
  return {order >= 1.0, fmt("s(2) = %.10f, %.10f, %.10f; observed order %.3f (>= 1), ", s[0], s[1], s[2], order) +
                            fmt("extrapolated %.10f", extrapolated)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  using nlohmann::ordered_json;
  const std::vector<std::pair<app::ExperimentKind, ordered_json>> runs{
      {app::ExperimentKind::survival, ordered_json::parse(R"({"numerics": {"dx": 0.03125, "t_max": 2.0}})")},
      {app::ExperimentKind::theorem_check,
       ordered_json::parse(R"({"numerics": {"dx": 0.03125, "t_max": 2.0}, "theorem": {"t_final": 2.0, "n_list": [1, 4, 16]}})")},
      {app::ExperimentKind::zeno_scan,
       ordered_json::parse(R"({"numerics": {"dx": 0.025, "t_max": 1.0}, "mc": {"n_traj": 5000, "seed": 9}})")},
      {app::ExperimentKind::lattice_verify, ordered_json::parse(R"({"mc": {"n_traj": 20000, "seed": 5}})")},
      {app::ExperimentKind::detector_sweep,
       ordered_json::parse(R"({"numerics": {"dx": 0.03125, "t_max": 2.0, "margin": 0.5}, "detector": {"stride": 1}})")},
  };
  const fs::path root = fs::temp_directory_path() / "zeno_acceptance";
  int identical = 0;
  for (const auto& [kind, doc] : runs) {
    auto cfg = app::parse_config(doc, kind);
    cfg.output_dir = root / (app::kind_name(kind) + "_serial");
    const auto serial = app::run_experiment(cfg, 1);
    cfg.output_dir = root / (app::kind_name(kind) + "_parallel");
    app::run_experiment(cfg, 4);
    bool same = true;
    for (const auto& f : serial.files)
      same = same && slurp(root / (app::kind_name(kind) + "_serial") / f) == slurp(cfg.output_dir / f);
    identical += same ? 1 : 0;
  }
  return {identical == static_cast<int>(runs.size()),
          fmt("%.0f of %.0f experiments byte-identical, 1 vs 4 threads", identical, static_cast<double>(runs.size()))};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, theorem},     {2, lattice_oracles},     {3, one_sided_product}, {5, short_time_law}, {4, zeno_limit},
      {6, unitarity},   {7, detector_invariance}, {8, convergence},       {9, reproducibility},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = fn();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++failures;
    lines.emplace_back(id, fmt("criterion %.0f: ", id) + (out.pass ? "PASS" : "FAIL") + "  " + out.detail +
                               fmt("  [%.1f s]", secs));
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  return failures == 0 ? 0 : 1;
}
