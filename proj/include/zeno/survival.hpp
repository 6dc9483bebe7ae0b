#pragma once
// Survival curves and the fits built on them: the short-time quadratic law,
// the exponential decay rate, and the measurement-interval (Zeno) scan.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "zeno/measurement.hpp"

namespace zeno {

struct SurvivalSample {
  double t = 0.0;
  double s = 0.0;
};

struct SurvivalCurve {
  std::vector<SurvivalSample> samples;
  double max_norm_drift = 0.0;  // max |norm - 1| over the sampled states
};

struct ShortTimeFit {
  double alpha = 0.0;
  double residual = 0.0;  // RMS relative deviation of 1 - s from alpha t^2
  std::size_t samples = 0;
  bool quadratic_regime = true;  // residual below the regime threshold
};

struct DecayFit {
  double gamma = 0.0;      // s ~ A exp(-gamma t)
  double log_prefactor = 0.0;
  double residual = 0.0;   // RMS of the log-linear fit
  std::size_t samples = 0;
};

struct ZenoRow {
  double dt = 0.0;
  std::int64_t n = 0;
  double s_n = 0.0;
  double neg_log_s_n = 0.0;
  double noclick_s_n = 0.0;
  std::string method;  // "branch_tree", or "noclick+mc" when the tree was capped
  double mc_estimate = 0.0;
  double mc_standard_error = 0.0;
};

struct ZenoScan {
  std::vector<ZenoRow> rows;
  double slope = 0.0;           // least squares of -log s_N = slope * dt, through the origin
  double slope_residual = 0.0;  // RMS relative deviation from the fitted line
};

// Relative-residual threshold above which a short-time window is flagged.
inline constexpr double kQuadraticRegimeTolerance = 0.05;

// Fits 1 - s = alpha t^2 to the first `window` samples with t > 0, weighting
// each point by 1/t^4 (equal relative weight per sample), so
// alpha = mean((1 - s)/t^2).
ShortTimeFit fit_short_time_alpha(const SurvivalCurve& curve, std::size_t window);

// Least-squares line through log s over samples with t in [t_begin, t_end].
DecayFit fit_decay_rate(const SurvivalCurve& curve, double t_begin, double t_end);

// Slope of -log s_N against dt through the origin.
void fit_zeno_slope(ZenoScan& scan);

template <measure::Backend M>
SurvivalCurve compute_survival_curve(const M& model, double t_max, std::int64_t stride) {
  if (stride < 1) throw InvalidArgument("sample stride must be >= 1");
  const double dt = model.step_length();
  const std::int64_t total = steps_for(t_max, dt, "t_max");
  if (total > model.horizon_steps()) throw HorizonError("survival curve t_max exceeds the model horizon");
  SurvivalCurve curve;
  auto state = model.initial_state();
  curve.samples.push_back({0.0, measure::survival_probability(model, state)});
  for (std::int64_t k = 1; k <= total; ++k) {
    model.advance(state, 1);
    if (k % stride == 0 || k == total) {
      curve.samples.push_back({static_cast<double>(k) * dt, measure::survival_probability(model, state)});
      curve.max_norm_drift = std::max(curve.max_norm_drift, std::abs(norm2(state) - 1.0));
    }
  }
  return curve;
}

struct ZenoScanOptions {
  measure::BranchTreeOptions tree{};
  std::size_t mc_trajectories = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;  // over dt values
};

// Equal-spacing schedules (measurements at k*dt up to t_fixed, final check at
// t_fixed) for every dt in dt_list.
template <measure::Backend M>
ZenoScan zeno_scan(const M& model, double t_fixed, const std::vector<double>& dt_list,
                   const typename M::Region& region, const ZenoScanOptions& opts = {}) {
  ZenoScan scan;
  for (double dt : dt_list) (void)measure::equal_spacing(model, dt, t_fixed, region);  // validate up front
  scan.rows = parallel_map<ZenoRow>(dt_list.size(), opts.threads, [&](std::size_t idx) {
    const auto sched = measure::equal_spacing(model, dt_list[idx], t_fixed, region);
    ZenoRow row;
    row.dt = dt_list[idx];
    row.n = static_cast<std::int64_t>(sched.size());
    row.noclick_s_n = measure::run_noclick_branch(model, sched).s_n;
    try {
      row.s_n = measure::run_branch_tree(model, sched, opts.tree).s_n;
      row.method = "branch_tree";
    } catch (const InvalidArgument&) {
      const auto mc = measure::run_monte_carlo(model, sched, opts.mc_trajectories, opts.seed);
      row.s_n = row.noclick_s_n;
      row.method = "noclick+mc";
      row.mc_estimate = mc.estimate;
      row.mc_standard_error = mc.standard_error;
    }
    row.neg_log_s_n = row.s_n > 0.0 ? -std::log(row.s_n) : INFINITY;
    return row;
  });
  fit_zeno_slope(scan);
  return scan;
}

}  // namespace zeno
