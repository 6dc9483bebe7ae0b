#include "zeno/survival.hpp"

#include <cmath>

namespace zeno {

ShortTimeFit fit_short_time_alpha(const SurvivalCurve& curve, std::size_t window) {
  ShortTimeFit fit;
  std::vector<double> ratios;
  for (const SurvivalSample& p : curve.samples) {
    if (p.t <= 0.0) continue;
    if (ratios.size() == window) break;
    ratios.push_back((1.0 - p.s) / (p.t * p.t));
  }
  if (ratios.size() < 4 || ratios.size() < window) {
    throw InvalidArgument("short-time fit needs at least 4 samples with t > 0 in the window");
  }
  double sum = 0.0;
  for (double r : ratios) sum += r;
  fit.alpha = sum / static_cast<double>(ratios.size());
  fit.samples = ratios.size();
  if (fit.alpha != 0.0) {
    double ss = 0.0;
    for (double r : ratios) ss += (r / fit.alpha - 1.0) * (r / fit.alpha - 1.0);
    fit.residual = std::sqrt(ss / static_cast<double>(ratios.size()));
  }
  fit.quadratic_regime = fit.residual <= kQuadraticRegimeTolerance;
  return fit;
}

DecayFit fit_decay_rate(const SurvivalCurve& curve, double t_begin, double t_end) {
  std::vector<double> ts, ys;
  for (const SurvivalSample& p : curve.samples) {
    if (p.t < t_begin || p.t > t_end || !(p.s > 0.0)) continue;
    ts.push_back(p.t);
    ys.push_back(std::log(p.s));
  }
  if (ts.size() < 2) throw InvalidArgument("decay fit window holds fewer than 2 samples");
  const double n = static_cast<double>(ts.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    my += ys[i];
  }
  mt /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxy += (ts[i] - mt) * (ys[i] - my);
    sxx += (ts[i] - mt) * (ts[i] - mt);
  }
  DecayFit fit;
  fit.samples = ts.size();
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.gamma = -slope;
  fit.log_prefactor = my - slope * mt;
  double ss = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double r = ys[i] - (fit.log_prefactor + slope * ts[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

void fit_zeno_slope(ZenoScan& scan) {
  double sxy = 0.0, sxx = 0.0;
  for (const ZenoRow& r : scan.rows) {
    if (!std::isfinite(r.neg_log_s_n)) continue;
    sxy += r.dt * r.neg_log_s_n;
    sxx += r.dt * r.dt;
  }
  scan.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  double ss = 0.0;
  std::size_t used = 0;
  for (const ZenoRow& r : scan.rows) {
    if (!std::isfinite(r.neg_log_s_n) || r.neg_log_s_n == 0.0) continue;
    const double rel = scan.slope * r.dt / r.neg_log_s_n - 1.0;
    ss += rel * rel;
    ++used;
  }
  scan.slope_residual = used > 0 ? std::sqrt(ss / static_cast<double>(used)) : 0.0;
}

}  // namespace zeno
