#include "zeno/atom_field.hpp"

#include <algorithm>
#include <cmath>

#include "zeno/simd/kernels.hpp"

namespace zeno::atom_field {

namespace {

std::span<cplx> row_span(std::vector<cplx>& f, std::int64_t cols, std::int64_t i, std::int64_t j0, std::int64_t j1) {
  return {f.data() + i * cols + j0, static_cast<std::size_t>(j1 - j0)};
}
std::span<const cplx> row_span(const std::vector<cplx>& f, std::int64_t cols, std::int64_t i, std::int64_t j0,
                               std::int64_t j1) {
  return {f.data() + i * cols + j0, static_cast<std::size_t>(j1 - j0)};
}

}  // namespace

double norm2(const AtomFieldState& s) {
  return std::norm(s.C) + simd::norm2(s.F);
}

void scale(AtomFieldState& s, double factor) {
  s.C *= factor;
  simd::scale(factor, s.F);
}

// ---------------------------------------------------------------------------
// Regions

AtomFieldRegion::AtomFieldRegion(Kind kind, std::string name, std::vector<std::vector<Run>> inside_runs,
                                 std::int64_t cols)
    : kind_(kind), name_(std::move(name)), cols_(cols) {
  std::vector<std::vector<Run>> outside(inside_runs.size());
  for (std::size_t i = 0; i < inside_runs.size(); ++i) {
    std::int64_t cursor = 0;
    for (const Run& r : inside_runs[i]) {
      if (r.first > cursor) outside[i].push_back({cursor, r.first});
      cursor = r.second;
    }
    if (cursor < cols) outside[i].push_back({cursor, cols});
  }
  runs_ = std::make_shared<const std::array<std::vector<std::vector<Run>>, 2>>(
      std::array<std::vector<std::vector<Run>>, 2>{std::move(inside_runs), std::move(outside)});
}

AtomFieldRegion AtomFieldRegion::custom(const AtomFieldModel& model, const std::function<bool(double, double)>& pred,
                                        std::string name) {
  std::vector<std::vector<Run>> runs(static_cast<std::size_t>(model.rows()));
  for (std::int64_t i = 0; i < model.rows(); ++i) {
    std::int64_t j = 0;
    while (j < model.cols()) {
      while (j < model.cols() && !pred(model.x_r(i), model.x_l(j))) ++j;
      const std::int64_t start = j;
      while (j < model.cols() && pred(model.x_r(i), model.x_l(j))) ++j;
      if (j > start) runs[static_cast<std::size_t>(i)].push_back({start, j});
    }
  }
  return AtomFieldRegion(Kind::custom, std::move(name), std::move(runs), model.cols());
}

AtomFieldRegion AtomFieldRegion::wave_zone(const AtomFieldModel& model) {
  const double half = 0.5 * model.params().d;
  AtomFieldRegion r = custom(model, [half](double xr, double xl) { return xr > half || xl < -half; }, "wave");
  r.kind_ = Kind::wave_zone;
  return r;
}

AtomFieldRegion AtomFieldRegion::whole(const AtomFieldModel& model) {
  AtomFieldRegion r = custom(model, [](double, double) { return true; }, "whole");
  r.kind_ = Kind::whole;
  return r;
}

AtomFieldRegion AtomFieldRegion::interior(const AtomFieldModel& model) {
  const double half = 0.5 * model.params().d;
  AtomFieldRegion r = custom(
      model, [half](double xr, double xl) { return xr > -half && xr < half && xl > -half && xl < half; }, "interior");
  r.kind_ = Kind::interior;
  return r;
}

AtomFieldRegion AtomFieldRegion::complement() const {
  AtomFieldRegion r = *this;
  r.complement_ = !complement_;
  r.name_ = complement_ ? name_.substr(1) : "~" + name_;
  return r;
}

bool AtomFieldRegion::contains(std::int64_t i, std::int64_t j) const {
  const auto& rows = (*runs_)[complement_ ? 1 : 0];
  if (i < 0 || i >= static_cast<std::int64_t>(rows.size())) return false;
  for (const Run& r : rows[static_cast<std::size_t>(i)])
    if (j >= r.first && j < r.second) return true;
  return false;
}

void AtomFieldRegion::keep(AtomFieldState& s, bool inside) const {
  if (inside) s.C = cplx{};
  // Zero the runs that are not kept.
  const auto& drop = (*runs_)[(inside != complement_) ? 1 : 0];
  const std::int64_t rows = std::min<std::int64_t>(s.rows_used, static_cast<std::int64_t>(drop.size()));
  for (std::int64_t i = 0; i < rows; ++i) {
    for (const Run& r : drop[static_cast<std::size_t>(i)]) {
      const std::int64_t j1 = std::min(r.second, s.cols_used);
      if (r.first < j1) {
        auto span = row_span(s.F, cols_, i, r.first, j1);
        std::fill(span.begin(), span.end(), cplx{});
      }
    }
  }
}

double AtomFieldRegion::measured_norm2(const AtomFieldState& s) const {
  const auto& in = (*runs_)[complement_ ? 1 : 0];
  const std::int64_t rows = std::min<std::int64_t>(s.rows_used, static_cast<std::int64_t>(in.size()));
  double acc = 0.0;
  for (std::int64_t i = 0; i < rows; ++i) {
    for (const Run& r : in[static_cast<std::size_t>(i)]) {
      const std::int64_t j1 = std::min(r.second, s.cols_used);
      if (r.first < j1) acc += simd::norm2(row_span(s.F, cols_, i, r.first, j1));
    }
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Model

AtomFieldModel::AtomFieldModel(const ModelParams& params) : params_(params) {
  const GridParams& g = params_.grid;
  if (!(params_.d > 0.0)) throw InvalidArgument("box size d must be positive");
  if (!(g.dx > 0.0)) throw InvalidArgument("dx must be positive");
  if (!(g.t_max >= 0.0)) throw InvalidArgument("t_max must be non-negative");
  if (!std::isfinite(params_.omega) || !std::isfinite(params_.g0)) throw InvalidArgument("omega and g0 must be finite");
  const double ratio = params_.d / g.dx;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * ratio || static_cast<std::int64_t>(rounded) % 2 != 0) {
    throw InvalidArgument("d/dx must be an even integer (got " + std::to_string(ratio) + ")");
  }
  n_in_ = static_cast<std::int64_t>(rounded);
  max_steps_ = static_cast<std::int64_t>(std::floor(g.t_max / g.dx + 1e-9));
  if (g.margin < 0.0) throw InvalidArgument("grid too small for t_max: negative margin");
  const std::int64_t margin_cells = static_cast<std::int64_t>(std::ceil(g.margin / g.dx - 1e-9));
  const std::int64_t needed = n_in_ + max_steps_;
  rows_ = g.cells_r > 0 ? g.cells_r : needed + margin_cells;
  cols_ = g.cells_l > 0 ? g.cells_l : needed + margin_cells;
  if (rows_ < needed || cols_ < needed) {
    throw InvalidArgument("grid too small for t_max: need at least " + std::to_string(needed) +
                          " cells per axis to contain the causal cone");
  }

  kappa_ = std::abs(params_.g0) * params_.d;
  const double dt = g.dx;
  const double w = params_.omega;
  const cplx i{0.0, 1.0};
  if (params_.g0 == 0.0) {
    u2_ = {std::polar(1.0, -w * dt), cplx{}, cplx{}, cplx{1.0}};
    rot00_ = 1.0;
    rot01_ = 0.0;
  } else {
    // H = [[w, k], [k, 0]] = w/2 + Omega n.sigma
    const double omega_r = std::sqrt(0.25 * w * w + kappa_ * kappa_);
    const double c = std::cos(omega_r * dt);
    const double sn = std::sin(omega_r * dt) / omega_r;
    const cplx phase = std::polar(1.0, -0.5 * w * dt);
    // Coupling sign follows g0 (the collective mode is normalized positively).
    const double k = params_.g0 * params_.d;
    u2_ = {phase * (c - i * (0.5 * w) * sn), phase * (-i * k * sn), phase * (-i * k * sn),
           phase * (c + i * (0.5 * w) * sn)};
    // The same step acting on the rotating-frame atom amplitude.
    const cplx back = std::conj(phase);
    rot00_ = back * (c - i * (0.5 * w) * sn);
    rot01_ = back * (-i * k * sn);
  }
}

AtomFieldState AtomFieldModel::initial_state() const {
  AtomFieldState s;
  s.C = 1.0;
  s.F.assign(static_cast<std::size_t>(rows_ * cols_), cplx{});
  return s;
}

AtomFieldState AtomFieldModel::two_particle_state(double x_r, double x_l) const {
  const double half = 0.5 * params_.d;
  const double tol = 1e-9 * dx();
  if (x_r < -half - tol || x_l > half + tol) {
    throw InvalidArgument("two-particle state outside the closed sector (need x_R >= -d/2, x_L <= d/2)");
  }
  const auto i = static_cast<std::int64_t>(std::floor((x_r + half) / dx() + 1e-9));
  const auto j = static_cast<std::int64_t>(std::floor((half - x_l) / dx() + 1e-9));
  if (i < 0 || j < 0 || i >= rows_ || j >= cols_) throw InvalidArgument("two-particle coordinates are off the grid");
  AtomFieldState s;
  s.F.assign(static_cast<std::size_t>(rows_ * cols_), cplx{});
  s.F[index(i, j)] = 1.0;  // F = 1/dx on one cell
  s.rows_used = i + 1;
  s.cols_used = j + 1;
  return s;
}

void AtomFieldModel::advect(AtomFieldState& s) const {
  if (s.rows_used == 0 || s.cols_used == 0) return;
  if (s.rows_used >= rows_) {
    for (const cplx& v : row_span(s.F, cols_, rows_ - 1, 0, s.cols_used))
      if (v != cplx{}) throw HorizonError("field amplitude reached the outer x_R boundary");
  }
  if (s.cols_used >= cols_) {
    for (std::int64_t i = 0; i < s.rows_used; ++i)
      if (s.F[index(i, cols_ - 1)] != cplx{}) throw HorizonError("field amplitude reached the outer x_L boundary");
  }
  const std::int64_t new_rows = std::min(s.rows_used + 1, rows_);
  const std::int64_t new_cols = std::min(s.cols_used + 1, cols_);
  for (std::int64_t i = new_rows - 1; i >= 1; --i) {
    cplx* dst = s.F.data() + i * cols_;
    const cplx* src = s.F.data() + (i - 1) * cols_;
    std::copy(src, src + (new_cols - 1), dst + 1);
    dst[0] = cplx{};
  }
  std::fill(s.F.begin(), s.F.begin() + new_cols, cplx{});
  s.rows_used = new_rows;
  s.cols_used = new_cols;
}

cplx AtomFieldModel::collective_amplitude(const AtomFieldState& s) const {
  const std::int64_t rows = std::min(s.rows_used, n_in_);
  const std::int64_t cols = std::min(s.cols_used, n_in_);
  double re = 0.0, im = 0.0;
  for (std::int64_t i = 0; i < rows; ++i) {
    const cplx part = simd::sum(row_span(s.F, cols_, i, 0, cols));
    re += part.real();
    im += part.imag();
  }
  return cplx{re, im} / static_cast<double>(n_in_);
}

void AtomFieldModel::interact(AtomFieldState& s) const {
  if (params_.g0 == 0.0) return;
  const cplx frame = std::polar(1.0, params_.omega * static_cast<double>(s.step) * dt());
  const cplx beta = collective_amplitude(s);
  const cplx beta_new = u2_[2] * std::conj(frame) * s.C + u2_[3] * beta;
  s.C = rot00_ * s.C + frame * rot01_ * beta;
  const cplx delta = (beta_new - beta) / static_cast<double>(n_in_);
  if (delta == cplx{}) return;
  s.rows_used = std::max(s.rows_used, n_in_);
  s.cols_used = std::max(s.cols_used, n_in_);
  for (std::int64_t i = 0; i < n_in_; ++i) simd::add_constant(delta, row_span(s.F, cols_, i, 0, n_in_));
}

void AtomFieldModel::step_in_place(AtomFieldState& s) const {
  if (s.step + 1 > max_steps_) {
    throw HorizonError("step " + std::to_string(s.step + 1) + " exceeds the horizon of " + std::to_string(max_steps_) +
                       " steps (t_max = " + std::to_string(params_.grid.t_max) + ")");
  }
  advect(s);
  interact(s);
  ++s.step;
}

void AtomFieldModel::advance(AtomFieldState& s, std::int64_t n) const {
  if (n < 0) throw InvalidArgument("cannot advance a state backwards in time");
  if (s.step + n > max_steps_) {
    throw HorizonError("run to step " + std::to_string(s.step + n) + " exceeds the horizon of " +
                       std::to_string(max_steps_) + " steps");
  }
  for (std::int64_t k = 0; k < n; ++k) step_in_place(s);
}

bool AtomFieldModel::is_initial_only(const AtomFieldState& s) const {
  for (std::int64_t i = 0; i < s.rows_used; ++i)
    for (const cplx& v : row_span(s.F, cols_, i, 0, s.cols_used))
      if (v != cplx{}) return false;
  return true;
}

double AtomFieldModel::interior_norm2(const AtomFieldState& s) const {
  const std::int64_t rows = std::min(s.rows_used, n_in_);
  const std::int64_t cols = std::min(s.cols_used, n_in_);
  double acc = 0.0;
  for (std::int64_t i = 0; i < rows; ++i) acc += simd::norm2(row_span(s.F, cols_, i, 0, cols));
  return acc;
}

double AtomFieldModel::exterior_norm2(const AtomFieldState& s) const {
  double acc = 0.0;
  for (std::int64_t i = 0; i < s.rows_used; ++i) {
    const std::int64_t j0 = i < n_in_ ? std::min(n_in_, s.cols_used) : 0;
    acc += simd::norm2(row_span(s.F, cols_, i, j0, s.cols_used));
  }
  return acc;
}

AtomFieldModel build_model(const ModelParams& params) { return AtomFieldModel(params); }
AtomFieldState init_excited(const AtomFieldModel& model) { return model.initial_state(); }
AtomFieldState init_two_particle(const AtomFieldModel& model, double x_r, double x_l) {
  return model.two_particle_state(x_r, x_l);
}

AtomFieldState step(const AtomFieldModel& model, const AtomFieldState& state) {
  AtomFieldState out = state;
  model.step_in_place(out);
  return out;
}

AtomFieldState evolve_to(const AtomFieldModel& model, const AtomFieldState& state, double t_target) {
  const std::int64_t target = steps_for(t_target, model.dt(), "t_target");
  if (target < state.step) throw InvalidArgument("t_target lies before the state's time");
  AtomFieldState out = state;
  model.advance(out, target - state.step);
  return out;
}

}  // namespace zeno::atom_field
