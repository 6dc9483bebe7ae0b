#pragma once
// Two-level atom in the box [-d/2, d/2] coupled to one right-moving and one
// left-moving field quantum, in units hbar = c = 1.
//
// The closed sector is C|e> + sum F(x_R, x_L)|x_R, x_L> with x_R >= -d/2 and
// x_L <= d/2. The field is stored as cell amplitudes a = F dx on a product
// grid with unit CFL (dt = dx), indexed so that both indices grow along the
// characteristics:
//
//   x_R(i) = -d/2 + (i + 1/2) dx,   x_L(j) = d/2 - (j + 1/2) dx.
//
// Free transport is then the exact diagonal shift a(i, j) <- a(i-1, j-1).
// The atom amplitude is kept in the frame rotating at omega, so an uncoupled
// atom keeps C exactly constant; lab_amplitude() restores the phase.
// The coupling g(x, x') = g0 on the box couples C to a single collective
// interior mode, so the interaction part of a step is an exact 2x2 rotation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "zeno/common.hpp"

namespace zeno::atom_field {

struct GridParams {
  double dx = 1.0 / 64.0;
  double t_max = 3.0;
  double margin = 0.0;       // extra length beyond the causal cone
  std::int64_t cells_r = 0;  // explicit extents; 0 derives them from t_max
  std::int64_t cells_l = 0;
};

struct ModelParams {
  double d = 1.0;
  double omega = 5.0;
  double g0 = 0.5;
  GridParams grid;
};

struct AtomFieldState {
  cplx C{};             // e^{i omega t} times the lab-frame atom amplitude
  std::vector<cplx> F;  // row-major (i_R, j_L) cell amplitudes
  std::int64_t step = 0;
  // Support bounds: every cell with i >= rows_used or j >= cols_used is zero.
  std::int64_t rows_used = 0;
  std::int64_t cols_used = 0;
};

double norm2(const AtomFieldState& s);
void scale(AtomFieldState& s, double factor);

class AtomFieldModel;

// A measured region of the (x_R, x_L) grid. The atom amplitude C is never part
// of a field region.
class AtomFieldRegion {
 public:
  enum class Kind { wave_zone, whole, interior, custom };
  using Run = std::pair<std::int64_t, std::int64_t>;  // [j0, j1) within a row

  static AtomFieldRegion wave_zone(const AtomFieldModel& model);
  static AtomFieldRegion whole(const AtomFieldModel& model);
  static AtomFieldRegion interior(const AtomFieldModel& model);
  // Cells whose centers satisfy pred(x_R, x_L).
  static AtomFieldRegion custom(const AtomFieldModel& model, const std::function<bool(double, double)>& pred,
                                std::string name);

  AtomFieldRegion complement() const;

  void keep(AtomFieldState& s, bool inside) const;
  double measured_norm2(const AtomFieldState& s) const;

  bool is_wave_zone() const { return kind_ == Kind::wave_zone && !complement_; }
  Kind kind() const { return kind_; }
  bool complemented() const { return complement_; }
  const std::string& name() const { return name_; }
  bool contains(std::int64_t i, std::int64_t j) const;

 private:
  AtomFieldRegion(Kind kind, std::string name, std::vector<std::vector<Run>> inside_runs, std::int64_t cols);

  Kind kind_;
  bool complement_ = false;
  std::string name_;
  std::int64_t cols_ = 0;
  // runs_[0]: inside runs per row; runs_[1]: outside runs per row.
  std::shared_ptr<const std::array<std::vector<std::vector<Run>>, 2>> runs_;
};

class AtomFieldModel {
 public:
  using State = AtomFieldState;
  using Region = AtomFieldRegion;

  explicit AtomFieldModel(const ModelParams& params);

  const ModelParams& params() const { return params_; }
  double dx() const { return params_.grid.dx; }
  double dt() const { return params_.grid.dx; }
  std::int64_t interior_cells() const { return n_in_; }  // per axis
  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  std::int64_t max_steps() const { return max_steps_; }
  double x_r(std::int64_t i) const { return -0.5 * params_.d + (static_cast<double>(i) + 0.5) * dx(); }
  double x_l(std::int64_t j) const { return 0.5 * params_.d - (static_cast<double>(j) + 0.5) * dx(); }
  std::size_t index(std::int64_t i, std::int64_t j) const { return static_cast<std::size_t>(i * cols_ + j); }
  bool is_interior(std::int64_t i, std::int64_t j) const { return i < n_in_ && j < n_in_; }

  // sqrt of the integral of |g|^2 over the box; equals g0 d.
  double coupling_norm() const { return kappa_; }
  // exp(-i dt H) on the lab-frame (C, collective mode), row-major.
  const std::array<cplx, 4>& interaction_propagator() const { return u2_; }

  State initial_state() const;
  State two_particle_state(double x_r, double x_l) const;

  // Exact transport: a(i, j) <- a(i-1, j-1), zeros entering at the edges.
  void advect(State& s) const;
  // Exact rotation of (C, collective interior mode).
  void interact(State& s) const;
  // advect then interact; throws HorizonError past max_steps.
  void step_in_place(State& s) const;
  void advance(State& s, std::int64_t n) const;

  double step_length() const { return dt(); }
  std::int64_t horizon_steps() const { return max_steps_; }
  // Same modulus as <e(0)|psi(t)>; the free atomic phase is removed.
  cplx survival_amplitude(const State& s) const { return s.C; }
  cplx lab_amplitude(const State& s) const {
    return std::polar(1.0, -params_.omega * static_cast<double>(s.step) * dt()) * s.C;
  }
  bool is_initial_only(const State& s) const;
  bool one_sided() const { return true; }

  double interior_norm2(const State& s) const;
  // Norm of the field outside the box (the wave zone).
  double exterior_norm2(const State& s) const;
  // <collective mode | field>.
  cplx collective_amplitude(const State& s) const;

 private:
  ModelParams params_;
  std::int64_t n_in_ = 0;
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::int64_t max_steps_ = 0;
  double kappa_ = 0.0;
  std::array<cplx, 4> u2_{};
  cplx rot00_{1.0};
  cplx rot01_{};
};

AtomFieldModel build_model(const ModelParams& params);
AtomFieldState init_excited(const AtomFieldModel& model);
AtomFieldState init_two_particle(const AtomFieldModel& model, double x_r, double x_l);
AtomFieldState step(const AtomFieldModel& model, const AtomFieldState& state);
AtomFieldState evolve_to(const AtomFieldModel& model, const AtomFieldState& state, double t_target);

inline double time_of(const AtomFieldModel& model, const AtomFieldState& s) {
  return static_cast<double>(s.step) * model.dt();
}

}  // namespace zeno::atom_field
