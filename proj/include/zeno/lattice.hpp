#pragma once
// Discrete-time conveyor lattice.
//
// The state space is a small core block (index 0 is the excited level |e>,
// the last index is the staging cell) plus a list of wave cells. One step is
// U = S K: the unitary K mixes the core block, then S moves the staging cell
// into wave cell 1 and every wave cell j into j+1. On the unilateral topology
// the wave list grows on demand and nothing ever returns to the core, so the
// wave cells form an exact wave zone. The ring topology closes the conveyor
// (cell L feeds the staging cell), which is the minimal way to break that.

#include <cstddef>
#include <cstdint>
#include <variant>
#include <vector>

#include "zeno/common.hpp"

namespace zeno::lattice {

struct Unilateral {};
struct Ring {
  std::size_t length = 0;
};
using Topology = std::variant<Unilateral, Ring>;

struct LatticeState {
  std::vector<cplx> core;
  std::vector<cplx> wave;  // wave[0] holds the quantum emitted one step ago
  std::int64_t step = 0;
};

double norm2(const LatticeState& s);
void scale(LatticeState& s, double factor);

// A measured set of wave cells (all of them, or an explicit index list),
// optionally complemented. Indices are 0-based: cell j is wave[j].
class LatticeRegion {
 public:
  static LatticeRegion all_wave();
  static LatticeRegion cells(std::vector<std::size_t> indices);
  LatticeRegion complement() const;

  // Zeroes every amplitude outside (inside == true) or inside the region.
  void keep(LatticeState& s, bool inside) const;
  bool is_wave_zone() const { return all_ && !complement_; }

 private:
  bool contains_wave(std::size_t j) const;

  bool all_ = true;
  bool complement_ = false;
  std::vector<std::size_t> cells_;  // sorted
};

class LatticeModel {
 public:
  using State = LatticeState;
  using Region = LatticeRegion;

  // core_step is row-major core_dim x core_dim.
  LatticeModel(std::size_t core_dim, std::vector<cplx> core_step, Topology topology, std::int64_t horizon);

  std::size_t core_dim() const { return core_dim_; }
  const Topology& topology() const { return topology_; }
  bool is_ring() const { return std::holds_alternative<Ring>(topology_); }
  std::size_t ring_length() const;
  const std::vector<cplx>& core_step() const { return core_step_; }

  State initial_state() const;
  // A zero state with the wave list sized to hold `wave_cells` cells.
  State zero_state(std::size_t wave_cells) const;

  State step(const State& s) const;
  void step_in_place(State& s) const;
  // Applies n steps; throws HorizonError past the model horizon.
  void advance(State& s, std::int64_t n) const;

  double step_length() const { return 1.0; }
  std::int64_t horizon_steps() const { return horizon_; }
  cplx survival_amplitude(const State& s) const { return s.core[0]; }
  bool is_initial_only(const State& s) const;
  bool one_sided() const { return !is_ring(); }

 private:
  std::size_t core_dim_;
  std::vector<cplx> core_step_;
  Topology topology_;
  std::int64_t horizon_;
};

LatticeModel new_lattice_model(std::size_t core_dim, std::vector<cplx> core_step, Topology topology,
                               std::int64_t horizon);

// 2x2 emission step: rotation by theta between |e> and the staging cell, the
// emitted branch carrying phase e^{i phase}.
std::vector<cplx> emission_rotation(double theta, double phase = 0.0);

LatticeState lattice_step(const LatticeModel& model, const LatticeState& state);

// max |<core a| U |wave j>| over core rows and wave cells j < window.
double verify_one_sided(const LatticeModel& model, std::size_t window);

// max-norm of (P_C U)^n - P_C U^n over the core block and the wave cells a
// state can occupy within n steps.
double product_identity_residual(const LatticeModel& model, std::int64_t n_steps);

// Evolves two states for `steps` steps and returns the largest core-block
// difference seen at any step (including the start).
double core_divergence(const LatticeModel& model, LatticeState a, LatticeState b, std::int64_t steps);

}  // namespace zeno::lattice
