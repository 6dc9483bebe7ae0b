#pragma once
// Incomplete-measurement detector placed at [x_-, x_+] outside the atom.
//
// The detector has static excitations b(k) with energy Omega(k). It absorbs a
// right-mover in [x_-, x_+] (coupling lambda_R) and re-emits a left-mover
// there (coupling lambda_L). Starting from the atom-field sector this opens
// two more sectors:
//
//   D(k, x_L)        one detector excitation + the original left-mover,
//   G(x_L1, x_L2)    two left-movers, stored on the ordered domain only.
//
// D shares the x_L grid of F. G uses an extended left-mover grid that starts
// at x_+: x(q) = x_+ - (q + 1/2) dx, so the G index of an F/D column j is
// q = J0 + j with J0 = (x_+ - d/2)/dx. Left-movers in G and D advect by exact
// shifts; detector excitations do not move.
//
// The atom couples only to interior F cells, and the detector couples only to
// F cells with x_R in [x_-, x_+], which sit strictly outside the box and only
// move further out. The (C, interior F) update is therefore the atom-field
// step itself, for every coupling.

#include <cstdint>
#include <functional>
#include <vector>

#include "zeno/atom_field.hpp"

namespace zeno::detector {

using Coupling = std::function<double(double x, double k)>;

Coupling constant_coupling(double lambda0);

struct DetectorParams {
  double x_minus = 1.0;
  double x_plus = 1.5;
  std::int64_t n_k = 16;
  double k_max = 8.0;
  std::function<double(double k)> omega_of_k = [](double k) { return k; };
  Coupling lambda_r = constant_coupling(0.5);
  Coupling lambda_l = constant_coupling(0.5);
};

struct DetectorState {
  atom_field::AtomFieldState atom;  // C and F
  std::vector<cplx> G;              // ng x ng, entries with q1 < q2
  std::vector<cplx> D;              // n_k x cols (k-major)
};

double norm2(const DetectorState& s);
void scale(DetectorState& s, double factor);

struct SectorNorms {
  double c = 0.0;
  double f = 0.0;
  double g = 0.0;
  double d = 0.0;
  double total() const { return c + f + g + d; }
};

class DetectorModel {
 public:
  DetectorModel(const atom_field::ModelParams& atom_params, const DetectorParams& det_params);

  const atom_field::AtomFieldModel& atom() const { return atom_; }
  const DetectorParams& params() const { return det_; }

  std::int64_t detector_cells() const { return n_det_; }
  std::int64_t first_detector_row() const { return i_lo_; }
  std::int64_t g_size() const { return ng_; }
  std::int64_t g_offset() const { return j0_; }
  std::int64_t n_k() const { return det_.n_k; }
  double k_value(std::int64_t m) const { return -det_.k_max + (static_cast<double>(m) + 0.5) * dk_; }
  double dk() const { return dk_; }
  // Left-mover position of G index q.
  double x_g(std::int64_t q) const { return det_.x_plus - (static_cast<double>(q) + 0.5) * atom_.dx(); }
  bool coupled() const { return coupled_; }

  // Hermitian block coupling [F(det rows, j); D(:, j); G(det rows, J0 + j)],
  // identical for every column j, and its exact one-step propagator.
  const std::vector<cplx>& block_hamiltonian() const { return h_block_; }
  const std::vector<cplx>& block_propagator() const { return u_block_; }
  std::int64_t block_size() const { return m_; }

  DetectorState embed(const atom_field::AtomFieldState& s) const;
  DetectorState initial_state() const { return embed(atom_.initial_state()); }

  void step_in_place(DetectorState& s) const;
  void advance(DetectorState& s, std::int64_t n) const;

  SectorNorms sector_norms(const DetectorState& s) const;

 private:
  void advect_left_movers(DetectorState& s) const;
  void couple_detector(DetectorState& s) const;

  atom_field::AtomFieldModel atom_;
  DetectorParams det_;
  std::int64_t i_lo_ = 0;
  std::int64_t n_det_ = 0;
  std::int64_t j0_ = 0;
  std::int64_t ng_ = 0;
  std::int64_t m_ = 0;
  double dk_ = 0.0;
  bool coupled_ = false;
  std::vector<cplx> h_block_;
  std::vector<cplx> u_block_;
  std::vector<cplx> d_phase_;  // e^{-i Omega(k) dt}, used when uncoupled
};

DetectorModel build_detector_model(const atom_field::ModelParams& atom_params, const DetectorParams& det_params);
DetectorState det_step(const DetectorModel& model, const DetectorState& state);

struct LambdaTrace {
  double lambda = 0.0;
  std::vector<double> t;
  std::vector<double> s;
  std::vector<SectorNorms> norms;
  double max_norm_drift_per_step = 0.0;
};

struct LambdaSweep {
  std::vector<LambdaTrace> traces;  // in lambda_list order
  double max_deviation = 0.0;       // max over t, lambda of |s_lambda(t) - s_0(t)|
};

// Runs the detector model with lambda_R = lambda_L = lambda (constant) for each
// lambda and compares survival curves against the uncoupled run. Samples are
// taken every `stride` steps up to t_max.
LambdaSweep lambda_sweep(const atom_field::ModelParams& atom_params, const DetectorParams& family,
                         const std::vector<double>& lambda_list, double t_max, std::int64_t stride = 1,
                         unsigned threads = 1);

}  // namespace zeno::detector
