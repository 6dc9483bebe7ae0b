#include "zeno/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "zeno/simd/kernels.hpp"

namespace zeno::lattice {

double norm2(const LatticeState& s) { return simd::norm2(s.core) + simd::norm2(s.wave); }

void scale(LatticeState& s, double factor) {
  simd::scale(factor, s.core);
  simd::scale(factor, s.wave);
}

LatticeRegion LatticeRegion::all_wave() { return LatticeRegion{}; }

LatticeRegion LatticeRegion::cells(std::vector<std::size_t> indices) {
  LatticeRegion r;
  r.all_ = false;
  std::sort(indices.begin(), indices.end());
  indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
  r.cells_ = std::move(indices);
  return r;
}

LatticeRegion LatticeRegion::complement() const {
  LatticeRegion r = *this;
  r.complement_ = !complement_;
  return r;
}

bool LatticeRegion::contains_wave(std::size_t j) const {
  const bool listed = all_ || std::binary_search(cells_.begin(), cells_.end(), j);
  return listed != complement_;
}

void LatticeRegion::keep(LatticeState& s, bool inside) const {
  // Core cells are never part of a measured wave-cell set, so they belong to
  // the complemented region only.
  if (inside != complement_) std::fill(s.core.begin(), s.core.end(), cplx{});
  for (std::size_t j = 0; j < s.wave.size(); ++j) {
    if (contains_wave(j) != inside) s.wave[j] = cplx{};
  }
}

LatticeModel::LatticeModel(std::size_t core_dim, std::vector<cplx> core_step, Topology topology,
                           std::int64_t horizon)
    : core_dim_(core_dim), core_step_(std::move(core_step)), topology_(topology), horizon_(horizon) {
  if (core_dim_ < 2) throw InvalidArgument("core_dim must be at least 2 (excited level + staging cell)");
  if (core_step_.size() != core_dim_ * core_dim_) throw InvalidArgument("core_step must be core_dim x core_dim");
  if (horizon_ < 1) throw InvalidArgument("lattice horizon must be >= 1");
  if (const Ring* ring = std::get_if<Ring>(&topology_); ring != nullptr && ring->length == 0) {
    throw InvalidArgument("ring length must be >= 1");
  }
  double worst = 0.0;
  for (std::size_t a = 0; a < core_dim_; ++a) {
    for (std::size_t b = 0; b < core_dim_; ++b) {
      cplx acc{};
      for (std::size_t r = 0; r < core_dim_; ++r) acc += std::conj(core_step_[r * core_dim_ + a]) * core_step_[r * core_dim_ + b];
      worst = std::max(worst, std::abs(acc - (a == b ? 1.0 : 0.0)));
    }
  }
  if (!(worst <= 1e-10)) {
    throw InvalidArgument("core_step is not unitary: max|K^dag K - 1| = " + std::to_string(worst));
  }
}

std::size_t LatticeModel::ring_length() const {
  const Ring* ring = std::get_if<Ring>(&topology_);
  return ring ? ring->length : 0;
}

LatticeState LatticeModel::zero_state(std::size_t wave_cells) const {
  LatticeState s;
  s.core.assign(core_dim_, cplx{});
  s.wave.assign(is_ring() ? ring_length() : wave_cells, cplx{});
  return s;
}

LatticeState LatticeModel::initial_state() const {
  LatticeState s = zero_state(0);
  s.core[0] = 1.0;
  return s;
}

void LatticeModel::step_in_place(LatticeState& s) const {
  std::vector<cplx> next(core_dim_, cplx{});
  for (std::size_t r = 0; r < core_dim_; ++r) {
    cplx acc{};
    for (std::size_t c = 0; c < core_dim_; ++c) acc += core_step_[r * core_dim_ + c] * s.core[c];
    next[r] = acc;
  }
  cplx& staging = next[core_dim_ - 1];
  if (is_ring()) {
    const cplx returning = s.wave.back();
    std::move_backward(s.wave.begin(), s.wave.end() - 1, s.wave.end());
    s.wave.front() = staging;
    staging = returning;
  } else {
    s.wave.insert(s.wave.begin(), staging);
    staging = cplx{};
  }
  s.core = std::move(next);
  ++s.step;
}

LatticeState LatticeModel::step(const LatticeState& s) const {
  LatticeState out = s;
  step_in_place(out);
  return out;
}

void LatticeModel::advance(LatticeState& s, std::int64_t n) const {
  if (n < 0) throw InvalidArgument("cannot advance a lattice state backwards");
  if (s.step + n > horizon_) {
    throw HorizonError("lattice run to step " + std::to_string(s.step + n) + " exceeds horizon " +
                       std::to_string(horizon_));
  }
  for (std::int64_t k = 0; k < n; ++k) step_in_place(s);
}

bool LatticeModel::is_initial_only(const LatticeState& s) const {
  for (std::size_t a = 1; a < s.core.size(); ++a)
    if (s.core[a] != cplx{}) return false;
  for (const cplx& w : s.wave)
    if (w != cplx{}) return false;
  return true;
}

LatticeModel new_lattice_model(std::size_t core_dim, std::vector<cplx> core_step, Topology topology,
                               std::int64_t horizon) {
  return LatticeModel(core_dim, std::move(core_step), topology, horizon);
}

std::vector<cplx> emission_rotation(double theta, double phase) {
  const double c = std::cos(theta), s = std::sin(theta);
  const cplx e = std::polar(1.0, phase);
  return {c, -s * std::conj(e), s * e, c};
}

LatticeState lattice_step(const LatticeModel& model, const LatticeState& state) { return model.step(state); }

double verify_one_sided(const LatticeModel& model, std::size_t window) {
  if (window == 0) throw InvalidArgument("verify_one_sided window must be >= 1");
  const std::size_t cells = model.is_ring() ? std::min(window, model.ring_length()) : window;
  double worst = 0.0;
  for (std::size_t j = 0; j < cells; ++j) {
    LatticeState s = model.zero_state(window);
    s.wave[j] = 1.0;
    model.step_in_place(s);
    for (const cplx& c : s.core) worst = std::max(worst, std::abs(c));
  }
  return worst;
}

double product_identity_residual(const LatticeModel& model, std::int64_t n_steps) {
  if (n_steps < 1) throw InvalidArgument("product identity needs n >= 1");
  const std::size_t window = model.is_ring() ? model.ring_length() : static_cast<std::size_t>(n_steps);
  const std::size_t dim = model.core_dim() + window;
  const LatticeRegion wave = LatticeRegion::all_wave();
  double worst = 0.0;
  for (std::size_t b = 0; b < dim; ++b) {
    LatticeState chain = model.zero_state(window);
    if (b < model.core_dim())
      chain.core[b] = 1.0;
    else
      chain.wave[b - model.core_dim()] = 1.0;
    LatticeState direct = chain;
    for (std::int64_t k = 0; k < n_steps; ++k) {
      model.step_in_place(chain);
      wave.keep(chain, false);
      model.step_in_place(direct);
    }
    wave.keep(direct, false);
    for (std::size_t a = 0; a < model.core_dim(); ++a) worst = std::max(worst, std::abs(chain.core[a] - direct.core[a]));
  }
  return worst;
}

double core_divergence(const LatticeModel& model, LatticeState a, LatticeState b, std::int64_t steps) {
  auto diff = [&] {
    double d = 0.0;
    for (std::size_t i = 0; i < a.core.size(); ++i) d = std::max(d, std::abs(a.core[i] - b.core[i]));
    return d;
  };
  double worst = diff();
  for (std::int64_t k = 0; k < steps; ++k) {
    model.step_in_place(a);
    model.step_in_place(b);
    worst = std::max(worst, diff());
  }
  return worst;
}

}  // namespace zeno::lattice
