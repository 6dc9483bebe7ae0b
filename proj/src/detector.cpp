#include "zeno/detector.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "zeno/parallel.hpp"
#include "zeno/simd/kernels.hpp"

namespace zeno::detector {

namespace {

std::int64_t grid_index(double offset, double dx, const char* what) {
  const double r = offset / dx;
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-9 * std::max(1.0, std::abs(r))) {
    throw InvalidArgument(std::string(what) + " does not lie on a cell edge of the grid");
  }
  return static_cast<std::int64_t>(k);
}

}  // namespace

Coupling constant_coupling(double lambda0) {
  return [lambda0](double, double) { return lambda0; };
}

double norm2(const DetectorState& s) {
  return atom_field::norm2(s.atom) + simd::norm2(s.G) + simd::norm2(s.D);
}

void scale(DetectorState& s, double factor) {
  atom_field::scale(s.atom, factor);
  simd::scale(factor, s.G);
  simd::scale(factor, s.D);
}

DetectorModel::DetectorModel(const atom_field::ModelParams& atom_params, const DetectorParams& det_params)
    : atom_(atom_params), det_(det_params) {
  const double half = 0.5 * atom_params.d;
  const double dx = atom_.dx();
  if (!(det_.x_minus > half)) throw InvalidArgument("detector must sit outside the atom: need x_- > d/2");
  if (!(det_.x_plus > det_.x_minus)) throw InvalidArgument("detector needs x_+ > x_-");
  if (det_.n_k < 1) throw InvalidArgument("detector needs at least one k mode");
  if (!(det_.k_max > 0.0)) throw InvalidArgument("detector k_max must be positive");
  if (!det_.omega_of_k || !det_.lambda_r || !det_.lambda_l) throw InvalidArgument("detector functions must be set");

  i_lo_ = grid_index(det_.x_minus + half, dx, "x_-");
  const std::int64_t i_hi = grid_index(det_.x_plus + half, dx, "x_+");
  n_det_ = i_hi - i_lo_;
  if (i_hi > atom_.rows()) throw InvalidArgument("detector extends past the x_R grid");
  // Absorption at x_- and re-emission at x_+ moves a right-mover ahead of the
  // light cone by up to x_+ - x_-, so the x_R grid needs that much margin.
  if (atom_.rows() < atom_.interior_cells() + atom_.max_steps() + n_det_) {
    throw InvalidArgument("grid too small for the detector: margin must be at least x_+ - x_-");
  }
  j0_ = grid_index(det_.x_plus - half, dx, "x_+");
  ng_ = j0_ + atom_.cols();
  dk_ = 2.0 * det_.k_max / static_cast<double>(det_.n_k);
  m_ = 2 * n_det_ + det_.n_k;

  // Block basis: [F rows i_lo.., D modes, G rows 0..n_det) for a fixed column.
  const auto m = static_cast<std::size_t>(m_);
  const auto nd = static_cast<std::size_t>(n_det_);
  const auto nk = static_cast<std::size_t>(det_.n_k);
  h_block_.assign(m * m, cplx{});
  const double measure = std::sqrt(dx * dk_);
  for (std::size_t k = 0; k < nk; ++k) {
    const double kv = k_value(static_cast<std::int64_t>(k));
    const std::size_t dk_row = nd + k;
    h_block_[dk_row * m + dk_row] = det_.omega_of_k(kv);
    for (std::size_t a = 0; a < nd; ++a) {
      const double lr = det_.lambda_r(atom_.x_r(i_lo_ + static_cast<std::int64_t>(a)), kv) * measure;
      const double ll = det_.lambda_l(x_g(static_cast<std::int64_t>(a)), kv) * measure;
      if (lr != 0.0 || ll != 0.0) coupled_ = true;
      h_block_[a * m + dk_row] = lr;
      h_block_[dk_row * m + a] = lr;
      const std::size_t g_row = nd + nk + a;
      h_block_[g_row * m + dk_row] = ll;
      h_block_[dk_row * m + g_row] = ll;
    }
  }

  const double dt = atom_.dt();
  d_phase_.resize(nk);
  for (std::size_t k = 0; k < nk; ++k) d_phase_[k] = std::polar(1.0, -det_.omega_of_k(k_value(static_cast<std::int64_t>(k))) * dt);

  Eigen::MatrixXcd h(m_, m_);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c) h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = h_block_[r * m + c];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h);
  if (eig.info() != Eigen::Success) throw InvalidArgument("detector block diagonalization failed");
  Eigen::VectorXcd phases(m_);
  for (Eigen::Index i = 0; i < m_; ++i) phases(i) = std::polar(1.0, -eig.eigenvalues()(i) * dt);
  const Eigen::MatrixXcd u = eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
  u_block_.resize(m * m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c) u_block_[r * m + c] = u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

DetectorState DetectorModel::embed(const atom_field::AtomFieldState& s) const {
  DetectorState out;
  out.atom = s;
  out.G.assign(static_cast<std::size_t>(ng_ * ng_), cplx{});
  out.D.assign(static_cast<std::size_t>(det_.n_k * atom_.cols()), cplx{});
  return out;
}

void DetectorModel::advect_left_movers(DetectorState& s) const {
  const std::int64_t cols = atom_.cols();
  // D: x_L index grows by one; detector excitations stay put.
  for (std::int64_t k = 0; k < det_.n_k; ++k) {
    cplx* row = s.D.data() + k * cols;
    if (row[cols - 1] != cplx{}) throw HorizonError("D-sector left-mover reached the outer x_L boundary");
    std::move_backward(row, row + cols - 1, row + cols);
    row[0] = cplx{};
  }
  // G: both left-movers advance, (q1, q2) <- (q1 - 1, q2 - 1).
  for (std::int64_t q = 0; q < ng_; ++q) {
    if (s.G[static_cast<std::size_t>(q * ng_ + ng_ - 1)] != cplx{} ||
        s.G[static_cast<std::size_t>((ng_ - 1) * ng_ + q)] != cplx{}) {
      throw HorizonError("G-sector left-mover reached the outer boundary");
    }
  }
  for (std::int64_t q = ng_ - 1; q >= 1; --q) {
    cplx* dst = s.G.data() + q * ng_;
    const cplx* src = s.G.data() + (q - 1) * ng_;
    std::copy(src, src + ng_ - 1, dst + 1);
    dst[0] = cplx{};
  }
  std::fill(s.G.begin(), s.G.begin() + ng_, cplx{});
}

void DetectorModel::couple_detector(DetectorState& s) const {
  const std::int64_t cols = atom_.cols();
  if (!coupled_) {
    for (std::int64_t k = 0; k < det_.n_k; ++k) simd::scale(d_phase_[static_cast<std::size_t>(k)], {s.D.data() + k * cols, static_cast<std::size_t>(cols)});
    return;
  }
  const auto m = static_cast<std::size_t>(m_);
  std::vector<cplx*> rows(m);
  for (std::int64_t a = 0; a < n_det_; ++a) {
    rows[static_cast<std::size_t>(a)] = s.atom.F.data() + (i_lo_ + a) * cols;
    rows[static_cast<std::size_t>(n_det_ + det_.n_k + a)] = s.G.data() + a * ng_ + j0_;
  }
  for (std::int64_t k = 0; k < det_.n_k; ++k) rows[static_cast<std::size_t>(n_det_ + k)] = s.D.data() + k * cols;

  std::vector<cplx> out(m * static_cast<std::size_t>(cols), cplx{});
  for (std::size_t r = 0; r < m; ++r) {
    std::span<cplx> dst(out.data() + r * static_cast<std::size_t>(cols), static_cast<std::size_t>(cols));
    for (std::size_t c = 0; c < m; ++c) {
      const cplx u = u_block_[r * m + c];
      if (u != cplx{}) simd::axpy(u, {rows[c], static_cast<std::size_t>(cols)}, dst);
    }
  }
  for (std::size_t r = 0; r < m; ++r) std::copy_n(out.data() + r * static_cast<std::size_t>(cols), cols, rows[r]);
  // The detector rows of F may now be populated.
  s.atom.rows_used = std::max(s.atom.rows_used, i_lo_ + n_det_);
  s.atom.cols_used = cols;
}

void DetectorModel::step_in_place(DetectorState& s) const {
  atom_.step_in_place(s.atom);
  advect_left_movers(s);
  couple_detector(s);
}

void DetectorModel::advance(DetectorState& s, std::int64_t n) const {
  if (n < 0) throw InvalidArgument("cannot advance a state backwards in time");
  if (s.atom.step + n > atom_.max_steps()) throw HorizonError("detector run exceeds the model horizon");
  for (std::int64_t k = 0; k < n; ++k) step_in_place(s);
}

SectorNorms DetectorModel::sector_norms(const DetectorState& s) const {
  return {std::norm(s.atom.C), simd::norm2(s.atom.F), simd::norm2(s.G), simd::norm2(s.D)};
}

DetectorModel build_detector_model(const atom_field::ModelParams& atom_params, const DetectorParams& det_params) {
  return DetectorModel(atom_params, det_params);
}

DetectorState det_step(const DetectorModel& model, const DetectorState& state) {
  DetectorState out = state;
  model.step_in_place(out);
  return out;
}

LambdaSweep lambda_sweep(const atom_field::ModelParams& atom_params, const DetectorParams& family,
                         const std::vector<double>& lambda_list, double t_max, std::int64_t stride, unsigned threads) {
  if (stride < 1) throw InvalidArgument("sample stride must be >= 1");
  std::vector<double> lambdas = lambda_list;
  const bool has_zero = std::find(lambdas.begin(), lambdas.end(), 0.0) != lambdas.end();
  if (!has_zero) lambdas.push_back(0.0);

  // Build every model before running so parameter errors surface first.
  std::vector<DetectorModel> models;
  models.reserve(lambdas.size());
  for (double lambda : lambdas) {
    DetectorParams p = family;
    p.lambda_r = constant_coupling(lambda);
    p.lambda_l = constant_coupling(lambda);
    models.emplace_back(atom_params, p);
  }
  const std::int64_t total = steps_for(t_max, models.front().atom().dt(), "t_max");
  if (total > models.front().atom().max_steps()) throw HorizonError("lambda sweep t_max exceeds the model horizon");

  auto traces = parallel_map<LambdaTrace>(lambdas.size(), threads, [&](std::size_t idx) {
    const DetectorModel& model = models[idx];
    LambdaTrace trace;
    trace.lambda = lambdas[idx];
    DetectorState s = model.initial_state();
    auto record = [&] {
      trace.t.push_back(static_cast<double>(s.atom.step) * model.atom().dt());
      trace.s.push_back(std::norm(s.atom.C));
      trace.norms.push_back(model.sector_norms(s));
    };
    record();
    double before = norm2(s);
    for (std::int64_t k = 1; k <= total; ++k) {
      model.step_in_place(s);
      const double after = norm2(s);
      trace.max_norm_drift_per_step = std::max(trace.max_norm_drift_per_step, std::abs(after - before));
      before = after;
      if (k % stride == 0 || k == total) record();
    }
    return trace;
  });

  LambdaSweep sweep;
  const auto zero_it = std::find(lambdas.begin(), lambdas.end(), 0.0);
  const LambdaTrace& base = traces[static_cast<std::size_t>(zero_it - lambdas.begin())];
  for (std::size_t idx = 0; idx < traces.size(); ++idx) {
    for (std::size_t n = 0; n < base.s.size(); ++n) {
      sweep.max_deviation = std::max(sweep.max_deviation, std::abs(traces[idx].s[n] - base.s[n]));
    }
  }
  if (!has_zero) traces.pop_back();
  sweep.traces = std::move(traces);
  return sweep;
}

}  // namespace zeno::detector
