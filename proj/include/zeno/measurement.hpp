#pragma once
// N successive projective measurements against any backend model.
//
// A backend supplies value-like states that carry their step counter, a
// region type that can keep the measured (or unmeasured) part of a state in
// place, and exact step-wise evolution. The engine offers three routes to the
// measured survival probability s_N:
//
//   run_noclick_branch  follows only the all-negative outcome sequence and
//                       renormalizes after each projection;
//   run_branch_tree     sums over every outcome sequence (breadth first,
//                       merging branches that collapse back onto |e(0)>);
//   run_monte_carlo     samples outcome sequences with counter-based RNG.

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "zeno/common.hpp"
#include "zeno/parallel.hpp"
#include "zeno/rng.hpp"

namespace zeno::measure {

// Branches and outcomes with probability below this are dropped.
inline constexpr double kPruneWeight = 1e-15;

template <class M>
concept Backend = requires(const M& model, typename M::State& s, const typename M::State& cs,
                           const typename M::Region& region, std::int64_t n) {
  { model.initial_state() } -> std::same_as<typename M::State>;
  { model.step_length() } -> std::convertible_to<double>;
  { model.horizon_steps() } -> std::convertible_to<std::int64_t>;
  model.advance(s, n);
  { model.survival_amplitude(cs) } -> std::convertible_to<cplx>;
  { model.is_initial_only(cs) } -> std::convertible_to<bool>;
  { model.one_sided() } -> std::convertible_to<bool>;
  { cs.step } -> std::convertible_to<std::int64_t>;
  { norm2(cs) } -> std::convertible_to<double>;
  scale(s, 1.0);
  region.keep(s, true);
  { region.is_wave_zone() } -> std::convertible_to<bool>;
};

template <class Region>
struct MeasurementSchedule {
  std::vector<std::int64_t> steps;  // measurement steps, strictly increasing, all > 0
  std::int64_t final_step = 0;      // survival check, >= last measurement step
  Region region;

  std::size_t size() const { return steps.size(); }
};

// Builds a schedule from times; every time must sit on the step grid.
template <Backend M>
MeasurementSchedule<typename M::Region> make_schedule(const M& model, const std::vector<double>& times,
                                                      double final_time, typename M::Region region) {
  const double dt = model.step_length();
  MeasurementSchedule<typename M::Region> sched{{}, 0, std::move(region)};
  sched.steps.reserve(times.size());
  for (double t : times) {
    const std::int64_t k = steps_for(t, dt, "measurement time");
    if (k <= 0) throw InvalidArgument("measurement times must be positive");
    if (!sched.steps.empty() && k <= sched.steps.back()) {
      throw InvalidArgument("measurement times must be strictly increasing");
    }
    sched.steps.push_back(k);
  }
  sched.final_step = steps_for(final_time, dt, "final time");
  if (!sched.steps.empty() && sched.final_step < sched.steps.back()) {
    throw InvalidArgument("final time precedes the last measurement");
  }
  if (sched.final_step > model.horizon_steps()) {
    throw InvalidArgument("schedule final time exceeds the model horizon");
  }
  return sched;
}

// Measurements every `interval` up to and including `t_final`, then the final
// survival check at `t_final`.
template <Backend M>
MeasurementSchedule<typename M::Region> equal_spacing(const M& model, double interval, double t_final,
                                                      typename M::Region region) {
  const double dt = model.step_length();
  const std::int64_t every = steps_for(interval, dt, "measurement interval");
  const std::int64_t total = steps_for(t_final, dt, "final time");
  if (every <= 0) throw InvalidArgument("measurement interval must be positive");
  if (total % every != 0) throw InvalidArgument("final time is not a multiple of the measurement interval");
  std::vector<double> times;
  for (std::int64_t k = every; k <= total; k += every) times.push_back(static_cast<double>(k) * dt);
  return make_schedule(model, times, t_final, std::move(region));
}

template <class State>
struct MeasurementOutcome {
  double p_click = 0.0;
  double p_noclick = 0.0;
  std::optional<State> click;    // P psi / sqrt(p), absent when p < 1e-15
  std::optional<State> noclick;  // (1 - P) psi / sqrt(1 - p), absent when 1 - p < 1e-15
};

template <class State, class Region>
MeasurementOutcome<State> apply_measurement(const State& state, const Region& region) {
  MeasurementOutcome<State> out;
  State in = state;
  region.keep(in, true);
  State rest = state;
  region.keep(rest, false);
  out.p_click = norm2(in);
  out.p_noclick = norm2(rest);
  if (out.p_click >= kPruneWeight) {
    scale(in, 1.0 / std::sqrt(out.p_click));
    out.click = std::move(in);
  }
  if (out.p_noclick >= kPruneWeight) {
    scale(rest, 1.0 / std::sqrt(out.p_noclick));
    out.noclick = std::move(rest);
  }
  return out;
}

template <Backend M>
double survival_probability(const M& model, const typename M::State& s) {
  return std::norm(cplx(model.survival_amplitude(s)));
}

// s(t) at `final_step` without measurements.
template <Backend M>
double unmeasured_survival(const M& model, std::int64_t final_step) {
  auto s = model.initial_state();
  model.advance(s, final_step - s.step);
  return survival_probability(model, s);
}

struct BranchRecord {
  std::vector<double> p;             // click probability at each measurement
  std::vector<double> noclick_weight;  // running product of (1 - p_k)
  double final_overlap2 = 0.0;       // |<e(0)|psi_branch(t_final)>|^2
  bool terminated = false;           // some p_k = 1 ended the branch
};

struct NoClickResult {
  double s_n = 0.0;
  BranchRecord record;
  // True when clicked branches provably contribute nothing (wave-zone region
  // on a one-sided model); otherwise s_n is the no-click part only.
  bool exact = false;
};

template <Backend M>
NoClickResult run_noclick_branch(const M& model, const MeasurementSchedule<typename M::Region>& sched) {
  NoClickResult res;
  res.exact = sched.region.is_wave_zone() && model.one_sided();
  auto state = model.initial_state();
  double weight = 1.0;
  for (std::int64_t k : sched.steps) {
    model.advance(state, k - state.step);
    auto outcome = apply_measurement(state, sched.region);
    res.record.p.push_back(outcome.p_click);
    if (!outcome.noclick) {
      res.record.terminated = true;
      res.record.noclick_weight.push_back(0.0);
      res.s_n = 0.0;
      return res;
    }
    weight *= 1.0 - outcome.p_click;
    res.record.noclick_weight.push_back(weight);
    state = std::move(*outcome.noclick);
  }
  model.advance(state, sched.final_step - state.step);
  res.record.final_overlap2 = survival_probability(model, state);
  res.s_n = weight * res.record.final_overlap2;
  return res;
}

struct BranchTreeOptions {
  std::size_t max_live_branches = std::size_t{1} << 14;
  unsigned threads = 1;
};

struct BranchTreeResult {
  double s_n = 0.0;
  double total_weight = 0.0;   // sum of surviving branch probabilities
  double pruned_weight = 0.0;  // probability mass dropped by pruning
  // Part of s_n carried by outcome sequences with at least one click.
  double clicked_contribution = 0.0;
  // Largest |<e(0)|psi>| over final branches reached through a click.
  double max_clicked_overlap = 0.0;
  std::size_t final_branches = 0;
  std::size_t peak_branches = 0;
};

template <Backend M>
BranchTreeResult run_branch_tree(const M& model, const MeasurementSchedule<typename M::Region>& sched,
                                 const BranchTreeOptions& opts = {}) {
  using State = typename M::State;
  struct Branch {
    State state;
    double weight = 0.0;
    double clicked_weight = 0.0;  // weight reached through at least one click
  };
  BranchTreeResult res;
  std::vector<Branch> live;
  live.push_back({model.initial_state(), 1.0, 0.0});
  res.peak_branches = 1;

  for (std::int64_t k : sched.steps) {
    auto outcomes = parallel_map<std::optional<MeasurementOutcome<State>>>(
        live.size(), opts.threads, [&](std::size_t b) -> std::optional<MeasurementOutcome<State>> {
          model.advance(live[b].state, k - live[b].state.step);
          return apply_measurement(live[b].state, sched.region);
        });
    std::vector<Branch> next;
    std::optional<std::size_t> reset;  // merged branch that collapsed onto |e(0)>
    auto admit = [&](State&& st, double w, double wc) {
      if (w < kPruneWeight) {
        res.pruned_weight += w;
        return;
      }
      if (model.is_initial_only(st)) {
        if (reset) {
          next[*reset].weight += w;
          next[*reset].clicked_weight += wc;
          return;
        }
        reset = next.size();
      }
      next.push_back({std::move(st), w, wc});
    };
    for (std::size_t b = 0; b < live.size(); ++b) {
      auto& out = *outcomes[b];
      const Branch& parent = live[b];
      const double wc_frac = parent.weight > 0.0 ? parent.clicked_weight / parent.weight : 0.0;
      if (out.click) {
        admit(std::move(*out.click), parent.weight * out.p_click, parent.weight * out.p_click);
      } else {
        res.pruned_weight += parent.weight * out.p_click;
      }
      if (out.noclick) {
        const double w = parent.weight * out.p_noclick;
        admit(std::move(*out.noclick), w, w * wc_frac);
      } else {
        res.pruned_weight += parent.weight * out.p_noclick;
      }
    }
    if (next.size() > opts.max_live_branches) {
      throw InvalidArgument("branch tree too large: " + std::to_string(next.size()) + " live branches exceed the cap of " +
                            std::to_string(opts.max_live_branches));
    }
    live = std::move(next);
    res.peak_branches = std::max(res.peak_branches, live.size());
  }

  const auto overlaps = parallel_map<double>(live.size(), opts.threads, [&](std::size_t b) {
    model.advance(live[b].state, sched.final_step - live[b].state.step);
    return survival_probability(model, live[b].state);
  });
  for (std::size_t b = 0; b < live.size(); ++b) {
    res.s_n += live[b].weight * overlaps[b];
    res.total_weight += live[b].weight;
    res.clicked_contribution += live[b].clicked_weight * overlaps[b];
    if (live[b].clicked_weight > 0.0) res.max_clicked_overlap = std::max(res.max_clicked_overlap, std::sqrt(overlaps[b]));
  }
  res.final_branches = live.size();
  return res;
}

struct MonteCarloResult {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t n_traj = 0;
  std::size_t peak_distinct_states = 0;
};

// Samples click/no-click at every measurement with the Born probabilities.
// Trajectories that share an outcome prefix share the evolved state, so the
// cost scales with the number of distinct prefixes, not with n_traj. The
// uniform variate for trajectory n at measurement k is
// counter_uniform(seed, n, k): serial and threaded runs agree bit-for-bit.
template <Backend M>
MonteCarloResult run_monte_carlo(const M& model, const MeasurementSchedule<typename M::Region>& sched,
                                 std::size_t n_traj, std::uint64_t seed, unsigned threads = 1) {
  using State = typename M::State;
  if (n_traj == 0) throw InvalidArgument("n_traj must be >= 1");
  std::vector<State> nodes;
  nodes.push_back(model.initial_state());
  std::vector<std::uint32_t> at(n_traj, 0);
  MonteCarloResult res;
  res.n_traj = n_traj;
  res.peak_distinct_states = 1;

  for (std::size_t m = 0; m < sched.steps.size(); ++m) {
    const std::int64_t k = sched.steps[m];
    auto outcomes = parallel_map<std::optional<MeasurementOutcome<State>>>(
        nodes.size(), threads, [&](std::size_t b) -> std::optional<MeasurementOutcome<State>> {
          model.advance(nodes[b], k - nodes[b].step);
          return apply_measurement(nodes[b], sched.region);
        });
    // Child slot 2b is the click outcome of node b, 2b + 1 the no-click one.
    std::vector<char> used(2 * nodes.size(), 0);
    std::vector<std::uint32_t> slot_of(n_traj);
    for (std::size_t n = 0; n < n_traj; ++n) {
      const auto& out = *outcomes[at[n]];
      const double u = counter_uniform(seed, n, m);
      bool click = u * (out.p_click + out.p_noclick) < out.p_click;
      if (click && !out.click) click = false;
      if (!click && !out.noclick) click = true;
      slot_of[n] = static_cast<std::uint32_t>(2 * at[n] + (click ? 0 : 1));
      used[slot_of[n]] = 1;
    }
    std::vector<State> next;
    std::vector<std::uint32_t> remap(used.size(), 0);
    std::optional<std::uint32_t> reset;
    for (std::size_t slot = 0; slot < used.size(); ++slot) {
      if (!used[slot]) continue;
      auto& out = *outcomes[slot / 2];
      State& child = (slot % 2 == 0) ? *out.click : *out.noclick;
      if (model.is_initial_only(child)) {
        if (reset) {
          remap[slot] = *reset;
          continue;
        }
        reset = static_cast<std::uint32_t>(next.size());
      }
      remap[slot] = static_cast<std::uint32_t>(next.size());
      next.push_back(std::move(child));
    }
    for (std::size_t n = 0; n < n_traj; ++n) at[n] = remap[slot_of[n]];
    nodes = std::move(next);
    res.peak_distinct_states = std::max(res.peak_distinct_states, nodes.size());
  }

  const auto overlaps = parallel_map<double>(nodes.size(), threads, [&](std::size_t b) {
    model.advance(nodes[b], sched.final_step - nodes[b].step);
    return survival_probability(model, nodes[b]);
  });
  double total = 0.0;
  for (std::size_t n = 0; n < n_traj; ++n) total += overlaps[at[n]];
  res.estimate = total / static_cast<double>(n_traj);
  if (n_traj > 1) {
    double ss = 0.0;
    for (std::size_t n = 0; n < n_traj; ++n) {
      const double dv = overlaps[at[n]] - res.estimate;
      ss += dv * dv;
    }
    res.standard_error = std::sqrt(ss / static_cast<double>(n_traj - 1) / static_cast<double>(n_traj));
  }
  return res;
}

// |s_N - s(t_final)| with s_N from the exact branch tree.
template <Backend M>
double theorem_residual(const M& model, const MeasurementSchedule<typename M::Region>& sched,
                        const BranchTreeOptions& opts = {}) {
  if (sched.steps.empty()) return 0.0;
  const double s = unmeasured_survival(model, sched.final_step);
  return std::abs(run_branch_tree(model, sched, opts).s_n - s);
}

}  // namespace zeno::measure
