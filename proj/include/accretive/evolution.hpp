#pragma once

#include "accretive/blockop.hpp"
#include "accretive/derivative.hpp"
#include "accretive/errors.hpp"
#include "accretive/impedance1d.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <type_traits>
#include <ostream>
#include <vector>

namespace accretive::evolution {

struct SchemeConfig {
  double tau = 0.1;
  std::size_t steps = 10;
  double tol = 1e-8;

  void validate() const;
};

template <class State>
struct TrajectoryRecord {
  std::vector<State> states;
  std::vector<double> norms;
  std::vector<double> timestamps;
};

template <class State>
using Resolvent = std::function<State(const State&, double)>;
template <class State>
using NormFn = std::function<double(const State&)>;
template <class State>
using DistanceFn = std::function<double(const State&, const State&)>;

/// u_{k+1} = (1 + τB)^{-1} u_k. Resolvent failures are rethrown as StepFailed
/// carrying the index of the step being computed.
template <class State>
TrajectoryRecord<State> evolve(const Resolvent<State>& resolvent, const State& u0, const SchemeConfig& cfg,
                               const NormFn<State>& norm) {
  cfg.validate();
  TrajectoryRecord<State> rec;
  rec.states.reserve(cfg.steps + 1);
  rec.states.push_back(u0);
  rec.norms.push_back(norm(u0));
  rec.timestamps.push_back(0.0);
  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    try {
      rec.states.push_back(resolvent(rec.states.back(), cfg.tau));
    } catch (const std::exception& e) {
      throw StepFailed(k, e.what());
    }
    rec.norms.push_back(norm(rec.states.back()));
    rec.timestamps.push_back(static_cast<double>(k) * cfg.tau);
  }
  return rec;
}

/// d_k = |u_k - v_k|; throws ContractionViolated at the first k with
/// d_k > d_{k-1} + tol.
template <class State>
std::vector<double> contraction_report(const Resolvent<State>& resolvent, const State& u0, const State& v0,
                                       const SchemeConfig& cfg, const DistanceFn<State>& dist) {
  cfg.validate();
  std::vector<double> d{dist(u0, v0)};
  State u = u0;
  State v = v0;
  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    try {
      u = resolvent(u, cfg.tau);
      v = resolvent(v, cfg.tau);
    } catch (const std::exception& e) {
      throw StepFailed(k, e.what());
    }
    d.push_back(dist(u, v));
    if (d[k] > d[k - 1] + cfg.tol) throw ContractionViolated(k, d[k - 1], d[k]);
  }
  return d;
}

struct OrderEstimate {
  std::vector<double> taus;
  std::vector<double> errors;        // against the exact endpoint, when supplied
  std::vector<double> differences;   // |x_{τ_i} - x_{τ_{i+1}}|
  std::vector<double> orders;        // successive Richardson ratios
  double estimate = std::nan("");    // last ratio
};

namespace detail {
void check_tau_list(const std::vector<double>& taus, double horizon);
OrderEstimate finish_order(std::vector<double> taus, std::vector<double> errors, std::vector<double> differences);
}  // namespace detail

/// Richardson order log(δ_i / δ_{i+1}) / log(τ_i / τ_{i+1}) from successive
/// endpoint differences δ_i.
template <class State>
OrderEstimate convergence_order(const Resolvent<State>& resolvent, const State& u0, const std::vector<double>& taus,
                                double horizon, const DistanceFn<State>& dist,
                                const std::optional<std::type_identity_t<State>>& exact = std::nullopt) {
  detail::check_tau_list(taus, horizon);
  std::vector<State> ends;
  for (double tau : taus) {
    SchemeConfig cfg{tau, static_cast<std::size_t>(std::llround(horizon / tau)), 1e-8};
    State u = u0;
    for (std::size_t k = 1; k <= cfg.steps; ++k) {
      try {
        u = resolvent(u, tau);
      } catch (const std::exception& e) {
        throw StepFailed(k, e.what());
      }
    }
    ends.push_back(std::move(u));
  }
  std::vector<double> errors;
  if (exact) {
    for (const State& e : ends) errors.push_back(dist(e, *exact));
  }
  std::vector<double> diffs;
  for (std::size_t i = 0; i + 1 < ends.size(); ++i) diffs.push_back(dist(ends[i], ends[i + 1]));
  return detail::finish_order(taus, std::move(errors), std::move(diffs));
}

// ---- concrete resolvents -------------------------------------------------

/// Term-count or degree above this triggers pruning of the resolvent output.
inline constexpr std::size_t kPruneThreshold = 64;
inline constexpr double kPruneRelTol = 1e-13;

std::size_t coefficient_count(const ExpPoly& f);
ExpPoly maybe_prune(const ExpPoly& f, const Interval& I);

Resolvent<ExpPoly> scalar_resolvent(const derivative::Realization& R);
Resolvent<blockop::BlockState> block_resolvent(const blockop::BlockRealization& R);

NormFn<ExpPoly> l2_norm_fn(const Interval& I);
DistanceFn<ExpPoly> l2_distance_fn(const Interval& I);
NormFn<blockop::BlockState> state_norm_fn(const derivative::Context& ctx);
DistanceFn<blockop::BlockState> state_distance_fn(const derivative::Context& ctx);

struct WaveReport {
  std::vector<double> energies;              // E_k = ‖(u_k, v_k)‖² in L2 × L2
  std::optional<std::size_t> first_increase; // first k with E_k > E_{k-1} + tol(1 + E_{k-1})
  bool nonincreasing() const { return !first_increase; }
};

/// Implicit Euler for the wave system with impedance K.
WaveReport wave_energy_run(const derivative::Context& ctx, const impedance1d::ImpedanceK& K,
                           const blockop::BlockState& initial, const SchemeConfig& cfg,
                           TrajectoryRecord<blockop::BlockState>* record = nullptr);

/// CSV with columns step,time,norm plus distance/energy when supplied.
void write_csv(std::ostream& os, const std::vector<double>& times, const std::vector<double>& norms,
               const std::vector<double>* distances = nullptr, const std::vector<double>* energies = nullptr);

}  // namespace accretive::evolution
