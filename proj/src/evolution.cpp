#include "accretive/evolution.hpp"

#include <cstdio>
#include <string>
#include <stdexcept>

namespace accretive::evolution {

void SchemeConfig::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (steps < 1) throw std::invalid_argument("steps must be at least 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
}

namespace detail {

void check_tau_list(const std::vector<double>& taus, double horizon) {
  if (taus.size() < 3) throw std::invalid_argument("need at least three step sizes");
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0)) throw std::invalid_argument("step sizes must be positive");
    if (i > 0 && !(taus[i] < taus[i - 1])) throw std::invalid_argument("step sizes must decrease strictly");
    const double n = horizon / taus[i];
    if (std::abs(n - std::round(n)) > 1e-9 * n) throw std::invalid_argument("step size must divide the horizon");
  }
}

OrderEstimate finish_order(std::vector<double> taus, std::vector<double> errors, std::vector<double> differences) {
  OrderEstimate out;
  for (std::size_t i = 0; i + 1 < differences.size(); ++i) {
    const double r = differences[i] / differences[i + 1];
    out.orders.push_back(std::log(r) / std::log(taus[i] / taus[i + 1]));
  }
  if (!out.orders.empty()) out.estimate = out.orders.back();
  out.taus = std::move(taus);
  out.errors = std::move(errors);
  out.differences = std::move(differences);
  return out;
}

}  // namespace detail

std::size_t coefficient_count(const ExpPoly& f) {
  std::size_t n = 0;
  for (const Term& t : f.terms()) n += t.coeffs.size();
  return n;
}

ExpPoly maybe_prune(const ExpPoly& f, const Interval& I) {
  if (coefficient_count(f) > kPruneThreshold || f.max_degree() > kPruneThreshold) {
    return prune(f, I, kPruneRelTol);
  }
  return f;
}

Resolvent<ExpPoly> scalar_resolvent(const derivative::Realization& R) {
  return [R](const ExpPoly& u, double tau) {
    return maybe_prune(derivative::resolve(R, u, tau), R.context().interval());
  };
}

Resolvent<blockop::BlockState> block_resolvent(const blockop::BlockRealization& R) {
  return [R](const blockop::BlockState& s, double tau) {
    const Interval& I = R.context().interval();
    blockop::BlockState out = blockop::block_resolve(R, s, tau);
    return blockop::BlockState{maybe_prune(out.u, I), maybe_prune(out.v, I)};
  };
}

NormFn<ExpPoly> l2_norm_fn(const Interval& I) {
  return [I](const ExpPoly& u) { return l2_norm(u, I); };
}

DistanceFn<ExpPoly> l2_distance_fn(const Interval& I) {
  return [I](const ExpPoly& u, const ExpPoly& v) { return l2_norm(u - v, I); };
}

NormFn<blockop::BlockState> state_norm_fn(const derivative::Context& ctx) {
  return [ctx](const blockop::BlockState& s) { return blockop::state_norm(ctx, s); };
}

DistanceFn<blockop::BlockState> state_distance_fn(const derivative::Context& ctx) {
  return [ctx](const blockop::BlockState& s, const blockop::BlockState& r) {
    return blockop::state_norm(ctx, s - r);
  };
}

WaveReport wave_energy_run(const derivative::Context& ctx, const impedance1d::ImpedanceK& K,
                           const blockop::BlockState& initial, const SchemeConfig& cfg,
                           TrajectoryRecord<blockop::BlockState>* record) {
  const blockop::BlockRealization R = impedance1d::impedance_realization(ctx, K);
  TrajectoryRecord<blockop::BlockState> rec = evolve(block_resolvent(R), initial, cfg, state_norm_fn(ctx));
  WaveReport rep;
  for (double n : rec.norms) rep.energies.push_back(n * n);
  for (std::size_t k = 1; k < rep.energies.size(); ++k) {
    if (rep.energies[k] > rep.energies[k - 1] + cfg.tol * (1.0 + rep.energies[k - 1])) {
      rep.first_increase = k;
      break;
    }
  }
  if (record) *record = std::move(rec);
  return rep;
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<double>& times, const std::vector<double>& norms,
               const std::vector<double>* distances, const std::vector<double>* energies) {
  if (norms.size() != times.size() || (distances && distances->size() != times.size()) ||
      (energies && energies->size() != times.size())) {
    throw std::invalid_argument("column lengths differ");
  }
  os << "step,time,norm";
  if (distances) os << ",distance";
  if (energies) os << ",energy";
  os << '\n';
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << k << ',' << num(times[k]) << ',' << num(norms[k]);
    if (distances) os << ',' << num((*distances)[k]);
    if (energies) os << ',' << num((*energies)[k]);
    os << '\n';
  }
}

}  // namespace accretive::evolution
