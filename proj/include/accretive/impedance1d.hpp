#pragma once

#include "accretive/blockop.hpp"

namespace accretive::impedance1d {

using blockop::BDVector;
using blockop::BlockRealization;
using blockop::BlockState;
using derivative::Context;

/// Boundary values on Γ = {a, b}; L2(Γ) is ℝ² with counting measure.
struct TraceVector {
  double at_a = 0.0;
  double at_b = 0.0;

  Vec coords() const {
    Vec y(2);
    y << at_a, at_b;
    return y;
  }
  static TraceVector from(const Vec& y) { return {y(0), y(1)}; }
};

TraceVector gamma0(const Context& ctx, const ExpPoly& f);
/// Normal trace with outward normals -1 at a and +1 at b.
TraceVector gammaN(const Context& ctx, const ExpPoly& phi);

/// Rows are endpoint evaluations of (e^t, e^{-t}).
Mat endpoint_matrix(const Context& ctx);
/// κ* as a 2×2 matrix, Gram^{-1} Eᵀ.
Mat kappa_adjoint_matrix(const Context& ctx);

TraceVector kappa(const Context& ctx, const BDVector& x);
BDVector kappa_adjoint(const Context& ctx, const TraceVector& y);

/// Norm in the renormed trace space: the BD norm of the BD function with these endpoint values.
double trace_norm(const Context& ctx, const TraceVector& y);

struct ImpedanceK {
  Mat K;
  explicit ImpedanceK(Mat k);
};

/// κ* K κ on BD(grad).
Mat boundary_operator(const Context& ctx, const ImpedanceK& K);

/// K γ₀ f = γₙ Φ for s = (f, Φ).
bool impedance_condition(const Context& ctx, const ImpedanceK& K, const BlockState& s, double tol = 1e-9);

/// M = graph(κ* K κ); the trace condition is cross-checked against the BD
/// description at 20 random states.
BlockRealization impedance_realization(const Context& ctx, const ImpedanceK& K);

/// K + Kᵀ positive semidefinite.
bool is_K_accretive(const ImpedanceK& K);

/// <C s, s> in H0 × H1, computed from the ExpPoly components.
double block_pairing(const Context& ctx, const BlockState& s);
/// <K γ₀ f, γ₀ f>.
double trace_energy(const Context& ctx, const ImpedanceK& K, const BlockState& s);

/// Member of dom(C) with u_BD = x and random H0 parts.
BlockState random_member(const Context& ctx, const ImpedanceK& K, const BDVector& x, Rng& rng);

struct EquivalenceReport {
  bool accretive_K = false;
  bool realisation_accretive_sampled = false;
  bool resolvent_solvable = false;
  double min_pairing = 0.0;         // smallest sampled normalised pairing
  double max_energy_defect = 0.0;   // |<Cs,s> - <Kγ₀f,γ₀f>| over the samples
  double max_resolve_residual = 0.0;
  bool agrees() const { return accretive_K == (realisation_accretive_sampled && resolvent_solvable); }
};

/// Sampled accretivity over `pairs` member pairs whose trace differences
/// sweep a grid of directions, plus solvability of (1 + τC) on `rhs_count`
/// random right-hand sides.
EquivalenceReport check_equivalence(const Context& ctx, const ImpedanceK& K, Rng& rng, std::size_t pairs = 1000,
                                    std::size_t rhs_count = 20, double tau = 1.0);

}  // namespace accretive::impedance1d
