#pragma once

#include "accretive/funcspace.hpp"
#include "accretive/relations.hpp"

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace accretive::derivative {

/// Maximal derivative on [a, b] with its deficiency-space constants.
class Context {
 public:
  explicit Context(Interval I);
  Context(double a, double b) : Context(Interval(a, b)) {}

  const Interval& interval() const { return I_; }
  double a() const { return I_.a(); }
  double b() const { return I_.b(); }

  /// e^{2b} - e^{2a}
  double plus_denominator() const { return plus_den_; }
  /// e^{-2a} - e^{-2b}
  double minus_denominator() const { return minus_den_; }
  /// e^{a+b}: the Lipschitz bound for admissible boundary functions.
  double lipschitz_bound() const { return I_.exp_a_plus_b(); }

 private:
  Interval I_;
  double plus_den_;
  double minus_den_;
};

enum class Kernel { OneMinusD, OnePlusD };  // ker(1 - ∂) ∋ e^t, ker(1 + ∂) ∋ e^{-t}

/// Scalar avatar g of the boundary contraction, h(c e^t) = g(c) e^{-t}.
struct BoundaryFunction {
  std::function<double(double)> g;
  double lipschitz_cert = 0.0;
  std::string description;

  double operator()(double c) const { return g(c); }

  static BoundaryFunction linear(double slope, double offset = 0.0);
  static BoundaryFunction scaled_sin(double amplitude);
  /// Piecewise-linear interpolation, constant extension outside the knots.
  static BoundaryFunction table(std::vector<double> knots, std::vector<double> values);
};

/// Restriction B ⊆ ∂ with dom(B) = {u : π₋₁u = h(π₁u)}.
class Realization {
 public:
  Realization(Context ctx, BoundaryFunction g);

  const Context& context() const { return ctx_; }
  const BoundaryFunction& g() const { return g_; }

  /// Certificate within e^{a+b}: the realisation is m-accretive.
  bool admissible() const { return admissible_; }

 private:
  Context ctx_;
  BoundaryFunction g_;
  bool admissible_;
};

ExpPoly kernel_element(const Context& ctx, Kernel which, double c);

double pi_plus_coeff(const Context& ctx, const ExpPoly& u);
double pi_minus_coeff(const Context& ctx, const ExpPoly& u);
ExpPoly pi_plus(const Context& ctx, const ExpPoly& u);
ExpPoly pi_minus(const Context& ctx, const ExpPoly& u);
ExpPoly pi_zero(const Context& ctx, const ExpPoly& u);

struct TransferReport {
  std::size_t samples = 0;
  double max_h_identity_defect = 0.0;   // |‖h(x)-h(y)‖² - closed form|
  double max_x_identity_defect = 0.0;   // |‖x-y‖² - closed form|
  double max_ratio = 0.0;               // max ‖h(x)-h(y)‖ / ‖x-y‖
  double min_ratio = 0.0;
  bool h_contractive = true;            // every sample has ratio <= 1
  bool g_within_bound = true;           // every sample has |g(c)-g(d)| <= e^{a+b}|c-d|
  bool equivalent = true;               // the two verdicts agree sample by sample
};

/// Compares the L2 contraction of h with the e^{a+b} bound on g over the
/// supplied (c, d) pairs.
TransferReport check_lipschitz_transfer(const Context& ctx, const BoundaryFunction& g,
                                        const std::vector<std::pair<double, double>>& samples);

/// Pairs (c, d) uniform in [-spread, spread]², with |c - d| >= 1e-3·spread.
std::vector<std::pair<double, double>> random_sample_pairs(Rng& rng, std::size_t n, double spread = 3.0);

bool in_domain(const Realization& R, const ExpPoly& u, double tol = 1e-9);

/// Particular solution of u + τ u' = f, term by term; τ may be negative. With
/// an interval, rates within min(2/|I|, 1/(2τ)) of -1/τ are first rebased onto -1/τ.
ExpPoly first_order_particular(const ExpPoly& f, double tau, const Interval* I = nullptr);

/// u with u + τ u' = f and u ∈ dom(B).
ExpPoly resolve(const Realization& R, const ExpPoly& f, double tau);

/// h(v) = π₋₁((1+B)^{-1}(2 v e^t)) as a coefficient.
double extract_h(const Realization& R, double v_coeff);

/// Boundary parameter of a linear realisation: c u(b) = u(a).
double linear_reduce(const Context& ctx, double g_scalar);
double linear_unreduce(const Context& ctx, double c);

struct AccretivityWitness {
  ExpPoly u;
  ExpPoly v;
  double pairing = 0.0;          // closed form
  double pairing_computed = 0.0; // via l2_inner
};

/// Two members of dom(B) whose pairing <Bu - Bv, u - v> is negative.
AccretivityWitness accretivity_witness(const Context& ctx, const BoundaryFunction& g, double c, double d);

struct MaximalityProbe {
  bool conclusive = false;
  std::optional<ExpPoly> witness;  // v ∈ dom(B)
  double pairing = 0.0;            // <u' - v', u - v>
  std::size_t probes_used = 0;
};

/// For u ∉ dom(B), searches v ∈ dom(B) with <u' - v', u - v> < 0, so no
/// accretive extension of B can contain u.
MaximalityProbe maximality_probe(const Realization& R, const ExpPoly& u, Rng& rng,
                                 std::size_t max_probes = 10000);

}  // namespace accretive::derivative
