#include "accretive/impedance1d.hpp"

#include "accretive/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace accretive::impedance1d {

using blockop::BoundaryData;

TraceVector gamma0(const Context& ctx, const ExpPoly& f) { return {f(ctx.a()), f(ctx.b())}; }

TraceVector gammaN(const Context& ctx, const ExpPoly& phi) { return {-phi(ctx.a()), phi(ctx.b())}; }

Mat endpoint_matrix(const Context& ctx) {
  const Interval& I = ctx.interval();
  Mat E(2, 2);
  E << I.exp_a(), I.exp_neg_a(), I.exp_b(), I.exp_neg_b();
  return E;
}

Mat kappa_adjoint_matrix(const Context& ctx) {
  return blockop::bd_gram(ctx).ldlt().solve(endpoint_matrix(ctx).transpose());
}

TraceVector kappa(const Context& ctx, const BDVector& x) {
  return TraceVector::from(endpoint_matrix(ctx) * x.coords());
}

BDVector kappa_adjoint(const Context& ctx, const TraceVector& y) {
  return BDVector::from(kappa_adjoint_matrix(ctx) * y.coords());
}

double trace_norm(const Context& ctx, const TraceVector& y) {
  return blockop::bd_norm(ctx, BDVector::from(endpoint_matrix(ctx).partialPivLu().solve(y.coords())));
}

ImpedanceK::ImpedanceK(Mat k) : K(std::move(k)) {
  if (K.rows() != 2 || K.cols() != 2) throw std::invalid_argument("K must be 2x2");
  if (!K.allFinite()) throw std::invalid_argument("K must be finite");
}

Mat boundary_operator(const Context& ctx, const ImpedanceK& K) {
  return kappa_adjoint_matrix(ctx) * K.K * endpoint_matrix(ctx);
}

bool impedance_condition(const Context& ctx, const ImpedanceK& K, const BlockState& s, double tol) {
  const Vec lhs = K.K * gamma0(ctx, s.u).coords();
  const Vec rhs = gammaN(ctx, s.v).coords();
  return (lhs - rhs).norm() <= tol * (1.0 + lhs.norm() + rhs.norm());
}

bool is_K_accretive(const ImpedanceK& K) {
  const Mat sym = K.K + K.K.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  return es.eigenvalues().minCoeff() >= -1e-10;
}

double block_pairing(const Context& ctx, const BlockState& s) {
  return blockop::state_inner(ctx, blockop::apply_block(s), s);
}

double trace_energy(const Context& ctx, const ImpedanceK& K, const BlockState& s) {
  const Vec y = gamma0(ctx, s.u).coords();
  return y.dot(K.K * y);
}

namespace {

ExpPoly random_core(Rng& rng) {
  std::normal_distribution<double> nd;
  return ExpPoly::monomial(0.0, 2, nd(rng)) + ExpPoly::exponential(2.0, nd(rng)) +
         ExpPoly::monomial(-1.0, 1, nd(rng));
}

}  // namespace

BlockState random_member(const Context& ctx, const ImpedanceK& K, const BDVector& x, Rng& rng) {
  const BDVector dv = BDVector::from(boundary_operator(ctx, K) * x.coords());
  return blockop::make_state(ctx, BoundaryData{x, dv}, random_core(rng), random_core(rng));
}

BlockRealization impedance_realization(const Context& ctx, const ImpedanceK& K) {
  const InnerSpace X = blockop::bd_space(ctx);
  BlockRealization R = BlockRealization::from_relation(ctx, LinearRelation::graph(X, boundary_operator(ctx, K)));
  Rng rng(77);
  for (int i = 0; i < 20; ++i) {
    BlockState s;
    if (i % 2 == 0) {
      s = random_member(ctx, K, BDVector::from(X.random_vector(rng)), rng);
    } else {
      const BoundaryData d{BDVector::from(X.random_vector(rng)), BDVector::from(X.random_vector(rng))};
      s = blockop::make_state(ctx, d, random_core(rng), random_core(rng));
    }
    if (impedance_condition(ctx, K, s, 1e-9) != R.contains(s, 1e-9)) {
      throw std::logic_error("trace and BD descriptions of the impedance condition disagree");
    }
  }
  return R;
}

EquivalenceReport check_equivalence(const Context& ctx, const ImpedanceK& K, Rng& rng, std::size_t pairs,
                                    std::size_t rhs_count, double tau) {
  EquivalenceReport rep;
  rep.accretive_K = is_K_accretive(K);
  const BlockRealization R = impedance_realization(ctx, K);
  const InnerSpace X = blockop::bd_space(ctx);
  const Mat Einv = endpoint_matrix(ctx).inverse();
  std::uniform_real_distribution<double> mag(0.5, 2.0);
  std::uniform_real_distribution<double> jitter(0.0, 1.0);

  rep.min_pairing = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pairs; ++j) {
    // Trace direction of s - s̄ on a stratified grid over the half circle.
    const double theta = std::numbers::pi * (static_cast<double>(j) + jitter(rng)) / static_cast<double>(pairs);
    Vec y(2);
    y << std::cos(theta), std::sin(theta);
    y *= mag(rng);
    const BlockState sb = random_member(ctx, K, BDVector::from(X.random_vector(rng)), rng);
    const BlockState d = random_member(ctx, K, BDVector::from(Einv * y), rng);
    const BlockState s = sb + d;
    const BlockState diff = s - sb;
    const double pairing = blockop::state_inner(ctx, blockop::apply_block(s) - blockop::apply_block(sb), diff);
    const double yy = gamma0(ctx, diff.u).coords().squaredNorm();
    rep.min_pairing = std::min(rep.min_pairing, pairing / yy);
    const double energy_defect = std::abs(block_pairing(ctx, d) - trace_energy(ctx, K, d));
    rep.max_energy_defect = std::max(rep.max_energy_defect, energy_defect);
  }
  rep.realisation_accretive_sampled = rep.min_pairing >= -1e-9;

  rep.resolvent_solvable = true;
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < rhs_count && rep.resolvent_solvable; ++i) {
    const BlockState rhs{ExpPoly::constant(nd(rng)) + ExpPoly::monomial(0.0, 1, nd(rng)) +
                             ExpPoly::exponential(0.5, nd(rng)),
                         ExpPoly::exponential(-2.0, nd(rng)) + ExpPoly::monomial(0.0, 2, nd(rng))};
    try {
      const BlockState out = blockop::block_resolve(R, rhs, tau);
      const Interval& I = ctx.interval();
      const double r1 = l2_norm(out.u + tau * differentiate(out.v) - rhs.u, I);
      const double r2 = l2_norm(out.v + tau * differentiate(out.u) - rhs.v, I);
      const double scale = 1.0 + blockop::state_norm(ctx, rhs) + blockop::state_norm(ctx, out);
      const double res = (r1 + r2) / scale;
      rep.max_resolve_residual = std::max(rep.max_resolve_residual, res);
      if (res > 1e-9 || !impedance_condition(ctx, K, out, 1e-8)) rep.resolvent_solvable = false;
    } catch (const RootNotFound&) {
      rep.resolvent_solvable = false;
    }
  }
  return rep;
}

}  // namespace accretive::impedance1d
