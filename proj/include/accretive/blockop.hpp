#pragma once

#include "accretive/derivative.hpp"
#include "accretive/funcspace.hpp"
#include "accretive/relations.hpp"

#include <functional>
#include <optional>
#include <string>

namespace accretive::blockop {

using derivative::Context;

/// cp e^t + cm e^{-t}; an element of BD(G) = BD(D) = span{e^t, e^{-t}}.
struct BDVector {
  double cp = 0.0;
  double cm = 0.0;

  Vec coords() const {
    Vec x(2);
    x << cp, cm;
    return x;
  }
  static BDVector from(const Vec& x) { return {x(0), x(1)}; }
  ExpPoly to_exppoly() const;

  friend BDVector operator+(BDVector l, BDVector r) { return {l.cp + r.cp, l.cm + r.cm}; }
  friend BDVector operator-(BDVector l, BDVector r) { return {l.cp - r.cp, l.cm - r.cm}; }
  friend BDVector operator*(double s, BDVector x) { return {s * x.cp, s * x.cm}; }
};

/// diag(e^{2b} - e^{2a}, e^{-2a} - e^{-2b}): the H1 Gram of (e^t, e^{-t}).
Mat bd_gram(const Context& ctx);
/// L2 Gram of (e^t, e^{-t}).
Mat bd_l2_gram(const Context& ctx);
InnerSpace bd_space(const Context& ctx);
double bd_norm(const Context& ctx, const BDVector& x);

/// H1-orthogonal projection onto BD(G) via the 2×2 Gram solve, with the
/// right-hand side reduced to endpoint values.
BDVector bd_project(const Context& ctx, const ExpPoly& u);

/// G_BD and D_BD act on coefficients as (cp, cm) ↦ (cp, -cm).
BDVector g_bd(const BDVector& x);
BDVector d_bd(const BDVector& y);

/// (u, v) ∈ dom(A) = H1 × H1.
struct BlockState {
  ExpPoly u;
  ExpPoly v;

  friend BlockState operator+(const BlockState& l, const BlockState& r) { return {l.u + r.u, l.v + r.v}; }
  friend BlockState operator-(const BlockState& l, const BlockState& r) { return {l.u - r.u, l.v - r.v}; }
  friend BlockState operator*(double s, const BlockState& x) { return {s * x.u, s * x.v}; }
};

/// A(u, v) = (D v, G u) = (v', u').
BlockState apply_block(const BlockState& s);
double state_inner(const Context& ctx, const BlockState& l, const BlockState& r);
double state_norm(const Context& ctx, const BlockState& s);

/// BD data of a state: u_BD and D v_BD, and the Cayley coordinates
/// p = ½(u_BD + D v_BD), q = ½(u_BD - D v_BD).
struct BoundaryData {
  BDVector u_bd;
  BDVector dv_bd;
  BDVector p() const { return 0.5 * (u_bd + dv_bd); }
  BDVector q() const { return 0.5 * (u_bd - dv_bd); }
};
BoundaryData boundary_data(const Context& ctx, const BlockState& s);

BlockState pi1_block(const Context& ctx, const BlockState& s);
BlockState pi_minus1_block(const Context& ctx, const BlockState& s);
BlockState pi0_block(const Context& ctx, const BlockState& s);

/// Element (x, y) of ker(1 - A) (y = G x) or ker(1 + A) (y = -G x).
struct KernelElement {
  BDVector first;
  BDVector second;
  BlockState to_state() const { return {first.to_exppoly(), second.to_exppoly()}; }
};

/// h : ker(1 - A) → ker(1 + A) with a Lipschitz certificate in H0 × H1.
struct KernelMap {
  std::function<KernelElement(const KernelElement&)> map;
  double lipschitz_cert = 1.0;
  KernelElement operator()(const KernelElement& x) const { return map(x); }
};

/// f(x) = first component of h(x, G x).
ContractionMap reduce_h_to_f(const Context& ctx, const KernelMap& h);
/// h(x, ·) = (f(x), -G f(x)).
KernelMap lift_f_to_h(const ContractionMap& f);

/// H0 × H1 norm of a kernel element from the L2 Gram.
double kernel_norm(const Context& ctx, const KernelElement& x);

/// Restriction C ⊆ A, stored in the description it was built from; the
/// other descriptions are derived through the Cayley formulas when they exist.
class BlockRealization {
 public:
  enum class Kind { Contraction, KernelMap, Relation, Pair };

  static BlockRealization from_contraction(const Context& ctx, ContractionMap f);
  static BlockRealization from_kernel_map(const Context& ctx, KernelMap h);
  static BlockRealization from_relation(const Context& ctx, LinearRelation M);
  static BlockRealization from_pair(const Context& ctx, OperatorPair P);

  Kind kind() const { return kind_; }
  const Context& context() const { return ctx_; }
  bool m_accretive() const { return m_accretive_; }

  const std::optional<ContractionMap>& f() const { return f_; }
  const std::optional<KernelMap>& h() const { return h_; }
  const std::optional<LinearRelation>& relation() const { return M_; }
  const std::optional<OperatorPair>& pair() const { return pair_; }

  /// Membership tests per description; nullopt when that description does not exist.
  std::optional<bool> member_by_h(const BlockState& s, double tol = 1e-9) const;
  std::optional<bool> member_by_f(const BlockState& s, double tol = 1e-9) const;
  std::optional<bool> member_by_relation(const BlockState& s, double tol = 1e-9) const;
  std::optional<bool> member_by_pair(const BlockState& s, double tol = 1e-9) const;

  /// Member test through the supplied description.
  bool contains(const BlockState& s, double tol = 1e-9) const;

  /// Boundary data (u_BD, D v_BD) of a member built from a random point of
  /// the supplied description.
  BoundaryData random_member_data(Rng& rng) const;

 private:
  BlockRealization(const Context& ctx, Kind kind) : ctx_(ctx), kind_(kind) {}
  void verify_consistency() const;

  Context ctx_;
  Kind kind_;
  bool m_accretive_ = false;
  std::optional<ContractionMap> f_;
  std::optional<KernelMap> h_;
  std::optional<LinearRelation> M_;
  std::optional<OperatorPair> pair_;
};

std::string kind_name(BlockRealization::Kind k);

/// State with prescribed (u_BD, D v_BD) plus H0¹ parts taken from the
/// projections of `core_u`, `core_v`.
BlockState make_state(const Context& ctx, const BoundaryData& data, const ExpPoly& core_u = {},
                      const ExpPoly& core_v = {});

/// Realization of (S, T) on BD(G): S u_BD = T D v_BD.
bool st_domain(const Context& ctx, const OperatorPair& P, const BlockState& s, double tol = 1e-9);

/// Particular solution of u - τ² u'' = f as the mean of the solutions of
/// u ± τ u' = f.
ExpPoly second_order_particular(const ExpPoly& f, double tau, const Interval* I = nullptr);

struct BlockResolveInfo {
  std::size_t iterations = 0;
  bool damped = false;
  bool secant_fallback = false;
  double boundary_residual = 0.0;
};

/// (u, v) with u + τ D v = f₁, v + τ G u = f₂ and (u, v) ∈ dom(C).
/// Throws RootNotFound when the boundary system has no (unique) solution or
/// the nonlinear iteration does not converge in 500 steps.
BlockState block_resolve(const BlockRealization& R, const BlockState& rhs, double tau,
                         BlockResolveInfo* info = nullptr);

}  // namespace accretive::blockop
