#include "accretive/blockop.hpp"

#include "accretive/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace accretive::blockop {

namespace {

BDVector flip(const BDVector& x) { return {x.cp, -x.cm}; }

double residual_scale(const BoundaryData& d, const Context& ctx) {
  return 1.0 + bd_norm(ctx, d.u_bd) + bd_norm(ctx, d.dv_bd);
}

}  // namespace

ExpPoly BDVector::to_exppoly() const {
  return ExpPoly::exponential(1.0, cp) + ExpPoly::exponential(-1.0, cm);
}

Mat bd_gram(const Context& ctx) {
  Mat G = Mat::Zero(2, 2);
  G(0, 0) = ctx.plus_denominator();
  G(1, 1) = ctx.minus_denominator();
  return G;
}

Mat bd_l2_gram(const Context& ctx) {
  Mat G(2, 2);
  G(0, 0) = 0.5 * ctx.plus_denominator();
  G(1, 1) = 0.5 * ctx.minus_denominator();
  G(0, 1) = G(1, 0) = ctx.interval().length();
  return G;
}

InnerSpace bd_space(const Context& ctx) { return InnerSpace(bd_gram(ctx)); }

double bd_norm(const Context& ctx, const BDVector& x) {
  return std::sqrt(x.cp * x.cp * ctx.plus_denominator() + x.cm * x.cm * ctx.minus_denominator());
}

BDVector bd_project(const Context& ctx, const ExpPoly& u) {
  // The Gram is diagonal and, by parts, ⟨u, e^t⟩_{H1} = [u e^t]_a^b and
  // ⟨u, e^{-t}⟩_{H1} = -[u e^{-t}]_a^b.
  const Interval& I = ctx.interval();
  const double ua = u(I.a());
  const double ub = u(I.b());
  const double rp = ub * std::exp(I.b()) - ua * std::exp(I.a());
  const double rm = ua * std::exp(-I.a()) - ub * std::exp(-I.b());
  return {rp / ctx.plus_denominator(), rm / ctx.minus_denominator()};
}

BDVector g_bd(const BDVector& x) { return flip(x); }
BDVector d_bd(const BDVector& y) { return flip(y); }

BlockState apply_block(const BlockState& s) { return {differentiate(s.v), differentiate(s.u)}; }

double state_inner(const Context& ctx, const BlockState& l, const BlockState& r) {
  const Interval& I = ctx.interval();
  return l2_inner(l.u, r.u, I) + l2_inner(l.v, r.v, I);
}

double state_norm(const Context& ctx, const BlockState& s) {
  return std::hypot(l2_norm(s.u, ctx.interval()), l2_norm(s.v, ctx.interval()));
}

BoundaryData boundary_data(const Context& ctx, const BlockState& s) {
  return {bd_project(ctx, s.u), d_bd(bd_project(ctx, s.v))};
}

BlockState pi1_block(const Context& ctx, const BlockState& s) {
  const BDVector p = boundary_data(ctx, s).p();
  return {p.to_exppoly(), g_bd(p).to_exppoly()};
}

BlockState pi_minus1_block(const Context& ctx, const BlockState& s) {
  const BDVector q = boundary_data(ctx, s).q();
  return {q.to_exppoly(), (-1.0 * g_bd(q)).to_exppoly()};
}

BlockState pi0_block(const Context& ctx, const BlockState& s) {
  return s - pi1_block(ctx, s) - pi_minus1_block(ctx, s);
}

double kernel_norm(const Context& ctx, const KernelElement& x) {
  const Mat L = bd_l2_gram(ctx);
  const Vec a = x.first.coords();
  const Vec b = x.second.coords();
  return std::sqrt(std::max(0.0, a.dot(L * a) + b.dot(L * b)));
}

ContractionMap reduce_h_to_f(const Context& ctx, const KernelMap& h) {
  auto map = [h](const Vec& x) {
    const BDVector v = BDVector::from(x);
    return h({v, g_bd(v)}).first.coords();
  };
  return ContractionMap(bd_space(ctx), map, h.lipschitz_cert);
}

KernelMap lift_f_to_h(const ContractionMap& f) {
  KernelMap h;
  h.lipschitz_cert = f.lipschitz_cert();
  h.map = [f](const KernelElement& x) {
    const BDVector y = BDVector::from(f(x.first.coords()));
    return KernelElement{y, -1.0 * g_bd(y)};
  };
  return h;
}

BlockState make_state(const Context& ctx, const BoundaryData& data, const ExpPoly& core_u,
                      const ExpPoly& core_v) {
  const ExpPoly u0 = core_u - bd_project(ctx, core_u).to_exppoly();
  const ExpPoly v0 = core_v - bd_project(ctx, core_v).to_exppoly();
  return {u0 + data.u_bd.to_exppoly(), v0 + g_bd(data.dv_bd).to_exppoly()};
}

bool st_domain(const Context& ctx, const OperatorPair& P, const BlockState& s, double tol) {
  const BoundaryData d = boundary_data(ctx, s);
  const Vec x = d.u_bd.coords();
  const Vec w = d.dv_bd.coords();
  const Vec r = P.S * x - P.T * w;
  const double scale = 1.0 + P.codomain.norm(P.S * x) + P.codomain.norm(P.T * w);
  return P.codomain.norm(r) <= tol * scale;
}

// ---- realisation ---------------------------------------------------------

std::string kind_name(BlockRealization::Kind k) {
  switch (k) {
    case BlockRealization::Kind::Contraction: return "f";
    case BlockRealization::Kind::KernelMap: return "h";
    case BlockRealization::Kind::Relation: return "M";
    case BlockRealization::Kind::Pair: return "ST";
  }
  return "?";
}

namespace {

// Linear contraction from a matrix whose norm may exceed 1 by rounding only.
ContractionMap linear_contraction(const InnerSpace& X, const Mat& F) {
  const double n = X.operator_norm(F);
  if (n > 1.0 + 1e-9) throw std::logic_error("Cayley matrix is not a contraction");
  const Mat Fc = F;
  return ContractionMap(X, [Fc](const Vec& x) -> Vec { return Fc * x; }, std::min(n, 1.0));
}

Mat matrix_of(const VecMap& map, int n) {
  Mat out(n, n);
  for (int j = 0; j < n; ++j) out.col(j) = map(Vec::Unit(n, j));
  return out;
}

// f linear: M = {((1+F)s, (1-F)s)} and (S, T) = (1 - F, 1 + F).
void attach_linear_descriptions(const InnerSpace& X, const Mat& F, std::optional<LinearRelation>& M,
                                std::optional<OperatorPair>& pair) {
  const Mat I = Mat::Identity(2, 2);
  Mat basis(4, 2);
  basis << I + F, I - F;
  M.emplace(X, basis);
  pair.emplace(X, I - F, I + F);
}

}  // namespace

BlockRealization BlockRealization::from_contraction(const Context& ctx, ContractionMap f) {
  BlockRealization R(ctx, Kind::Contraction);
  R.m_accretive_ = true;
  R.h_ = lift_f_to_h(f);
  if (f.matrix()) attach_linear_descriptions(f.space(), *f.matrix(), R.M_, R.pair_);
  R.f_ = std::move(f);
  R.verify_consistency();
  return R;
}

BlockRealization BlockRealization::from_kernel_map(const Context& ctx, KernelMap h) {
  BlockRealization R(ctx, Kind::KernelMap);
  R.m_accretive_ = true;
  ContractionMap f = reduce_h_to_f(ctx, h);
  // A linear h is detected by probing: its reduction then has a matrix.
  const Mat F = matrix_of(f.map(), 2);
  Rng rng(0x5eed);
  bool linear = true;
  for (int i = 0; i < 4 && linear; ++i) {
    const Vec x = f.space().random_vector(rng);
    const Vec fx = f(x);
    linear = (fx - F * x).norm() <= 1e-12 * (1.0 + fx.norm() + (F * x).norm());
  }
  if (linear) attach_linear_descriptions(f.space(), F, R.M_, R.pair_);
  R.f_ = std::move(f);
  R.h_ = std::move(h);
  R.verify_consistency();
  return R;
}

BlockRealization BlockRealization::from_relation(const Context& ctx, LinearRelation M) {
  BlockRealization R(ctx, Kind::Relation);
  R.m_accretive_ = is_m_accretive_linear(M);
  R.pair_ = relation_to_pair(M);
  if (R.m_accretive_) {
    const Mat J = matrix_of(linear_resolvent(M), 2);
    const Mat F = 2.0 * J - Mat::Identity(2, 2);
    R.f_ = linear_contraction(M.space(), F);
    R.h_ = lift_f_to_h(*R.f_);
  }
  R.M_ = std::move(M);
  R.verify_consistency();
  return R;
}

BlockRealization BlockRealization::from_pair(const Context& ctx, OperatorPair P) {
  BlockRealization R(ctx, Kind::Pair);
  R.M_ = st_relation(P);
  R.m_accretive_ = st_criterion(P).holds;
  if (R.m_accretive_) {
    R.f_ = linear_contraction(P.domain, *st_cayley_matrix(P));
    R.h_ = lift_f_to_h(*R.f_);
  }
  R.pair_ = std::move(P);
  R.verify_consistency();
  return R;
}

std::optional<bool> BlockRealization::member_by_h(const BlockState& s, double tol) const {
  if (!h_) return std::nullopt;
  const BoundaryData d = boundary_data(ctx_, s);
  const BDVector p = d.p();
  const BDVector q = d.q();
  const KernelElement image = (*h_)({p, g_bd(p)});
  const KernelElement target{q, -1.0 * g_bd(q)};
  const KernelElement diff{image.first - target.first, image.second - target.second};
  return kernel_norm(ctx_, diff) <= tol * residual_scale(d, ctx_);
}

std::optional<bool> BlockRealization::member_by_f(const BlockState& s, double tol) const {
  if (!f_) return std::nullopt;
  const BoundaryData d = boundary_data(ctx_, s);
  const BDVector r = BDVector::from((*f_)(d.p().coords())) - d.q();
  return bd_norm(ctx_, r) <= tol * residual_scale(d, ctx_);
}

std::optional<bool> BlockRealization::member_by_relation(const BlockState& s, double tol) const {
  const BoundaryData d = boundary_data(ctx_, s);
  if (M_) return M_->contains(d.u_bd.coords(), d.dv_bd.coords(), tol);
  if (f_) return CayleyRelation{*f_, std::nullopt}.contains(d.u_bd.coords(), d.dv_bd.coords(), tol);
  return std::nullopt;
}

std::optional<bool> BlockRealization::member_by_pair(const BlockState& s, double tol) const {
  if (!pair_) return std::nullopt;
  return st_domain(ctx_, *pair_, s, tol);
}

bool BlockRealization::contains(const BlockState& s, double tol) const {
  switch (kind_) {
    case Kind::Contraction: return *member_by_f(s, tol);
    case Kind::KernelMap: return *member_by_h(s, tol);
    case Kind::Relation: return *member_by_relation(s, tol);
    case Kind::Pair: return *member_by_pair(s, tol);
  }
  return false;
}

BoundaryData BlockRealization::random_member_data(Rng& rng) const {
  const InnerSpace X = bd_space(ctx_);
  if (kind_ == Kind::Relation || kind_ == Kind::Pair) {
    const auto [x, w] = M_->random_member(rng);
    return {BDVector::from(x), BDVector::from(w)};
  }
  const Vec p = X.random_vector(rng);
  const Vec q = kind_ == Kind::KernelMap ? (*h_)({BDVector::from(p), g_bd(BDVector::from(p))}).first.coords()
                                         : (*f_)(p);
  return {BDVector::from(p + q), BDVector::from(p - q)};
}

void BlockRealization::verify_consistency() const {
  Rng rng(20240601);
  std::normal_distribution<double> nd;
  const InnerSpace X = bd_space(ctx_);
  for (int i = 0; i < 20; ++i) {
    BoundaryData d;
    if (i % 2 == 0) {
      d = random_member_data(rng);
    } else {
      d = {BDVector::from(X.random_vector(rng)), BDVector::from(X.random_vector(rng))};
    }
    const ExpPoly core = ExpPoly::monomial(0.0, 2, nd(rng)) + ExpPoly::exponential(2.0, nd(rng));
    const BlockState s = make_state(ctx_, d, core, differentiate(core));
    const bool ref = contains(s, 1e-9);
    for (const auto& m : {member_by_h(s, 1e-9), member_by_f(s, 1e-9), member_by_relation(s, 1e-9),
                          member_by_pair(s, 1e-9)}) {
      if (m && *m != ref) throw std::logic_error("inconsistent realisation descriptions");
    }
  }
}

// ---- resolvent -----------------------------------------------------------

ExpPoly second_order_particular(const ExpPoly& f, double tau, const Interval* I) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  // 1 - τ²D² = (1 + τD)(1 - τD), so the solution is the mean of two first-order ones.
  const ExpPoly plus = derivative::first_order_particular(f, tau, I);
  const ExpPoly minus = derivative::first_order_particular(f, -tau, I);
  for (const ExpPoly* g : {&plus, &minus})
    for (const Term& t : g->terms())
      for (double c : t.coeffs)
        if (!std::isfinite(c)) throw DegenerateRate("non-finite particular solution");
  return 0.5 * (plus + minus);
}

namespace {

constexpr std::size_t kMaxIterations = 500;

struct AffineBoundary {
  // p(z) = p0 + P z, q(z) = q0 + Q z and likewise for (u_BD, D v_BD).
  Vec p0, q0, u0, w0;
  Mat P, Q, U, W;
};

}  // namespace

BlockState block_resolve(const BlockRealization& R, const BlockState& rhs, double tau,
                         BlockResolveInfo* info) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  const Context& ctx = R.context();
  const Interval& I = ctx.interval();

  const ExpPoly r = rhs.u - tau * differentiate(rhs.v);
  const ExpPoly up = second_order_particular(r, tau, &I);
  const ExpPoly vp = rhs.v - tau * differentiate(up);

  // Homogeneous u: e^{(t-b)/τ} and e^{-(t-a)/τ}; the matching v is -τu'.
  const double k = 1.0 / tau;
  const ExpPoly hp = ExpPoly::exponential(k, std::exp(-k * I.b()));
  const ExpPoly hm = ExpPoly::exponential(-k, std::exp(k * I.a()));
  const ExpPoly hp_v = -1.0 * hp;
  const ExpPoly hm_v = hm;

  AffineBoundary A;
  A.u0 = bd_project(ctx, up).coords();
  A.w0 = d_bd(bd_project(ctx, vp)).coords();
  A.U.resize(2, 2);
  A.W.resize(2, 2);
  A.U.col(0) = bd_project(ctx, hp).coords();
  A.U.col(1) = bd_project(ctx, hm).coords();
  A.W.col(0) = d_bd(bd_project(ctx, hp_v)).coords();
  A.W.col(1) = d_bd(bd_project(ctx, hm_v)).coords();
  A.p0 = 0.5 * (A.u0 + A.w0);
  A.q0 = 0.5 * (A.u0 - A.w0);
  A.P = 0.5 * (A.U + A.W);
  A.Q = 0.5 * (A.U - A.W);

  BlockResolveInfo local;
  Vec z = Vec::Zero(2);

  const std::optional<Mat> F = R.f() && R.f()->matrix() ? R.f()->matrix() : std::nullopt;
  if (R.kind() == BlockRealization::Kind::Relation || R.kind() == BlockRealization::Kind::Pair || F) {
    // Linear boundary condition: S(u0 + Uz) = T(w0 + Wz) or F(p) = q.
    Mat L;
    Vec b;
    if (F && (R.kind() == BlockRealization::Kind::Contraction || R.kind() == BlockRealization::Kind::KernelMap)) {
      L = *F * A.P - A.Q;
      b = A.q0 - *F * A.p0;
    } else {
      const OperatorPair& P = *R.pair();
      Mat S = P.S, T = P.T;
      if (S.rows() > 2) {
        // Replace the rows of [S, -T] by an orthonormal basis of their span, so a
        // consistent but ill-conditioned system is not judged by least squares.
        Mat ST(S.rows(), 4);
        ST << S, -T;
        Eigen::JacobiSVD<Mat> svd(ST, Eigen::ComputeFullV);
        const auto& sv = svd.singularValues();
        Eigen::Index r = 0;
        while (r < sv.size() && sv(r) > 1e-12 * sv(0)) ++r;
        if (r == 2) {
          const Mat basis = svd.matrixV().leftCols(2).transpose();
          S = basis.leftCols(2);
          T = -basis.rightCols(2);
        }
      }
      L = S * A.U - T * A.W;
      b = T * A.w0 - S * A.u0;
    }
    Eigen::CompleteOrthogonalDecomposition<Mat> cod(L);
    cod.setThreshold(1e-12);
    if (cod.rank() < 2) throw RootNotFound("boundary system of the resolvent is singular");
    z = cod.solve(b);
    const double res = (L * z - b).norm();
    if (res > 1e-9 * (1.0 + b.norm() + L.norm() * z.norm())) {
      throw RootNotFound("boundary system of the resolvent has no solution");
    }
    local.boundary_residual = res;
  } else {
    // w = f(p0 + P z) - q0 with z = Q^{-1} w; in w the map is a strict contraction.
    const ContractionMap& f = *R.f();
    const InnerSpace X = bd_space(ctx);
    Eigen::FullPivLU<Mat> Qlu(A.Q);
    if (!Qlu.isInvertible()) throw RootNotFound("degenerate homogeneous boundary data");
    const Mat PQinv = A.P * Qlu.inverse();
    auto phi = [&](const Vec& w) -> Vec { return f(A.p0 + PQinv * w) - A.q0; };
    const double kappa = X.operator_norm(PQinv) * f.lipschitz_cert();
    const double theta = kappa > 0.95 ? 0.5 : 1.0;
    local.damped = theta < 1.0;

    Vec w = A.Q * z;
    bool converged = false;
    std::size_t it = 0;
    for (; it < kMaxIterations / 2; ++it) {
      const Vec next = (1.0 - theta) * w + theta * phi(w);
      const double step = X.norm(next - w);
      w = next;
      if (step <= 1e-14 * (1.0 + X.norm(w))) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      // Broyden on F(w) = phi(w) - w.
      local.secant_fallback = true;
      Mat B = -Mat::Identity(2, 2);
      Vec Fw = phi(w) - w;
      for (; it < kMaxIterations; ++it) {
        if (X.norm(Fw) <= 1e-13 * (1.0 + X.norm(w))) {
          converged = true;
          break;
        }
        const Vec dw = -B.fullPivLu().solve(Fw);
        if (!dw.allFinite()) break;
        const Vec wn = w + dw;
        const Vec Fn = phi(wn) - wn;
        const Vec dF = Fn - Fw;
        const double denom = dw.squaredNorm();
        if (denom == 0.0) break;
        B += (dF - B * dw) * dw.transpose() / denom;
        w = wn;
        Fw = Fn;
      }
    }
    if (!converged) throw RootNotFound("boundary fixed point did not converge in 500 iterations");
    local.iterations = it;
    z = Qlu.solve(w);
    local.boundary_residual = X.norm(f(A.p0 + A.P * z) - (A.q0 + A.Q * z));
  }

  BlockState out{up + z(0) * hp + z(1) * hm, vp + z(0) * hp_v + z(1) * hm_v};
  if (info) *info = local;
  return out;
}

}  // namespace accretive::blockop
