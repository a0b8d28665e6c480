#include "accretive/relations.hpp"

#include "accretive/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace accretive {

namespace detail {

int numerical_rank(const Mat& A, double rel_tol) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(A);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double thr = rel_tol * s(0);
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return r;
}

Mat null_space(const Mat& A, double rel_tol) {
  const auto n = A.cols();
  if (A.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double thr = s.size() > 0 ? rel_tol * s(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > thr && s(i) > 0.0) ++r;
  return svd.matrixV().rightCols(n - r);
}

}  // namespace detail

namespace {

Mat orthonormalise(const Mat& B) {
  if (B.cols() == 0) return Mat(B.rows(), 0);
  Eigen::HouseholderQR<Mat> qr(B);
  return qr.householderQ() * Mat::Identity(B.rows(), B.cols());
}

}  // namespace

// ---------------------------------------------------------------------------

InnerSpace::InnerSpace(Mat gram) : gram_(std::move(gram)) {
  if (gram_.rows() == 0 || gram_.rows() != gram_.cols()) {
    throw std::invalid_argument("InnerSpace: gram must be square and non-empty");
  }
  if ((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * gram_.cwiseAbs().maxCoeff()) {
    throw std::invalid_argument("InnerSpace: gram is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eig(gram_);
  const auto& ev = eig.eigenvalues();
  if (!(ev(0) > 1e-12 * ev(ev.size() - 1))) {
    throw std::invalid_argument("InnerSpace: gram is not positive definite");
  }
  chol_upper_ = Eigen::LLT<Mat>(gram_).matrixU();
}

InnerSpace InnerSpace::euclidean(int dim) { return InnerSpace(Mat::Identity(dim, dim)); }

double InnerSpace::norm(const Vec& x) const { return std::sqrt(std::max(0.0, inner(x, x))); }

double InnerSpace::operator_norm(const Mat& F) const {
  // |x|_G = |R x|₂, so |F|_G = |R F R^{-1}|₂.
  const Mat RF = chol_upper_ * F;
  const Mat W = chol_upper_.transpose().triangularView<Eigen::Lower>().solve(RF.transpose()).transpose();
  Eigen::JacobiSVD<Mat> svd(W);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

Vec InnerSpace::random_vector(Rng& rng) const {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec x(dim());
  for (int i = 0; i < dim(); ++i) x(i) = N(rng);
  return x;
}

// ---------------------------------------------------------------------------

LinearRelation::LinearRelation(InnerSpace space, Mat basis)
    : space_(std::move(space)), basis_(std::move(basis)) {
  if (basis_.rows() != 2 * space_.dim()) {
    throw std::invalid_argument("LinearRelation: basis must have 2·dim rows");
  }
  if (detail::numerical_rank(basis_) != basis_.cols()) {
    throw std::invalid_argument("LinearRelation: basis vectors are linearly dependent");
  }
  orthonormal_ = orthonormalise(basis_);
}

LinearRelation LinearRelation::graph(const InnerSpace& space, const Mat& F) {
  const int n = space.dim();
  Mat B(2 * n, n);
  B.topRows(n) = Mat::Identity(n, n);
  B.bottomRows(n) = F;
  return LinearRelation(space, B);
}

LinearRelation LinearRelation::vertical(const InnerSpace& space) {
  const int n = space.dim();
  Mat B = Mat::Zero(2 * n, n);
  B.bottomRows(n) = Mat::Identity(n, n);
  return LinearRelation(space, B);
}

bool LinearRelation::contains(const Vec& u, const Vec& v, double tol) const {
  Vec w(2 * space_.dim());
  w << u, v;
  const Vec r = w - orthonormal_ * (orthonormal_.transpose() * w);
  return r.norm() <= tol * (1.0 + w.norm());
}

bool LinearRelation::same_subspace(const LinearRelation& other, double tol) const {
  if (other.dim() != dim() || other.space_.dim() != space_.dim()) return false;
  const Mat P = orthonormal_ * orthonormal_.transpose();
  const Mat Q = other.orthonormal_ * other.orthonormal_.transpose();
  return (P - Q).norm() <= tol;
}

std::pair<Vec, Vec> LinearRelation::random_member(Rng& rng) const {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec alpha(dim());
  for (int i = 0; i < dim(); ++i) alpha(i) = N(rng);
  const Vec w = basis_ * alpha;
  const int n = space_.dim();
  return {w.head(n), w.tail(n)};
}

// ---------------------------------------------------------------------------

ContractionMap::ContractionMap(InnerSpace space, VecMap map, double lipschitz_cert)
    : space_(std::move(space)), map_(std::move(map)), cert_(lipschitz_cert) {
  if (!map_) throw std::invalid_argument("ContractionMap: empty map");
  if (!(cert_ >= 0.0) || cert_ > 1.0 + kCertSlack) {
    throw std::invalid_argument("ContractionMap: Lipschitz certificate " + std::to_string(cert_) +
                                " exceeds 1");
  }
}

ContractionMap ContractionMap::linear(InnerSpace space, const Mat& F) {
  if (F.rows() != space.dim() || F.cols() != space.dim()) {
    throw std::invalid_argument("ContractionMap::linear: shape mismatch");
  }
  const double nrm = space.operator_norm(F);
  ContractionMap m(std::move(space), [F](const Vec& x) -> Vec { return F * x; }, nrm);
  m.matrix_ = F;
  return m;
}

LipschitzSample sample_lipschitz(const InnerSpace& space, const VecMap& f, double bound, Rng& rng,
                                 std::size_t pairs, double abs_tol) {
  LipschitzSample out;
  out.samples = pairs;
  std::uniform_real_distribution<double> scale_dist(-3.0, 3.0);
  for (std::size_t i = 0; i < pairs; ++i) {
    // mix of global and nearby pairs
    const Vec x = std::pow(10.0, scale_dist(rng) / 3.0) * space.random_vector(rng);
    const Vec y = x + std::pow(10.0, scale_dist(rng)) * space.random_vector(rng);
    const double dx = space.norm(x - y);
    const double df = space.norm(f(x) - f(y));
    if (dx > 0.0) out.max_ratio = std::max(out.max_ratio, df / dx);
    if (df > bound * dx + abs_tol) ++out.violations;
  }
  return out;
}

// ---------------------------------------------------------------------------

double NormDescriptor::norm(const Vec& y) const {
  switch (kind) {
    case Kind::Euclidean: return y.norm();
    case Kind::Gram: return std::sqrt(std::max(0.0, y.dot(gram * y)));
    case Kind::L1: return y.lpNorm<1>();
    case Kind::LInf: return y.size() ? y.lpNorm<Eigen::Infinity>() : 0.0;
  }
  return y.norm();
}

std::string NormDescriptor::name(Kind k) {
  switch (k) {
    case Kind::Euclidean: return "euclidean";
    case Kind::Gram: return "gram";
    case Kind::L1: return "l1";
    case Kind::LInf: return "linf";
  }
  return "euclidean";
}

OperatorPair::OperatorPair(InnerSpace domain_space, Mat S_, Mat T_, NormDescriptor codomain_norm)
    : domain(std::move(domain_space)), S(std::move(S_)), T(std::move(T_)), codomain(std::move(codomain_norm)) {
  if (S.rows() != T.rows() || S.cols() != T.cols()) {
    throw std::invalid_argument("OperatorPair: S and T must have identical shapes");
  }
  if (S.cols() != domain.dim()) {
    throw std::invalid_argument("OperatorPair: column count must equal dim(X)");
  }
  if (codomain.kind == NormDescriptor::Kind::Gram &&
      (codomain.gram.rows() != S.rows() || codomain.gram.cols() != S.rows())) {
    throw std::invalid_argument("OperatorPair: codomain gram has wrong shape");
  }
}

// ---------------------------------------------------------------------------

double accretivity_margin(const LinearRelation& M) {
  if (M.dim() == 0) return 0.0;
  const Mat Q = orthonormalise(M.basis());
  const int n = M.space().dim();
  const Mat U = Q.topRows(n);
  const Mat V = Q.bottomRows(n);
  const Mat P = U.transpose() * M.space().gram() * V;
  const Mat sym = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  return eig.eigenvalues()(0);
}

bool is_accretive_linear(const LinearRelation& M) {
  if (M.dim() == 0) return true;
  const Mat Q = orthonormalise(M.basis());
  const int n = M.space().dim();
  const Mat P = Q.topRows(n).transpose() * M.space().gram() * Q.bottomRows(n);
  const Mat sym = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  const auto& ev = eig.eigenvalues();
  const double scale = std::max(M.space().gram().norm(), ev.cwiseAbs().maxCoeff());
  return ev(0) >= -1e-10 * scale;
}

bool is_m_accretive_linear(const LinearRelation& M) {
  if (!is_accretive_linear(M)) return false;
  const Mat sum = M.first() + M.second();
  return detail::numerical_rank(sum) == M.space().dim();
}

// ---------------------------------------------------------------------------

bool CayleyRelation::contains(const Vec& u, const Vec& v, double tol) const {
  const Vec s = 0.5 * (u + v);
  const Vec d = 0.5 * (u - v);
  const auto& X = f.space();
  return X.norm(f(s) - d) <= tol * (1.0 + X.norm(u) + X.norm(v));
}

std::pair<Vec, Vec> CayleyRelation::member_through(const Vec& s) const {
  const Vec fs = f(s);
  return {s + fs, s - fs};
}

Vec CayleyRelation::resolvent(const Vec& x) const { return f(0.5 * x) + 0.5 * x; }

CayleyRelation cayley_to_relation(const ContractionMap& f) {
  CayleyRelation out{f, std::nullopt};
  if (f.matrix()) {
    const int n = f.space().dim();
    const Mat& F = *f.matrix();
    Mat B(2 * n, n);
    B.topRows(n) = Mat::Identity(n, n) + F;
    B.bottomRows(n) = Mat::Identity(n, n) - F;
    out.linear = LinearRelation(f.space(), B);
  }
  return out;
}

ContractionMap relation_to_cayley(const InnerSpace& space, const VecMap& resolvent, Rng& rng,
                                  std::size_t samples) {
  VecMap f = [resolvent](const Vec& u) -> Vec { return resolvent(2.0 * u) - u; };
  const auto s = sample_lipschitz(space, f, 1.0 + 1e-8, rng, samples, 1e-12);
  if (s.violations > 0) {
    throw NotNonexpansive("relation_to_cayley: sampled Lipschitz ratio " + std::to_string(s.max_ratio) +
                          " exceeds 1; the resolvent is not that of an m-accretive relation");
  }
  return ContractionMap(space, std::move(f), 1.0);
}

VecMap linear_resolvent(const LinearRelation& M) {
  const int n = M.space().dim();
  if (M.dim() != n) throw std::domain_error("linear_resolvent: 1 + M is not surjective");
  const Mat sum = M.first() + M.second();
  Eigen::FullPivLU<Mat> lu(sum);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) throw std::domain_error("linear_resolvent: 1 + M is not injective");
  const Mat U = M.first();
  const Mat inv = lu.inverse();
  return [U, inv](const Vec& x) -> Vec { return U * (inv * x); };
}

// ---------------------------------------------------------------------------

LinearRelation st_relation(const OperatorPair& P) {
  const auto n = P.S.cols();
  Mat stacked(P.S.rows(), 2 * n);
  stacked << P.S, -P.T;
  return LinearRelation(P.domain, detail::null_space(stacked));
}

OperatorPair relation_to_pair(const LinearRelation& M) {
  const int n = M.space().dim();
  const Mat Q = orthonormalise(M.basis());
  const Mat proj_perp = Mat::Identity(2 * n, 2 * n) - Q * Q.transpose();
  return OperatorPair(M.space(), proj_perp.leftCols(n), -proj_perp.rightCols(n));
}

StCriterion st_criterion(const OperatorPair& P) {
  StCriterion r;
  const int n = P.domain.dim();
  const Mat plus = P.S + P.T;
  const Mat minus = P.T - P.S;
  const int rank_plus = detail::numerical_rank(plus);
  Mat both(plus.rows(), 2 * n);
  both << plus, minus;
  r.range_ok = detail::numerical_rank(both) == rank_plus;
  r.injective_ok = rank_plus == n;
  if (r.range_ok && r.injective_ok) {
    const Mat F = plus.completeOrthogonalDecomposition().solve(minus);
    r.norm_evaluated = true;
    r.norm_value = P.domain.operator_norm(F);
    r.norm_ok = r.norm_value <= 1.0 + 1e-9;
  } else {
    r.norm_value = std::numeric_limits<double>::quiet_NaN();
  }
  if (!r.range_ok) r.which_failed.emplace_back("range");
  if (!r.injective_ok) r.which_failed.emplace_back("injective");
  if (r.norm_evaluated && !r.norm_ok) r.which_failed.emplace_back("norm");
  r.holds = r.which_failed.empty();
  return r;
}

std::optional<Mat> st_cayley_matrix(const OperatorPair& P) {
  const auto c = st_criterion(P);
  if (!c.range_ok || !c.injective_ok) return std::nullopt;
  return Mat((P.S + P.T).completeOrthogonalDecomposition().solve(P.T - P.S));
}

}  // namespace accretive
