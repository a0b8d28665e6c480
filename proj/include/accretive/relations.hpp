#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace accretive {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;
using VecMap = std::function<Vec(const Vec&)>;

/// Finite-dimensional real Hilbert space given by an SPD Gram matrix.
class InnerSpace {
 public:
  explicit InnerSpace(Mat gram);
  static InnerSpace euclidean(int dim);

  int dim() const { return static_cast<int>(gram_.rows()); }
  const Mat& gram() const { return gram_; }

  double inner(const Vec& x, const Vec& y) const { return x.dot(gram_ * y); }
  double norm(const Vec& x) const;

  /// Operator norm of F : X -> X measured in this space on both sides.
  double operator_norm(const Mat& F) const;

  /// Standard normal coordinates.
  Vec random_vector(Rng& rng) const;

 private:
  Mat gram_;
  Mat chol_upper_;  // gram = Rᵀ R
};

/// Subspace of X × X spanned by the columns of a 2n × k basis (u stacked over v).
class LinearRelation {
 public:
  LinearRelation(InnerSpace space, Mat basis);

  static LinearRelation graph(const InnerSpace& space, const Mat& F);
  static LinearRelation vertical(const InnerSpace& space);  // {0} × X

  const InnerSpace& space() const { return space_; }
  const Mat& basis() const { return basis_; }
  int dim() const { return static_cast<int>(basis_.cols()); }
  Mat first() const { return basis_.topRows(space_.dim()); }
  Mat second() const { return basis_.bottomRows(space_.dim()); }

  /// Distance of (u, v) to the subspace is at most tol·(1 + |(u,v)|).
  bool contains(const Vec& u, const Vec& v, double tol = 1e-9) const;
  bool same_subspace(const LinearRelation& other, double tol = 1e-9) const;

  /// Random member (u, v).
  std::pair<Vec, Vec> random_member(Rng& rng) const;

 private:
  InnerSpace space_;
  Mat basis_;
  Mat orthonormal_;  // Euclidean orthonormal basis of the span
};

/// Total map X -> X with a caller-supplied Lipschitz certificate <= 1.
class ContractionMap {
 public:
  static constexpr double kCertSlack = 1e-12;

  ContractionMap(InnerSpace space, VecMap map, double lipschitz_cert);

  /// x ↦ F x; the certificate is the exact operator norm in `space`.
  static ContractionMap linear(InnerSpace space, const Mat& F);

  const InnerSpace& space() const { return space_; }
  double lipschitz_cert() const { return cert_; }
  const std::optional<Mat>& matrix() const { return matrix_; }
  Vec operator()(const Vec& x) const { return map_(x); }
  const VecMap& map() const { return map_; }

 private:
  InnerSpace space_;
  VecMap map_;
  double cert_;
  std::optional<Mat> matrix_;
};

struct LipschitzSample {
  double max_ratio = 0.0;
  std::size_t violations = 0;  // pairs with |f(x)-f(y)| > bound·|x-y| + abs_tol
  std::size_t samples = 0;
};

/// Falsification-only check of a Lipschitz bound on random pairs.
LipschitzSample sample_lipschitz(const InnerSpace& space, const VecMap& f, double bound, Rng& rng,
                                 std::size_t pairs, double abs_tol = 1e-9);

/// Codomain norm for an operator pair; Y need not be a Hilbert space.
struct NormDescriptor {
  enum class Kind { Euclidean, Gram, L1, LInf };
  Kind kind = Kind::Euclidean;
  Mat gram;  // Kind::Gram only

  double norm(const Vec& y) const;
  static std::string name(Kind k);
};

/// (S, T) ∈ L(X, Y)² describing M = {(u, v) : S u = T v}.
struct OperatorPair {
  InnerSpace domain;
  Mat S;
  Mat T;
  NormDescriptor codomain;

  OperatorPair(InnerSpace domain, Mat S, Mat T, NormDescriptor codomain = {});
};

bool is_accretive_linear(const LinearRelation& M);
bool is_m_accretive_linear(const LinearRelation& M);

/// Smallest eigenvalue of the symmetrised pairing (u, v) ↦ <u, v> on M,
/// with M's basis orthonormalised.
double accretivity_margin(const LinearRelation& M);

/// M = 2(1 + f)^{-1} - 1, described behaviourally.
struct CayleyRelation {
  ContractionMap f;
  std::optional<LinearRelation> linear;  // present when f is linear

  /// (u, v) ∈ M  ⟺  f((u+v)/2) = (u-v)/2.
  bool contains(const Vec& u, const Vec& v, double tol = 1e-9) const;
  /// Member with (u + v)/2 = s.
  std::pair<Vec, Vec> member_through(const Vec& s) const;
  /// (1 + M)^{-1} x = f(x/2) + x/2.
  Vec resolvent(const Vec& x) const;
};

CayleyRelation cayley_to_relation(const ContractionMap& f);

/// f(u) = J(2u) - u for J = (1 + M)^{-1}. Throws NotNonexpansive if sampled
/// pairs expand by more than 1e-8.
ContractionMap relation_to_cayley(const InnerSpace& space, const VecMap& resolvent, Rng& rng,
                                  std::size_t samples = 1000);

/// (1 + M)^{-1} of a linear relation; throws std::domain_error if 1 + M is not
/// a bijection.
VecMap linear_resolvent(const LinearRelation& M);

/// Basis of {(u, v) : S u = T v}.
LinearRelation st_relation(const OperatorPair& P);

/// (S, T) with M = {(u, v) : S u = T v}, from the orthogonal projection onto M^⊥.
OperatorPair relation_to_pair(const LinearRelation& M);

struct StCriterion {
  bool holds = false;
  bool range_ok = false;
  bool injective_ok = false;
  bool norm_ok = false;
  bool norm_evaluated = false;
  double norm_value = 0.0;
  std::vector<std::string> which_failed;  // subset of {"range", "injective", "norm"}
};

StCriterion st_criterion(const OperatorPair& P);

/// (S + T)^{-1}(T - S), defined when range and injectivity hold.
std::optional<Mat> st_cayley_matrix(const OperatorPair& P);

namespace detail {
int numerical_rank(const Mat& A, double rel_tol = 1e-10);
Mat null_space(const Mat& A, double rel_tol = 1e-10);
}  // namespace detail

}  // namespace accretive
