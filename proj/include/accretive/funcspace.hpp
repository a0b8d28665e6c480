#pragma once

#include <cstddef>
#include <vector>

namespace accretive {

/// Bounded interval [a, b] with the endpoint exponentials cached.
class Interval {
 public:
  Interval(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }
  double length() const { return b_ - a_; }

  double exp_a() const { return exp_a_; }
  double exp_b() const { return exp_b_; }
  double exp_neg_a() const { return exp_neg_a_; }
  double exp_neg_b() const { return exp_neg_b_; }
  double exp_a_plus_b() const { return exp_a_plus_b_; }

  bool operator==(const Interval& o) const { return a_ == o.a_ && b_ == o.b_; }

 private:
  double a_;
  double b_;
  double exp_a_;
  double exp_b_;
  double exp_neg_a_;
  double exp_neg_b_;
  double exp_a_plus_b_;
};

/// One summand p(t - centre) e^{rate t}; coeffs are ascending in degree.
///
/// High-degree terms whose weight sits near one endpoint keep their
/// polynomial expanded about that endpoint; monomials about 0 would cancel.
struct Term {
  double rate = 0.0;
  std::vector<double> coeffs;
  double centre = 0.0;
};

/// Finite sum of polynomial-times-exponential terms.
///
/// The representation is kept normalised: terms are sorted by rate, rates
/// closer than kRateMergeTol are merged (about the centre of the higher
/// degree part), trailing zero coefficients are trimmed and zero polynomials
/// dropped. The empty sum is the zero function.
class ExpPoly {
 public:
  static constexpr std::size_t kMaxDegree = 128;
  static constexpr double kRateMergeTol = 1e-14;

  ExpPoly() = default;
  explicit ExpPoly(std::vector<Term> terms);

  static ExpPoly constant(double c);
  static ExpPoly exponential(double rate, double c = 1.0);
  static ExpPoly monomial(double rate, std::size_t degree, double c = 1.0);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t max_degree() const;

  double operator()(double t) const;

  ExpPoly& operator+=(const ExpPoly& o);
  ExpPoly& operator-=(const ExpPoly& o);
  ExpPoly& operator*=(double s);

  friend ExpPoly operator+(ExpPoly l, const ExpPoly& r) { return l += r; }
  friend ExpPoly operator-(ExpPoly l, const ExpPoly& r) { return l -= r; }
  friend ExpPoly operator-(ExpPoly f) { return f *= -1.0; }
  friend ExpPoly operator*(double s, ExpPoly f) { return f *= s; }
  friend ExpPoly operator*(ExpPoly f, double s) { return f *= s; }
  friend ExpPoly operator*(const ExpPoly& l, const ExpPoly& r);

  bool operator==(const ExpPoly& o) const;

 private:
  void normalise();

  std::vector<Term> terms_;
};

ExpPoly differentiate(const ExpPoly& f);
double evaluate(const ExpPoly& f, double t);

/// Exact  ∫_a^b f(t) dt.
double integrate(const ExpPoly& f, const Interval& I);

/// L2(a,b) pairing, exact in closed form except for pairs of high-degree
/// terms about different centres, which are integrated by Gauss-Legendre.
double l2_inner(const ExpPoly& f, const ExpPoly& g, const Interval& I);

/// H1 (graph of d/dt) pairing: <f,g> + <f',g'>.
double graph_inner(const ExpPoly& f, const ExpPoly& g, const Interval& I);

/// Exact when the closed form is well conditioned; near-zero norms of
/// cancelling sums fall back to Gauss-Legendre quadrature of f².
double l2_norm(const ExpPoly& f, const Interval& I);
double h1_norm(const ExpPoly& f, const Interval& I);

/// Upper bound of |f| on I from termwise maxima; used for relative pruning.
double sup_bound(const ExpPoly& f, const Interval& I);

/// Drops coefficients whose termwise contribution on I is below
/// rel_tol * sup_bound(f, I).
ExpPoly prune(const ExpPoly& f, const Interval& I, double rel_tol);

/// p(t - c) e^{μt} rewritten as P(t - c) e^{νt} through the Taylor series
/// of e^{(μ-ν)(t-c)}, truncated below 1e-18 relative on I.
/// Requires |μ - ν|·|I|/2 <= 1.
Term rebase_rate(const Term& term, double target_rate, const Interval& I);

/// The same term with its polynomial re-expanded about a new centre.
Term recentre(const Term& term, double centre);

namespace detail {
// ∫_a^b p(t - centre) e^{rate t} dt for an unnormalised polynomial of any degree.
double integrate_term(double rate, const std::vector<double>& coeffs, const Interval& I, double centre = 0.0);
double eval_poly(const std::vector<double>& coeffs, double t);
}  // namespace detail

}  // namespace accretive
