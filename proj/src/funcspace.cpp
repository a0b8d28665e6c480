#include "accretive/funcspace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace accretive {

Interval::Interval(double a, double b) : a_(a), b_(b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("Interval: require finite a < b, got [" + std::to_string(a) +
                                ", " + std::to_string(b) + "]");
  }
  exp_a_ = std::exp(a);
  exp_b_ = std::exp(b);
  exp_neg_a_ = std::exp(-a);
  exp_neg_b_ = std::exp(-b);
  exp_a_plus_b_ = std::exp(a + b);
}

// ---------------------------------------------------------------------------

Term rebase_rate(const Term& term, double target_rate, const Interval& I) {
  const double delta = term.rate - target_rate;
  if (std::abs(delta) * 0.5 * I.length() > 1.0 + 1e-12) throw std::invalid_argument("rebase_rate: rates too far apart");
  const double c = term.centre;
  const double w = std::max(std::abs(I.a() - c), std::abs(I.b() - c));
  // e^{δt} = e^{δc} Σ δ^j (t - c)^j / j!
  std::vector<double> taylor{std::exp(delta * c)};
  for (std::size_t j = 1; j < 80; ++j) {
    const double next = taylor.back() * delta / static_cast<double>(j);
    if (std::abs(next) * std::pow(w, static_cast<double>(j)) < 1e-18 * taylor[0]) break;
    taylor.push_back(next);
  }
  std::vector<double> out(term.coeffs.size() + taylor.size() - 1, 0.0);
  for (std::size_t i = 0; i < term.coeffs.size(); ++i)
    for (std::size_t k = 0; k < taylor.size(); ++k) out[i + k] += term.coeffs[i] * taylor[k];
  return {target_rate, std::move(out), c};
}

Term recentre(const Term& term, double centre) {
  if (centre == term.centre || term.coeffs.size() <= 1) return {term.rate, term.coeffs, centre};
  // p(y + d) by Horner in y = t - centre
  const double d = centre - term.centre;
  std::vector<double> q;
  for (auto it = term.coeffs.rbegin(); it != term.coeffs.rend(); ++it) {
    q.push_back(0.0);
    for (std::size_t k = q.size() - 1; k > 0; --k) q[k] = q[k - 1] + d * q[k];
    q[0] = d * q[0] + *it;
  }
  return {term.rate, std::move(q), centre};
}

namespace detail {

double eval_poly(const std::vector<double>& coeffs, double t) {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
  return acc;
}

namespace {

// J_k = ∫_a^b t^k e^{μt} dt for k = 0..n.
//
// The recurrence μ J_k + k J_{k-1} = b^k e^{μb} - a^k e^{μa} is run forward
// while k <= |μ| L and backward (from a start index well above n) beyond,
// which keeps each direction in its stable regime.
std::vector<double> moment_table(double mu, std::size_t n, const Interval& I) {
  const double a = I.a();
  const double b = I.b();
  std::vector<double> J(n + 1, 0.0);

  if (mu == 0.0) {
    double pa = a;
    double pb = b;
    for (std::size_t k = 0; k <= n; ++k) {
      J[k] = (pb - pa) / static_cast<double>(k + 1);
      pa *= a;
      pb *= b;
    }
    return J;
  }

  const double ea = std::exp(mu * a);
  const double eb = std::exp(mu * b);
  const double scale = std::max(std::abs(a), std::abs(b));
  const double nu = std::abs(mu) * scale;

  auto boundary = [&](std::size_t k) {
    return std::pow(b, static_cast<double>(k)) * eb - std::pow(a, static_cast<double>(k)) * ea;
  };

  const auto forward_end = std::min<std::size_t>(n, static_cast<std::size_t>(std::floor(nu)));
  J[0] = ea * std::expm1(mu * (b - a)) / mu;
  for (std::size_t k = 1; k <= forward_end; ++k) {
    J[k] = (boundary(k) - static_cast<double>(k) * J[k - 1]) / mu;
  }
  if (forward_end == n) return J;

  const std::size_t start = n + 60 + 2 * static_cast<std::size_t>(std::ceil(nu));
  double next = 0.0;  // J_{start}, truncated
  for (std::size_t k = start; k > forward_end + 1; --k) {
    const double prev = (boundary(k) - mu * next) / static_cast<double>(k);
    if (k - 1 <= n) J[k - 1] = prev;
    next = prev;
  }
  return J;
}

}  // namespace

double integrate_term(double rate, const std::vector<double>& coeffs, const Interval& I, double centre) {
  if (coeffs.empty()) return 0.0;
  if (centre != 0.0) {
    // substitute x = t - centre
    return std::exp(rate * centre) * integrate_term(rate, coeffs, Interval(I.a() - centre, I.b() - centre));
  }
  const auto J = moment_table(rate, coeffs.size() - 1, I);
  double acc = 0.0;
  for (std::size_t k = 0; k < coeffs.size(); ++k) acc += coeffs[k] * J[k];
  return acc;
}

}  // namespace detail

// ---------------------------------------------------------------------------

ExpPoly::ExpPoly(std::vector<Term> terms) : terms_(std::move(terms)) { normalise(); }

ExpPoly ExpPoly::constant(double c) { return ExpPoly({Term{0.0, {c}}}); }

ExpPoly ExpPoly::exponential(double rate, double c) { return ExpPoly({Term{rate, {c}}}); }

ExpPoly ExpPoly::monomial(double rate, std::size_t degree, double c) {
  std::vector<double> coeffs(degree + 1, 0.0);
  coeffs[degree] = c;
  return ExpPoly({Term{rate, std::move(coeffs)}});
}

void ExpPoly::normalise() {
  for (const auto& t : terms_) {
    if (!std::isfinite(t.rate)) throw std::invalid_argument("ExpPoly: non-finite rate");
  }
  std::stable_sort(terms_.begin(), terms_.end(),
                   [](const Term& l, const Term& r) { return l.rate < r.rate; });

  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (auto& t : terms_) {
    if (!merged.empty() && std::abs(t.rate - merged.back().rate) <= kRateMergeTol) {
      if (t.centre != merged.back().centre) {
        if (t.coeffs.size() > merged.back().coeffs.size()) merged.back() = recentre(merged.back(), t.centre);
        else t = recentre(t, merged.back().centre);
      }
      auto& dst = merged.back().coeffs;
      if (dst.size() < t.coeffs.size()) dst.resize(t.coeffs.size(), 0.0);
      for (std::size_t k = 0; k < t.coeffs.size(); ++k) dst[k] += t.coeffs[k];
    } else {
      merged.push_back(std::move(t));
    }
  }

  terms_.clear();
  for (auto& t : merged) {
    while (!t.coeffs.empty() && t.coeffs.back() == 0.0) t.coeffs.pop_back();
    if (t.coeffs.empty()) continue;
    if (t.coeffs.size() > kMaxDegree + 1) {
      throw std::length_error("ExpPoly: polynomial degree " + std::to_string(t.coeffs.size() - 1) +
                              " exceeds cap " + std::to_string(kMaxDegree));
    }
    terms_.push_back(std::move(t));
  }
}

std::size_t ExpPoly::max_degree() const {
  std::size_t d = 0;
  for (const auto& t : terms_) d = std::max(d, t.coeffs.size() - 1);
  return d;
}

double ExpPoly::operator()(double t) const { return evaluate(*this, t); }

ExpPoly& ExpPoly::operator+=(const ExpPoly& o) {
  terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
  normalise();
  return *this;
}

ExpPoly& ExpPoly::operator-=(const ExpPoly& o) {
  for (auto t : o.terms_) {
    for (auto& c : t.coeffs) c = -c;
    terms_.push_back(std::move(t));
  }
  normalise();
  return *this;
}

ExpPoly& ExpPoly::operator*=(double s) {
  for (auto& t : terms_)
    for (auto& c : t.coeffs) c *= s;
  normalise();
  return *this;
}

namespace {

// Product of two terms, expanded about the centre of the higher-degree factor.
Term multiply_terms(const Term& p, const Term& q) {
  if (p.centre != q.centre) {
    return p.coeffs.size() >= q.coeffs.size() ? multiply_terms(p, recentre(q, p.centre))
                                              : multiply_terms(recentre(p, q.centre), q);
  }
  Term t{p.rate + q.rate, std::vector<double>(p.coeffs.size() + q.coeffs.size() - 1, 0.0), p.centre};
  for (std::size_t i = 0; i < p.coeffs.size(); ++i)
    for (std::size_t j = 0; j < q.coeffs.size(); ++j) t.coeffs[i + j] += p.coeffs[i] * q.coeffs[j];
  return t;
}

}  // namespace

ExpPoly operator*(const ExpPoly& l, const ExpPoly& r) {
  std::vector<Term> out;
  out.reserve(l.terms_.size() * r.terms_.size());
  for (const auto& p : l.terms_)
    for (const auto& q : r.terms_) out.push_back(multiply_terms(p, q));
  return ExpPoly(std::move(out));
}

bool ExpPoly::operator==(const ExpPoly& o) const {
  if (terms_.size() != o.terms_.size()) return false;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].rate != o.terms_[i].rate || terms_[i].coeffs != o.terms_[i].coeffs ||
        terms_[i].centre != o.terms_[i].centre) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

ExpPoly differentiate(const ExpPoly& f) {
  std::vector<Term> out;
  out.reserve(f.terms().size());
  for (const auto& t : f.terms()) {
    // (p e^{μt})' = (μ p + p') e^{μt}
    Term d{t.rate, std::vector<double>(t.coeffs.size(), 0.0), t.centre};
    for (std::size_t k = 0; k < t.coeffs.size(); ++k) {
      d.coeffs[k] = t.rate * t.coeffs[k];
      if (k + 1 < t.coeffs.size()) d.coeffs[k] += static_cast<double>(k + 1) * t.coeffs[k + 1];
    }
    out.push_back(std::move(d));
  }
  return ExpPoly(std::move(out));
}

double evaluate(const ExpPoly& f, double t) {
  double acc = 0.0;
  for (const auto& term : f.terms()) {
    const double e = term.rate == 0.0 ? 1.0 : std::exp(term.rate * t);
    acc += detail::eval_poly(term.coeffs, t - term.centre) * e;
  }
  return acc;
}

double integrate(const ExpPoly& f, const Interval& I) {
  double acc = 0.0;
  for (const auto& t : f.terms()) acc += detail::integrate_term(t.rate, t.coeffs, I, t.centre);
  return acc;
}

namespace {

// 20-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::array<double, 20> x{}, w{};
  GaussRule() {
    constexpr int n = 20;
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 1.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

int panel_count(std::size_t degree, double rate, double length) {
  return 1 + static_cast<int>(std::ceil((static_cast<double>(degree) + std::abs(rate) * length) / 8.0));
}

// ∫ of a product of two terms by composite quadrature; used when both have
// high degree about different centres, where re-expanding either one cancels.
double product_by_quadrature(const Term& p, const Term& q, const Interval& I) {
  static const GaussRule rule;
  const int panels = panel_count(p.coeffs.size() + q.coeffs.size(), p.rate + q.rate, I.length());
  const double h = I.length() / panels;
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = I.a() + (k + 0.5) * h;
    for (int i = 0; i < 20; ++i) {
      const double t = mid + 0.5 * h * rule.x[i];
      acc += rule.w[i] * detail::eval_poly(p.coeffs, t - p.centre) * detail::eval_poly(q.coeffs, t - q.centre) *
             std::exp((p.rate + q.rate) * t);
    }
  }
  return 0.5 * h * acc;
}

constexpr std::size_t kRecentreDegree = 8;

}  // namespace

double l2_inner(const ExpPoly& f, const ExpPoly& g, const Interval& I) {
  // Pairwise products are integrated directly so the degree cap of the
  // normalised representation does not apply to intermediate products.
  double acc = 0.0;
  for (const auto& p : f.terms()) {
    for (const auto& q : g.terms()) {
      if (p.centre != q.centre && std::min(p.coeffs.size(), q.coeffs.size()) > kRecentreDegree + 1) {
        acc += product_by_quadrature(p, q, I);
        continue;
      }
      const Term prod = multiply_terms(p, q);
      acc += detail::integrate_term(prod.rate, prod.coeffs, I, prod.centre);
    }
  }
  return acc;
}

double graph_inner(const ExpPoly& f, const ExpPoly& g, const Interval& I) {
  return l2_inner(f, g, I) + l2_inner(differentiate(f), differentiate(g), I);
}

namespace {

// ∫ f² by composite quadrature of pointwise values. Used when the exact
// expansion of ∫ f² has cancelled, since pointwise values keep their
// relative accuracy there.
double l2_square_by_quadrature(const ExpPoly& f, const Interval& I) {
  static const GaussRule rule;
  double max_rate = 0.0;
  for (const auto& t : f.terms()) max_rate = std::max(max_rate, std::abs(t.rate));
  const double len = I.length();
  const int panels = panel_count(f.max_degree(), max_rate, len);
  const double h = len / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = I.a() + (p + 0.5) * h;
    for (int i = 0; i < 20; ++i) {
      const double v = f(mid + 0.5 * h * rule.x[i]);
      acc += rule.w[i] * v * v;
    }
  }
  return 0.5 * h * acc;
}

double l2_square(const ExpPoly& f, const Interval& I) {
  const double exact = l2_inner(f, f, I);
  const double bound = sup_bound(f, I);
  if (exact > 1e-6 * bound * bound * I.length()) return exact;
  return l2_square_by_quadrature(f, I);
}

}  // namespace

double l2_norm(const ExpPoly& f, const Interval& I) { return std::sqrt(l2_square(f, I)); }

double h1_norm(const ExpPoly& f, const Interval& I) {
  return std::sqrt(l2_square(f, I) + l2_square(differentiate(f), I));
}

namespace {

// max over I of |c_k (t-c)^k e^{μt}|, from the endpoints and the critical point t = c - k/μ
double term_coeff_bound(const Term& t, std::size_t k, const Interval& I) {
  if (t.coeffs[k] == 0.0) return 0.0;
  const double deg = static_cast<double>(k);
  const auto log_value = [&](double x) {
    if (k > 0 && x == t.centre) return -std::numeric_limits<double>::infinity();
    return (k > 0 ? deg * std::log(std::abs(x - t.centre)) : 0.0) + t.rate * x;
  };
  double best = std::max(log_value(I.a()), log_value(I.b()));
  if (k > 0 && t.rate != 0.0) {
    const double crit = t.centre - deg / t.rate;
    if (crit > I.a() && crit < I.b()) best = std::max(best, log_value(crit));
  }
  return std::abs(t.coeffs[k]) * std::exp(best);
}

}  // namespace

double sup_bound(const ExpPoly& f, const Interval& I) {
  double s = 0.0;
  for (const auto& t : f.terms())
    for (std::size_t k = 0; k < t.coeffs.size(); ++k) s += term_coeff_bound(t, k, I);
  return s;
}

ExpPoly prune(const ExpPoly& f, const Interval& I, double rel_tol) {
  const double cutoff = rel_tol * sup_bound(f, I);
  std::vector<Term> kept;
  for (const auto& t : f.terms()) {
    Term c = t;
    for (std::size_t k = 0; k < c.coeffs.size(); ++k) {
      if (term_coeff_bound(t, k, I) < cutoff) c.coeffs[k] = 0.0;
    }
    kept.push_back(std::move(c));
  }
  return ExpPoly(std::move(kept));
}

}  // namespace accretive
