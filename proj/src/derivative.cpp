#include "accretive/derivative.hpp"

#include "accretive/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace accretive::derivative {

Context::Context(Interval I)
    : I_(I),
      plus_den_(I.exp_b() * I.exp_b() - I.exp_a() * I.exp_a()),
      minus_den_(I.exp_neg_a() * I.exp_neg_a() - I.exp_neg_b() * I.exp_neg_b()) {
  if (!(plus_den_ > 0.0) || !(minus_den_ > 0.0)) {
    throw std::invalid_argument("derivative::Context: interval too short for distinct kernels");
  }
}

// ---------------------------------------------------------------------------

BoundaryFunction BoundaryFunction::linear(double slope, double offset) {
  std::ostringstream os;
  os << "linear(slope=" << slope << ", offset=" << offset << ")";
  return {[slope, offset](double c) { return slope * c + offset; }, std::abs(slope), os.str()};
}

BoundaryFunction BoundaryFunction::scaled_sin(double amplitude) {
  std::ostringstream os;
  os << "scaledsin(amplitude=" << amplitude << ")";
  return {[amplitude](double c) { return amplitude * std::sin(c); }, std::abs(amplitude), os.str()};
}

BoundaryFunction BoundaryFunction::table(std::vector<double> knots, std::vector<double> values) {
  if (knots.empty() || knots.size() != values.size()) {
    throw std::invalid_argument("BoundaryFunction::table: need matching non-empty knots and values");
  }
  double cert = 0.0;
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i] > knots[i - 1])) {
      throw std::invalid_argument("BoundaryFunction::table: knots must be strictly increasing");
    }
    cert = std::max(cert, std::abs(values[i] - values[i - 1]) / (knots[i] - knots[i - 1]));
  }
  auto g = [k = std::move(knots), v = std::move(values)](double c) {
    if (c <= k.front()) return v.front();
    if (c >= k.back()) return v.back();
    const auto it = std::upper_bound(k.begin(), k.end(), c);
    const auto i = static_cast<std::size_t>(it - k.begin());
    const double w = (c - k[i - 1]) / (k[i] - k[i - 1]);
    return (1.0 - w) * v[i - 1] + w * v[i];
  };
  return {std::move(g), cert, "table"};
}

Realization::Realization(Context ctx, BoundaryFunction g)
    : ctx_(std::move(ctx)), g_(std::move(g)) {
  if (!g_.g) throw std::invalid_argument("Realization: empty boundary function");
  admissible_ = g_.lipschitz_cert <= ctx_.lipschitz_bound() + 1e-12;
}

// ---------------------------------------------------------------------------

ExpPoly kernel_element(const Context&, Kernel which, double c) {
  return ExpPoly::exponential(which == Kernel::OneMinusD ? 1.0 : -1.0, c);
}

double pi_plus_coeff(const Context& ctx, const ExpPoly& u) {
  const auto& I = ctx.interval();
  return (u(I.b()) * I.exp_b() - u(I.a()) * I.exp_a()) / ctx.plus_denominator();
}

double pi_minus_coeff(const Context& ctx, const ExpPoly& u) {
  const auto& I = ctx.interval();
  return (u(I.a()) * I.exp_neg_a() - u(I.b()) * I.exp_neg_b()) / ctx.minus_denominator();
}

ExpPoly pi_plus(const Context& ctx, const ExpPoly& u) {
  return ExpPoly::exponential(1.0, pi_plus_coeff(ctx, u));
}

ExpPoly pi_minus(const Context& ctx, const ExpPoly& u) {
  return ExpPoly::exponential(-1.0, pi_minus_coeff(ctx, u));
}

ExpPoly pi_zero(const Context& ctx, const ExpPoly& u) {
  return u - pi_plus(ctx, u) - pi_minus(ctx, u);
}

// ---------------------------------------------------------------------------

std::vector<std::pair<double, double>> random_sample_pairs(Rng& rng, std::size_t n, double spread) {
  std::uniform_real_distribution<double> U(-spread, spread);
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double c = U(rng);
    // near-coincident pairs only measure the rounding of g(c) - g(d)
    double d = U(rng);
    while (std::abs(c - d) < 1e-3 * spread) d = U(rng);
    out.emplace_back(c, d);
  }
  return out;
}

TransferReport check_lipschitz_transfer(const Context& ctx, const BoundaryFunction& g,
                                        const std::vector<std::pair<double, double>>& samples) {
  const auto& I = ctx.interval();
  const double bound = ctx.lipschitz_bound();
  TransferReport r;
  r.min_ratio = std::numeric_limits<double>::infinity();
  for (const auto& [c, d] : samples) {
    if (c == d) continue;
    ++r.samples;
    const double dg = g(c) - g(d);
    const ExpPoly hx_minus_hy = ExpPoly::exponential(-1.0, dg);
    const ExpPoly x_minus_y = ExpPoly::exponential(1.0, c - d);

    const double h_sq = l2_inner(hx_minus_hy, hx_minus_hy, I);
    const double x_sq = l2_inner(x_minus_y, x_minus_y, I);
    const double h_closed = dg * dg * ctx.minus_denominator() / 2.0;
    const double x_closed = (c - d) * (c - d) * ctx.plus_denominator() / 2.0;
    r.max_h_identity_defect =
        std::max(r.max_h_identity_defect, std::abs(h_sq - h_closed) / std::max(1.0, h_closed));
    r.max_x_identity_defect =
        std::max(r.max_x_identity_defect, std::abs(x_sq - x_closed) / std::max(1.0, x_closed));

    const double ratio = std::sqrt(h_sq / x_sq);
    r.max_ratio = std::max(r.max_ratio, ratio);
    r.min_ratio = std::min(r.min_ratio, ratio);

    const bool contractive = ratio <= 1.0 + 1e-12;
    const bool within = std::abs(dg) <= bound * std::abs(c - d) * (1.0 + 1e-12);
    r.h_contractive = r.h_contractive && contractive;
    r.g_within_bound = r.g_within_bound && within;
    r.equivalent = r.equivalent && (contractive == within);
  }
  if (r.samples == 0) r.min_ratio = 0.0;
  return r;
}

bool in_domain(const Realization& R, const ExpPoly& u, double tol) {
  const auto& ctx = R.context();
  const double scale = 1.0 + std::abs(u(ctx.a())) + std::abs(u(ctx.b()));
  return std::abs(pi_minus_coeff(ctx, u) - R.g()(pi_plus_coeff(ctx, u))) <= tol * scale;
}

// ---------------------------------------------------------------------------

ExpPoly first_order_particular(const ExpPoly& f, double tau, const Interval* I) {
  std::vector<Term> out;
  out.reserve(f.terms().size());
  const double resonant = -1.0 / tau;
  for (const auto& original : f.terms()) {
    // Terms near the resonant rate (|λ| <= 1/2) are rewritten at that rate. Kept apart, p e^{μt}/λ
    // and the homogeneous e^{-t/τ} part cancel, and repeated steps compound it.
    const double gap = std::abs(original.rate - resonant);
    const bool rebase = I && gap != 0.0 && gap * 0.5 * I->length() <= 1.0 && std::abs(tau) * gap <= 0.5;
    const double lambda = rebase ? 0.0 : 1.0 + tau * original.rate;
    Term t = original;
    if (I && std::abs(lambda) <= 1e-12) {
      // the lifting raises the degree, so expand about the end where e^{-t/τ} is largest
      t = recentre(t, resonant > 0.0 ? I->b() : I->a());
      if (rebase) t = rebase_rate(t, resonant, *I);
    }
    const auto& p = t.coeffs;
    Term q{t.rate, {}, t.centre};
    if (std::abs(lambda) > 1e-12) {
      // (1 + τμ) q + τ q' = p, solved from the top coefficient down
      q.coeffs.assign(p.size(), 0.0);
      for (std::size_t k = p.size(); k-- > 0;) {
        double rhs = p[k];
        if (k + 1 < p.size()) rhs -= tau * static_cast<double>(k + 1) * q.coeffs[k + 1];
        q.coeffs[k] = rhs / lambda;
      }
    } else {
      // resonant rate -1/τ: τ q' = p, one degree up
      q.coeffs.assign(p.size() + 1, 0.0);
      for (std::size_t k = 0; k < p.size(); ++k) q.coeffs[k + 1] = p[k] / (tau * static_cast<double>(k + 1));
    }
    for (double c : q.coeffs)
      if (!std::isfinite(c)) throw DegenerateRate("first_order_particular: non-finite lifting");
    out.push_back(std::move(q));
  }
  return ExpPoly(std::move(out));
}

namespace {

constexpr int kMaxScalarIterations = 200;

// Root of a scalar F bracketed by a geometric scan around `guess`, refined by
// Illinois-style regula falsi with a bisection safeguard.
double solve_scalar(const std::function<double(double)>& F, double guess, double scale) {
  int evals = 0;
  auto eval = [&](double x) {
    ++evals;
    return F(x);
  };

  double x0 = guess;
  double f0 = eval(x0);
  if (f0 == 0.0) return x0;

  double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
  bool bracketed = false;
  double step = std::max(scale, std::abs(x0)) * 1e-3 + std::numeric_limits<double>::min();
  while (evals < kMaxScalarIterations) {
    for (double sgn : {1.0, -1.0}) {
      const double x = x0 + sgn * step;
      const double fx = eval(x);
      if (fx == 0.0) return x;
      if ((fx < 0.0) != (f0 < 0.0)) {
        lo = std::min(x0, x);
        hi = std::max(x0, x);
        flo = x0 < x ? f0 : fx;
        fhi = x0 < x ? fx : f0;
        bracketed = true;
        break;
      }
    }
    if (bracketed) break;
    step *= 2.0;
  }
  if (!bracketed) throw RootNotFound("boundary solve: no sign change found");

  int side = 0;
  while (evals < kMaxScalarIterations) {
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double fx = eval(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
    if (std::abs(fx) <= 1e-15 * scale) return x;
    if (hi - lo <= tol) return std::abs(flo) < std::abs(fhi) ? lo : hi;
  }
  throw RootNotFound("boundary solve did not converge in " + std::to_string(kMaxScalarIterations) +
                     " iterations; is g within its Lipschitz certificate?");
}

}  // namespace

ExpPoly resolve(const Realization& R, const ExpPoly& f, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("resolve: tau must be positive");
  const auto& ctx = R.context();
  const auto& I = ctx.interval();

  const ExpPoly particular = first_order_particular(f, tau, &I);
  // homogeneous solution normalised to 1 at t = a
  const ExpPoly homogeneous = ExpPoly::exponential(-1.0 / tau, std::exp(I.a() / tau));

  const double p_plus = pi_plus_coeff(ctx, particular);
  const double p_minus = pi_minus_coeff(ctx, particular);
  const double h_plus = pi_plus_coeff(ctx, homogeneous);
  const double h_minus = pi_minus_coeff(ctx, homogeneous);

  const auto& g = R.g();
  auto F = [&](double C) { return p_minus + C * h_minus - g(p_plus + C * h_plus); };

  const double scale = 1.0 + std::abs(p_minus) + std::abs(g(p_plus));
  const double guess = -F(0.0) / h_minus;
  const double C = solve_scalar(F, guess, scale);
  return particular + C * homogeneous;
}

double extract_h(const Realization& R, double v_coeff) {
  const ExpPoly u = resolve(R, ExpPoly::exponential(1.0, 2.0 * v_coeff), 1.0);
  return pi_minus_coeff(R.context(), u);
}

// ---------------------------------------------------------------------------

double linear_reduce(const Context& ctx, double g_scalar) {
  const double bound = ctx.lipschitz_bound();
  if (std::abs(g_scalar) > bound * (1.0 + 1e-12)) {
    throw OutOfRange("linear_reduce: |g| exceeds e^{a+b}");
  }
  const auto& I = ctx.interval();
  const double e2a = I.exp_a() * I.exp_a();
  const double e2b = I.exp_b() * I.exp_b();
  return I.exp_b() * I.exp_neg_a() * (e2a + g_scalar) / (e2b + g_scalar);
}

double linear_unreduce(const Context& ctx, double c) {
  if (std::abs(c) > 1.0 + 1e-12) throw OutOfRange("linear_unreduce: |c| exceeds 1");
  const auto& I = ctx.interval();
  const double e2b = I.exp_b() * I.exp_b();
  const double ratio = I.exp_b() * I.exp_neg_a();  // e^{b-a}
  return (I.exp_a_plus_b() - c * e2b) / (c - ratio);
}

// ---------------------------------------------------------------------------

AccretivityWitness accretivity_witness(const Context& ctx, const BoundaryFunction& g, double c, double d) {
  const double gc = g(c);
  const double gd = g(d);
  if (!(std::abs(gc - gd) > ctx.lipschitz_bound() * std::abs(c - d) * (1.0 + 1e-12))) {
    throw NotAViolation("accretivity_witness: (c, d) satisfies |g(c)-g(d)| <= e^{a+b}|c-d|");
  }
  AccretivityWitness w;
  w.u = ExpPoly({Term{1.0, {c}}, Term{-1.0, {gc}}});
  w.v = ExpPoly({Term{1.0, {d}}, Term{-1.0, {gd}}});
  w.pairing = (c - d) * (c - d) * ctx.plus_denominator() / 2.0 -
              (gc - gd) * (gc - gd) * ctx.minus_denominator() / 2.0;
  const ExpPoly diff = w.u - w.v;
  w.pairing_computed = l2_inner(differentiate(diff), diff, ctx.interval());
  return w;
}

MaximalityProbe maximality_probe(const Realization& R, const ExpPoly& u, Rng& rng, std::size_t max_probes) {
  const auto& ctx = R.context();
  const auto& I = ctx.interval();
  MaximalityProbe out;
  if (in_domain(R, u)) return out;

  const ExpPoly core = pi_zero(ctx, u);
  const double c1 = pi_plus_coeff(ctx, u);
  const double spread = 1.0 + std::abs(c1);
  std::normal_distribution<double> N(0.0, 1.0);

  for (std::size_t k = 0; k < max_probes; ++k) {
    // first probe matches π₁, later ones perturb it
    const double d = k == 0 ? c1 : c1 + spread * N(rng) * std::pow(10.0, -3.0 * N(rng) * N(rng));
    const ExpPoly v = core + ExpPoly({Term{1.0, {d}}, Term{-1.0, {R.g()(d)}}});
    const ExpPoly diff = u - v;
    const double pairing = l2_inner(differentiate(diff), diff, I);
    out.probes_used = k + 1;
    if (pairing < 0.0) {
      out.conclusive = true;
      out.witness = v;
      out.pairing = pairing;
      return out;
    }
  }
  return out;
}

}  // namespace accretive::derivative
