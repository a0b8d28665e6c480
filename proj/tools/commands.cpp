#include "commands.hpp"

#include "accretive/blockop.hpp"
#include "accretive/derivative.hpp"
#include "accretive/errors.hpp"
#include "accretive/evolution.hpp"
#include "accretive/impedance1d.hpp"
#include "accretive/relations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

namespace accretive::cli {

namespace {

using derivative::BoundaryFunction;
using derivative::Context;
using derivative::Realization;
using blockop::BlockRealization;
using blockop::BlockState;

// ---------------------------------------------------------------------------
// input and tolerance plumbing

class Input {
 public:
  Input(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) : j_(j), where_(where) {
    io::require_keys(j_, allowed, where_);
  }

  bool has(const char* key) const { return j_.contains(key); }
  const Json& at(const char* key) const { return j_.at(key); }

  double number(const char* key, double fallback) const {
    return has(key) ? io::number_from_json(j_[key], where_ + "." + key) : fallback;
  }

  double positive(const char* key, double fallback) const {
    const double x = number(key, fallback);
    if (!(x > 0.0) || !std::isfinite(x)) throw SchemaError(where_ + "." + key + ": must be positive");
    return x;
  }

  std::size_t count(const char* key, std::size_t fallback, std::size_t lo = 1, std::size_t hi = 1000000) const {
    if (!has(key)) return fallback;
    const Json& v = j_[key];
    if (!v.is_number_integer() && !v.is_number_unsigned()) throw SchemaError(where_ + "." + key + ": expected an integer");
    const long long n = v.get<long long>();
    if (n < static_cast<long long>(lo) || n > static_cast<long long>(hi)) {
      throw SchemaError(where_ + "." + key + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<std::size_t>(n);
  }

  Interval interval() const { return has("interval") ? io::interval_from_json(j_["interval"]) : Interval(0.0, 1.0); }

  Json subset(std::initializer_list<const char*> keys) const {
    Json out = Json::object();
    for (const char* k : keys)
      if (has(k)) out[k] = j_[k];
    return out;
  }

 private:
  const Json& j_;
  std::string where_;
};

class Tolerances {
 public:
  using Defaults = std::vector<std::pair<std::string, double>>;

  Tolerances(const Defaults& defaults, const Json& overrides,
             std::optional<double> global) {
    for (const auto& [k, v] : defaults) values_[k] = v;
    if (!overrides.is_object()) throw SchemaError("tolerances: expected an object");
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
      if (!values_.contains(it.key())) throw SchemaError("tolerances: unknown tolerance \"" + it.key() + "\"");
      values_[it.key()] = checked(io::number_from_json(it.value(), "tolerances." + it.key()), it.key());
    }
    if (global) {
      for (auto& [k, v] : values_) v = checked(*global, "--tol");
    }
    for (const auto& [k, v] : defaults) order_.push_back(k);
  }

  double operator[](const std::string& k) const { return values_.at(k); }

  Json to_json() const {
    Json out = Json::object();
    for (const auto& k : order_) out[k] = values_.at(k);
    return out;
  }

 private:
  static double checked(double x, const std::string& what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw SchemaError(what + ": tolerance must be positive");
    return x;
  }

  std::map<std::string, double> values_;
  std::vector<std::string> order_;
};

class Verdicts {
 public:
  void add(const std::string& name, bool pass, Json detail = Json::object()) {
    Json v = Json::object();
    v["name"] = name;
    v["pass"] = pass;
    for (auto it = detail.begin(); it != detail.end(); ++it) v[it.key()] = it.value();
    list_.push_back(std::move(v));
    if (!pass && !first_failure_) first_failure_ = name;
  }

  void fail(const std::string& name, const std::exception& e) { add(name, false, Json{{"error", e.what()}}); }

  bool pass() const { return !first_failure_; }
  const std::optional<std::string>& first_failure() const { return first_failure_; }
  const Json& list() const { return list_; }

 private:
  Json list_ = Json::array();
  std::optional<std::string> first_failure_;
};

// defect <= tol, recorded with both numbers
void bound_verdict(Verdicts& v, const std::string& name, double value, double tol) {
  v.add(name, value <= tol, Json{{"value", value}, {"tolerance", tol}});
}

struct Result {
  Json results = Json::object();
  std::string csv;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// random inputs shared by the suites

ExpPoly random_exppoly(Rng& rng, int max_deg, int lo = -2, int hi = 2) {
  std::uniform_int_distribution<int> nterms(1, 3), rate(lo, hi), deg(0, max_deg);
  std::normal_distribution<double> nd;
  ExpPoly f;
  const int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    const int d = deg(rng);
    const double r = rate(rng);
    for (int k = 0; k <= d; ++k) f += ExpPoly::monomial(r, static_cast<std::size_t>(k), nd(rng));
  }
  return f;
}

Mat random_matrix(Rng& rng, int r, int c) {
  std::normal_distribution<double> nd;
  Mat A(r, c);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < c; ++k) A(i, k) = nd(rng);
  return A;
}

Mat random_spd(Rng& rng, int n) {
  const Mat A = random_matrix(rng, n, n);
  return A * A.transpose() + 0.5 * Mat::Identity(n, n);
}

// Operator norm drawn from (0, 1], one draw in five exactly 1.
Mat random_contraction(Rng& rng, const InnerSpace& X) {
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const Mat A = random_matrix(rng, X.dim(), X.dim());
  const double r = ud(rng);
  const double target = r < 0.2 ? 1.0 : std::max(r, 0.05);
  return A * (target / X.operator_norm(A));
}

BlockState random_state(Rng& rng) { return {random_exppoly(rng, 3), random_exppoly(rng, 3)}; }

// g defaults to 0, the realisation with π₋₁u = 0
Realization scalar_realization(const Input& input) {
  Json j = input.subset({"interval", "g", "lipschitz_cert"});
  if (!j.contains("g")) j["g"] = Json{{"kind", "linear"}, {"slope", 0.0}};
  return io::scalar_realization_from_json(j);
}

// ---------------------------------------------------------------------------

Result check_decomposition(const Json& in, const Tolerances& tol, Rng& rng, Verdicts& v) {
  const Input input(in, "check-decomposition", {"interval", "samples", "max_degree"});
  const Context ctx(input.interval());
  const Interval& I = ctx.interval();
  const std::size_t samples = input.count("samples", 500);
  const int max_deg = static_cast<int>(input.count("max_degree", 4, 0, 20));
  const double a = I.a(), b = I.b();
  const ExpPoly ep = ExpPoly::exponential(1.0), em = ExpPoly::exponential(-1.0);
  // H1 Gram of e^{±t} for the projection cross-check
  const double g11 = graph_inner(ep, ep, I), g22 = graph_inner(em, em, I), g12 = graph_inner(ep, em, I);
  const double det = g11 * g22 - g12 * g12;

  double rec = 0.0, orth = 0.0, ident = 0.0, bdry = 0.0, proj = 0.0, pi0 = 0.0;
  std::ostringstream csv;
  csv << "sample,reconstruction,orthogonality,identity,projection\n";
  for (std::size_t i = 0; i < samples; ++i) {
    const ExpPoly u = random_exppoly(rng, max_deg);
    const ExpPoly p0 = derivative::pi_zero(ctx, u), p1 = derivative::pi_plus(ctx, u), pm = derivative::pi_minus(ctx, u);
    const double scale = 1.0 + h1_norm(u, I);
    const double s2 = scale * scale;
    const double r = h1_norm(p0 + p1 + pm - u, I) / scale;
    const double o = std::max({std::abs(graph_inner(p0, p1, I)), std::abs(graph_inner(p0, pm, I)),
                               std::abs(graph_inner(p1, pm, I))}) / s2;
    const double lhs = l2_inner(differentiate(u), u, I);
    const double mid = l2_inner(p1, p1, I) - l2_inner(pm, pm, I);
    const double rhs = 0.5 * (u(b) * u(b) - u(a) * u(a));
    const double id = std::abs(lhs - mid) / s2;
    const double bd = std::abs(mid - rhs) / s2;
    const double r1 = graph_inner(u, ep, I), r2 = graph_inner(u, em, I);
    const double cp = (g22 * r1 - g12 * r2) / det, cm = (g11 * r2 - g12 * r1) / det;
    const double pr = std::max(std::abs(derivative::pi_plus_coeff(ctx, u) - cp),
                               std::abs(derivative::pi_minus_coeff(ctx, u) - cm)) / scale;
    pi0 = std::max({pi0, std::abs(p0(a)) / scale, std::abs(p0(b)) / scale});
    rec = std::max(rec, r);
    orth = std::max(orth, o);
    ident = std::max(ident, id);
    bdry = std::max(bdry, bd);
    proj = std::max(proj, pr);
    csv << i << ',' << num(r) << ',' << num(o) << ',' << num(id) << ',' << num(pr) << '\n';
  }
  bound_verdict(v, "reconstruction", rec, tol["reconstruction"]);
  bound_verdict(v, "orthogonality", orth, tol["orthogonality"]);
  bound_verdict(v, "pi0_boundary", pi0, tol["reconstruction"]);
  bound_verdict(v, "inner_product_identity", ident, tol["identity"]);
  bound_verdict(v, "boundary_identity", bdry, tol["identity"]);
  bound_verdict(v, "projection_oracle", proj, tol["projection"]);

  Result out;
  out.results["interval"] = io::to_json(I);
  out.results["samples"] = samples;
  out.results["max_degree"] = max_deg;
  out.results["defects_scaled_by"] = "1 + |u|_H1 (squared for pairings)";
  out.results["max_reconstruction_defect"] = rec;
  out.results["max_orthogonality_defect"] = orth;
  out.results["max_identity_defect"] = ident;
  out.results["max_boundary_identity_defect"] = bdry;
  out.results["max_projection_defect"] = proj;
  out.csv = csv.str();
  return out;
}

Result lipschitz_transfer(const Json& in, const Tolerances& tol, Rng& rng, Verdicts& v) {
  const Input input(in, "lipschitz-transfer", {"interval", "g", "samples", "spread"});
  const Context ctx(input.interval());
  const BoundaryFunction g =
      input.has("g") ? io::boundary_function_from_json(input.at("g")) : BoundaryFunction::linear(ctx.lipschitz_bound());
  const std::size_t samples = input.count("samples", 1000);
  const double spread = input.positive("spread", 3.0);
  const auto pairs = derivative::random_sample_pairs(rng, samples, spread);
  const derivative::TransferReport rep = derivative::check_lipschitz_transfer(ctx, g, pairs);

  bound_verdict(v, "h_identity", rep.max_h_identity_defect, tol["identity"]);
  bound_verdict(v, "x_identity", rep.max_x_identity_defect, tol["identity"]);
  v.add("equivalence", rep.equivalent);
  v.add("h_contractive", rep.h_contractive, Json{{"max_ratio", rep.max_ratio}});

  Result out;
  out.results["interval"] = io::to_json(ctx.interval());
  out.results["g"] = g.description;
  out.results["lipschitz_bound"] = ctx.lipschitz_bound();
  out.results["samples"] = rep.samples;
  out.results["max_ratio"] = rep.max_ratio;
  out.results["min_ratio"] = rep.min_ratio;
  out.results["h_contractive"] = rep.h_contractive;
  out.results["g_within_bound"] = rep.g_within_bound;
  return out;
}

Result resolve(const Json& in, const Tolerances& tol, Rng&, Verdicts& v) {
  const Input input(in, "resolve", {"interval", "g", "lipschitz_cert", "f", "tau", "grid"});
  const Realization R = scalar_realization(input);
  const ExpPoly f = input.has("f") ? io::exppoly_from_json(input.at("f")) : ExpPoly::constant(1.0);
  const double tau = input.positive("tau", 1.0);
  const std::size_t grid = input.count("grid", 101, 2, 100000);
  const Context& ctx = R.context();
  const Interval& I = ctx.interval();

  v.add("admissible", R.admissible(), Json{{"lipschitz_cert", R.g().lipschitz_cert}, {"bound", ctx.lipschitz_bound()}});
  Result out;
  out.results["interval"] = io::to_json(I);
  out.results["tau"] = tau;
  ExpPoly u;
  try {
    u = derivative::resolve(R, f, tau);
  } catch (const std::exception& e) {
    v.fail("resolve", e);
    return out;
  }
  const double residual = l2_norm(u + tau * differentiate(u) - f, I);
  bound_verdict(v, "residual", residual, tol["residual"] * (1.0 + l2_norm(f, I)));
  v.add("in_domain", derivative::in_domain(R, u, tol["domain"]));

  out.results["u"] = io::to_json(u);
  out.results["u_a"] = u(I.a());
  out.results["u_b"] = u(I.b());
  out.results["pi_plus"] = derivative::pi_plus_coeff(ctx, u);
  out.results["pi_minus"] = derivative::pi_minus_coeff(ctx, u);
  out.results["residual"] = residual;
  std::ostringstream csv;
  csv << "t,f,u\n";
  for (std::size_t k = 0; k < grid; ++k) {
    const double t = I.a() + I.length() * static_cast<double>(k) / static_cast<double>(grid - 1);
    csv << num(t) << ',' << num(f(t)) << ',' << num(u(t)) << '\n';
  }
  out.csv = csv.str();
  return out;
}

Result cayley(const Json& in, const Tolerances& tol, Rng& rng, Verdicts& v) {
  const Input input(in, "cayley", {"matrix", "gram", "maps", "points", "dim"});
  const std::size_t points = input.count("points", 100);
  std::vector<std::pair<InnerSpace, Mat>> maps;
  int dim = 2;
  if (input.has("matrix")) {
    const Mat F = io::matrix_from_json(input.at("matrix"));
    dim = static_cast<int>(F.rows());
    if (F.cols() != F.rows()) throw SchemaError("cayley.matrix: must be square");
    const InnerSpace X = input.has("gram") ? InnerSpace(io::matrix_from_json(input.at("gram"), dim, dim))
                                           : InnerSpace::euclidean(dim);
    maps.emplace_back(X, F);
  } else {
    if (input.has("gram")) throw SchemaError("cayley.gram: only used together with \"matrix\"");
    dim = static_cast<int>(input.count("dim", 2, 1, 8));
    const std::size_t n = input.count("maps", 50);
    for (std::size_t i = 0; i < n; ++i) {
      const InnerSpace X = i % 2 ? InnerSpace(random_spd(rng, dim)) : InnerSpace::euclidean(dim);
      maps.emplace_back(X, random_contraction(rng, X));
    }
  }

  double worst = 0.0, worst_norm = 0.0;
  bool accretive = true;
  std::size_t failures = 0;
  for (const auto& [X, F] : maps) {
    worst_norm = std::max(worst_norm, X.operator_norm(F));
    try {
      const ContractionMap f = ContractionMap::linear(X, F);
      const LinearRelation M = *cayley_to_relation(f).linear;
      accretive = accretive && is_m_accretive_linear(M);
      const ContractionMap back = relation_to_cayley(X, linear_resolvent(M), rng, points);
      for (std::size_t i = 0; i < points; ++i) {
        const Vec x = X.random_vector(rng);
        worst = std::max(worst, X.norm(back(x) - F * x) / (1.0 + X.norm(x)));
      }
    } catch (const std::exception&) {
      ++failures;
    }
  }
  v.add("contraction", worst_norm <= 1.0 + ContractionMap::kCertSlack, Json{{"max_operator_norm", worst_norm}});
  v.add("m_accretive", accretive && failures == 0, Json{{"failures", failures}});
  bound_verdict(v, "roundtrip", failures ? INFINITY : worst, tol["roundtrip"]);

  // f = 0, identity, -identity give the identity graph, the zero graph and the vertical relation
  const InnerSpace E = InnerSpace::euclidean(dim);
  const Mat Id = Mat::Identity(dim, dim), Z = Mat::Zero(dim, dim);
  const bool trivial = cayley_to_relation(ContractionMap::linear(E, Z)).linear->same_subspace(LinearRelation::graph(E, Id), tol["relation"]) &&
                       cayley_to_relation(ContractionMap::linear(E, Id)).linear->same_subspace(LinearRelation::graph(E, Z), tol["relation"]) &&
                       cayley_to_relation(ContractionMap::linear(E, -Id)).linear->same_subspace(LinearRelation::vertical(E), tol["relation"]);
  v.add("trivial_correspondences", trivial);

  Result out;
  out.results["maps"] = maps.size();
  out.results["points"] = points;
  out.results["dim"] = dim;
  out.results["max_roundtrip_error"] = failures ? Json(nullptr) : Json(worst);
  if (maps.size() == 1 && failures == 0) {
    const LinearRelation M = *cayley_to_relation(ContractionMap::linear(maps[0].first, maps[0].second)).linear;
    out.results["relation_basis"] = io::to_json(M.basis());
  }
  return out;
}

Json st_json(const StCriterion& c) {
  Json j = Json::object();
  j["holds"] = c.holds;
  // same order as the verdict list
  Json failed = Json::array();
  for (const char* w : {"injective", "range", "norm"})
    if (std::find(c.which_failed.begin(), c.which_failed.end(), w) != c.which_failed.end()) failed.push_back(w);
  j["which_failed"] = failed;
  j["norm_value"] = c.norm_evaluated ? Json(c.norm_value) : Json(nullptr);
  return j;
}

Result st_criterion_cmd(const Json& in, const Tolerances&, Rng& rng, Verdicts& v) {
  const Input input(in, "st-criterion", {"S", "T", "gram", "codomain_norm", "random_pairs"});
  Result out;
  if (input.has("S") || input.has("T")) {
    if (!input.has("S") || !input.has("T")) throw SchemaError("st-criterion: needs both \"S\" and \"T\"");
    if (input.has("random_pairs")) throw SchemaError("st-criterion: \"random_pairs\" excludes \"S\"/\"T\"");
    const Mat S = io::matrix_from_json(input.at("S"));
    const int n = static_cast<int>(S.cols());
    const Mat T = io::matrix_from_json(input.at("T"), static_cast<int>(S.rows()), n);
    const InnerSpace X = input.has("gram") ? InnerSpace(io::matrix_from_json(input.at("gram"), n, n))
                                           : InnerSpace::euclidean(n);
    const NormDescriptor norm = input.has("codomain_norm")
                                    ? io::norm_from_json(input.at("codomain_norm"), static_cast<int>(S.rows()))
                                    : NormDescriptor{};
    const OperatorPair P(X, S, T, norm);
    const StCriterion c = st_criterion(P);
    v.add("injective", c.injective_ok);
    v.add("range", c.range_ok);
    v.add("norm", c.norm_ok, Json{{"evaluated", c.norm_evaluated}});
    const bool relation = is_m_accretive_linear(st_relation(P));
    v.add("relation_agrees", relation == c.holds, Json{{"relation_m_accretive", relation}});
    out.results = st_json(c);
    out.results["codomain_norm"] = NormDescriptor::name(norm.kind);
    if (const auto C = st_cayley_matrix(P)) out.results["cayley_matrix"] = io::to_json(*C);
    return out;
  }
  if (input.has("gram") || input.has("codomain_norm")) {
    throw SchemaError("st-criterion: \"gram\" and \"codomain_norm\" need \"S\" and \"T\"");
  }
  const std::size_t pairs = input.count("random_pairs", 1000);
  std::uniform_int_distribution<int> pick(0, 5);
  std::size_t disagreements = 0, holds = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const InnerSpace X = i % 2 ? InnerSpace(random_spd(rng, 2)) : InnerSpace::euclidean(2);
    Mat S = random_matrix(rng, 2, 2), T = random_matrix(rng, 2, 2);
    switch (pick(rng)) {
      case 0: T = S * random_spd(rng, 2); break;
      case 1: S.row(1) = S.row(0); T.row(1) = T.row(0); break;
      default: break;
    }
    NormDescriptor n;
    n.kind = i % 4 == 1 ? NormDescriptor::Kind::L1 : (i % 4 == 3 ? NormDescriptor::Kind::LInf : NormDescriptor::Kind::Euclidean);
    const OperatorPair P(X, S, T, n);
    const bool c = st_criterion(P).holds;
    disagreements += c != is_m_accretive_linear(st_relation(P));
    holds += c;
  }
  v.add("agreement", disagreements == 0, Json{{"disagreements", disagreements}});

  // scalar pairs: m-accretive iff st >= 0 and (s, t) != 0
  std::size_t sweep_bad = 0, sweep = 0;
  const InnerSpace X1 = InnerSpace::euclidean(1);
  for (int i = -8; i <= 8; ++i) {
    for (int j = -8; j <= 8; ++j) {
      const double s = i / 4.0, t = j / 4.0;
      const OperatorPair P(X1, Mat::Constant(1, 1, s), Mat::Constant(1, 1, t));
      const bool expected = s * t >= 0.0 && (i != 0 || j != 0);
      sweep_bad += st_criterion(P).holds != expected;
      if (i != 0 || j != 0) sweep_bad += is_m_accretive_linear(st_relation(P)) != expected;
      ++sweep;
    }
  }
  v.add("scalar_sweep", sweep_bad == 0, Json{{"mismatches", sweep_bad}});
  out.results["random_pairs"] = pairs;
  out.results["holds"] = holds;
  out.results["disagreements"] = disagreements;
  out.results["scalar_pairs"] = sweep;
  return out;
}

// Membership by every available description against the f description.
struct AgreementTally {
  std::size_t states = 0;
  std::size_t members = 0;
  std::size_t disagreements = 0;
};

void tally_agreement(const BlockRealization& R, const std::vector<const BlockRealization*>& others, const BlockState& s,
                     double tol, AgreementTally& t) {
  std::vector<std::optional<bool>> answers{R.member_by_f(s, tol), R.member_by_h(s, tol), R.member_by_relation(s, tol),
                                           R.member_by_pair(s, tol)};
  for (const auto* o : others) answers.emplace_back(o->contains(s, tol));
  std::optional<bool> ref;
  for (const auto& a : answers) {
    if (!a) continue;
    if (!ref) ref = a;
    else t.disagreements += *a != *ref;
  }
  ++t.states;
  t.members += ref.value_or(false);
}

struct ResolveTally {
  double residual = 0.0;
  std::size_t outside = 0;
  double expansion = 0.0;  // max of |s1 - s2| - |f1 - f2|
  std::size_t failures = 0;
};

void tally_resolve(const BlockRealization& R, const BlockState& f1, const BlockState& f2, double tau, double tol,
                   ResolveTally& t) {
  const Context& ctx = R.context();
  try {
    const BlockState s1 = blockop::block_resolve(R, f1, tau);
    const BlockState s2 = blockop::block_resolve(R, f2, tau);
    t.residual = std::max(t.residual, blockop::state_norm(ctx, s1 + tau * blockop::apply_block(s1) - f1) /
                                          (1.0 + blockop::state_norm(ctx, f1)));
    t.outside += !R.contains(s1, 10.0 * tol) + !R.contains(s2, 10.0 * tol);
    t.expansion = std::max(t.expansion, blockop::state_norm(ctx, s1 - s2) - blockop::state_norm(ctx, f1 - f2));
  } catch (const std::exception&) {
    ++t.failures;
  }
}

Result block_equivalence(const Json& in, const Tolerances& tol, Rng& rng, Verdicts& v) {
  const Input input(in, "block-equivalence", {"interval", "realization", "states", "contractions", "tau", "rhs"});
  const Context ctx(input.interval());
  const InnerSpace X = blockop::bd_space(ctx);
  const std::size_t states = input.count("states", 1000);
  std::uniform_real_distribution<double> ut(0.1, 2.0);
  Result out;
  AgreementTally agree;
  ResolveTally res;

  const auto sample_state = [&](const BlockRealization& R, std::size_t i) {
    if (i % 2 == 0) {
      return blockop::make_state(ctx, R.random_member_data(rng), random_exppoly(rng, 2), random_exppoly(rng, 2));
    }
    return random_state(rng);
  };

  if (input.has("realization")) {
    if (input.has("contractions")) throw SchemaError("block-equivalence: \"contractions\" excludes \"realization\"");
    const BlockRealization R = io::realization_from_json(ctx, input.at("realization"));
    const double tau = input.positive("tau", 1.0);
    v.add("m_accretive", R.m_accretive());
    for (std::size_t i = 0; i < states; ++i) tally_agreement(R, {}, sample_state(R, i), tol["membership"], agree);
    v.add("descriptions_agree", agree.disagreements == 0, Json{{"disagreements", agree.disagreements}});
    if (input.has("rhs")) {
      const BlockState rhs = io::block_state_from_json(input.at("rhs"));
      try {
        const BlockState s = blockop::block_resolve(R, rhs, tau);
        const double r = blockop::state_norm(ctx, s + tau * blockop::apply_block(s) - rhs);
        bound_verdict(v, "resolve_residual", r, tol["residual"] * (1.0 + blockop::state_norm(ctx, rhs)));
        v.add("resolve_membership", R.contains(s, 10.0 * tol["membership"]));
        out.results["solution"] = io::to_json(s);
      } catch (const std::exception& e) {
        v.fail("resolve", e);
      }
    } else {
      for (int i = 0; i < 10; ++i) tally_resolve(R, random_state(rng), random_state(rng), tau, tol["membership"], res);
    }
    out.results["kind"] = blockop::kind_name(R.kind());
    out.results["tau"] = tau;
  } else {
    if (input.has("rhs") || input.has("tau")) throw SchemaError("block-equivalence: \"rhs\"/\"tau\" need \"realization\"");
    const std::size_t n = input.count("contractions", 50);
    for (std::size_t trial = 0; trial < n; ++trial) {
      const Mat F = random_contraction(rng, X);
      const auto R = BlockRealization::from_contraction(ctx, ContractionMap::linear(X, F));
      const auto Rh = BlockRealization::from_kernel_map(ctx, *R.h());
      const auto RM = BlockRealization::from_relation(ctx, *R.relation());
      const auto RP = BlockRealization::from_pair(ctx, *R.pair());
      for (std::size_t i = 0; i < states; ++i) tally_agreement(R, {&Rh, &RM, &RP}, sample_state(R, i), tol["membership"], agree);
      const double tau = ut(rng);
      for (int i = 0; i < 10; ++i) tally_resolve(trial % 2 ? RP : R, random_state(rng), random_state(rng), tau, tol["membership"], res);
    }
    v.add("descriptions_agree", agree.disagreements == 0, Json{{"disagreements", agree.disagreements}});
    out.results["contractions"] = n;
  }
  if (!input.has("rhs")) {
    v.add("resolve_solvable", res.failures == 0, Json{{"failures", res.failures}});
    bound_verdict(v, "resolve_residual", res.residual, tol["residual"]);
    v.add("resolve_membership", res.outside == 0, Json{{"outside", res.outside}});
    bound_verdict(v, "resolvent_contraction", std::max(0.0, res.expansion), tol["residual"]);
  }
  if (!input.has("realization")) {
    // M = identity with rhs (e^t, e^t) gives (e^t/2, e^t/2)
    const ExpPoly ep = ExpPoly::exponential(1.0);
    const auto id = BlockRealization::from_relation(ctx, LinearRelation::graph(X, Mat::Identity(2, 2)));
    const BlockState s = blockop::block_resolve(id, {ep, ep}, 1.0);
    const double err = std::max(l2_norm(s.u - 0.5 * ep, ctx.interval()), l2_norm(s.v - 0.5 * ep, ctx.interval()));
    bound_verdict(v, "worked_example", err, tol["example"]);
  }
  out.results["interval"] = io::to_json(ctx.interval());
  out.results["states"] = agree.states;
  out.results["members"] = agree.members;
  out.results["max_resolve_residual"] = res.residual;
  return out;
}

Result wave_impedance(const Json& in, const Tolerances& tol, Rng& rng, Verdicts& v) {
  const Input input(in, "wave-impedance", {"interval", "K", "tau", "steps", "initial", "pairs"});
  const Context ctx(input.interval());
  const impedance1d::ImpedanceK K(input.has("K") ? io::matrix_from_json(input.at("K"), 2, 2) : Mat(Mat::Identity(2, 2)));
  const evolution::SchemeConfig cfg{input.positive("tau", 0.05), input.count("steps", 50, 1, 100000), tol["energy"]};
  const std::size_t pairs = input.count("pairs", 1000);
  const ExpPoly ep = ExpPoly::exponential(1.0), em = ExpPoly::exponential(-1.0);
  const BlockState initial =
      input.has("initial") ? io::block_state_from_json(input.at("initial")) : BlockState{ep + 0.5 * em, ep - 0.5 * em};

  Result out;
  const impedance1d::EquivalenceReport eq = impedance1d::check_equivalence(ctx, K, rng, pairs);
  v.add("equivalence", eq.agrees());
  bound_verdict(v, "energy_identity", eq.max_energy_defect, tol["identity"]);
  Json e = Json::object();
  e["accretive_K"] = eq.accretive_K;
  e["realisation_accretive_sampled"] = eq.realisation_accretive_sampled;
  e["resolvent_solvable"] = eq.resolvent_solvable;
  e["min_pairing"] = eq.min_pairing;
  e["max_energy_defect"] = eq.max_energy_defect;
  e["max_resolve_residual"] = eq.max_resolve_residual;
  out.results["equivalence"] = e;
  out.results["tau"] = cfg.tau;
  out.results["steps"] = cfg.steps;

  try {
    evolution::TrajectoryRecord<BlockState> rec;
    const evolution::WaveReport w = evolution::wave_energy_run(ctx, K, initial, cfg, &rec);
    v.add("energy_nonincreasing", w.nonincreasing(),
          Json{{"first_increase_step", w.first_increase ? Json(*w.first_increase) : Json(nullptr)}});
    out.results["first_increase_step"] = w.first_increase ? Json(*w.first_increase) : Json(nullptr);
    out.results["energies"] = w.energies;
    std::ostringstream csv;
    evolution::write_csv(csv, rec.timestamps, rec.norms, nullptr, &w.energies);
    out.csv = csv.str();
  } catch (const std::exception& ex) {
    v.fail("energy_run", ex);
  }
  return out;
}

template <class State>
void run_evolution(const evolution::Resolvent<State>& resolvent, const State& u0, const State& v0,
                   const evolution::SchemeConfig& cfg, const evolution::NormFn<State>& norm,
                   const evolution::DistanceFn<State>& dist, bool block, Verdicts& v, Result& out,
                   const std::function<Json(const State&)>& to_json) {
  evolution::TrajectoryRecord<State> ru, rv;
  try {
    ru = evolution::evolve(resolvent, u0, cfg, norm);
    rv = evolution::evolve(resolvent, v0, cfg, norm);
  } catch (const StepFailed& e) {
    v.add("steps", false, Json{{"error", e.what()}, {"step", e.step()}});
    return;
  }
  v.add("steps", true);
  std::vector<double> d;
  std::optional<std::size_t> first;
  for (std::size_t k = 0; k < ru.states.size(); ++k) {
    d.push_back(dist(ru.states[k], rv.states[k]));
    if (k > 0 && !first && d[k] > d[k - 1] + cfg.tol * (1.0 + d[k - 1])) first = k;
  }
  v.add("contraction", !first, Json{{"first_violation_step", first ? Json(*first) : Json(nullptr)}});
  out.results["final_state"] = to_json(ru.states.back());
  out.results["final_norm"] = ru.norms.back();
  out.results["norms"] = ru.norms;
  out.results["distances"] = d;
  std::ostringstream csv;
  std::vector<double> energy;
  for (double n : ru.norms) energy.push_back(n * n);
  evolution::write_csv(csv, ru.timestamps, ru.norms, &d, block ? &energy : nullptr);
  out.csv = csv.str();
}

Result evolve(const Json& in, const Tolerances& tol, Rng&, Verdicts& v) {
  const Input input(in, "evolve", {"interval", "g", "lipschitz_cert", "realization", "u0", "v0", "tau", "steps"});
  const evolution::SchemeConfig cfg{input.positive("tau", 0.1), input.count("steps", 10, 1, 100000), tol["monotone"]};
  Result out;
  out.results["tau"] = cfg.tau;
  out.results["steps"] = cfg.steps;
  if (input.has("realization")) {
    if (input.has("g") || input.has("lipschitz_cert")) throw SchemaError("evolve: \"realization\" excludes \"g\"");
    const Context ctx(input.interval());
    const BlockRealization R = io::realization_from_json(ctx, input.at("realization"));
    if (!input.has("u0")) throw SchemaError("evolve: needs \"u0\"");
    const BlockState u0 = io::block_state_from_json(input.at("u0"));
    const BlockState v0 = input.has("v0") ? io::block_state_from_json(input.at("v0")) : BlockState{};
    v.add("admissible", R.m_accretive());
    out.results["interval"] = io::to_json(ctx.interval());
    run_evolution<BlockState>(evolution::block_resolvent(R), u0, v0, cfg, evolution::state_norm_fn(ctx),
                              evolution::state_distance_fn(ctx), true, v, out,
                              [](const BlockState& s) { return io::to_json(s); });
    return out;
  }
  const Realization R = scalar_realization(input);
  const Interval& I = R.context().interval();
  const ExpPoly u0 = input.has("u0") ? io::exppoly_from_json(input.at("u0")) : ExpPoly::exponential(1.0);
  const ExpPoly v0 = input.has("v0") ? io::exppoly_from_json(input.at("v0")) : ExpPoly{};
  v.add("admissible", R.admissible());
  out.results["interval"] = io::to_json(I);
  run_evolution<ExpPoly>(evolution::scalar_resolvent(R), u0, v0, cfg, evolution::l2_norm_fn(I),
                         evolution::l2_distance_fn(I), false, v, out, [](const ExpPoly& f) { return io::to_json(f); });
  return out;
}

// ---------------------------------------------------------------------------

using CommandFn = Result (*)(const Json&, const Tolerances&, Rng&, Verdicts&);

struct Command {
  const char* name;
  CommandFn fn;
  Tolerances::Defaults tolerances;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> table{
      {"check-decomposition", check_decomposition,
       {{"reconstruction", 1e-10}, {"orthogonality", 1e-10}, {"identity", 1e-10}, {"projection", 1e-10}}},
      {"lipschitz-transfer", lipschitz_transfer, {{"identity", 1e-11}}},
      {"resolve", resolve, {{"residual", 1e-9}, {"domain", 1e-9}}},
      {"cayley", cayley, {{"roundtrip", 1e-9}, {"relation", 1e-9}}},
      {"st-criterion", st_criterion_cmd, {}},
      {"block-equivalence", block_equivalence, {{"membership", 1e-9}, {"residual", 1e-9}, {"example", 1e-10}}},
      {"wave-impedance", wave_impedance, {{"energy", 1e-10}, {"identity", 1e-9}}},
      {"evolve", evolve, {{"monotone", 1e-10}}},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& c : commands()) n.emplace_back(c.name);
    return n;
  }();
  return names;
}

RunSpec parse_run_spec(const Json& j, const std::filesystem::path& base) {
  io::require_keys(j, {"command", "input", "input_path", "seed", "tolerances"}, "run spec");
  RunSpec spec;
  if (j.contains("command")) {
    if (!j["command"].is_string()) throw SchemaError("run spec: \"command\" must be a string");
    spec.command = j["command"].get<std::string>();
  }
  if (j.contains("input") && j.contains("input_path")) {
    throw SchemaError("run spec: give at most one of \"input\" and \"input_path\"");
  }
  if (j.contains("input")) {
    spec.input = j["input"];
  } else if (j.contains("input_path")) {
    if (!j["input_path"].is_string()) throw SchemaError("run spec: \"input_path\" must be a string");
    std::filesystem::path p = j["input_path"].get<std::string>();
    if (p.is_relative()) p = base / p;
    std::ifstream is(p);
    if (!is) throw SchemaError("run spec: cannot open input file " + p.string());
    try {
      spec.input = Json::parse(is);
    } catch (const Json::parse_error& e) {
      throw SchemaError("input file " + p.string() + ": " + e.what());
    }
  }
  if (!spec.input.is_object()) throw SchemaError("run spec: input must be an object");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
      throw SchemaError("run spec: \"seed\" must be a non-negative integer");
    }
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("tolerances")) {
    if (!j["tolerances"].is_object()) throw SchemaError("run spec: \"tolerances\" must be an object");
    spec.tolerances = j["tolerances"];
  }
  return spec;
}

Outcome run(const RunSpec& spec, std::optional<double> tol_override) {
  const auto& table = commands();
  const auto it = std::find_if(table.begin(), table.end(), [&](const Command& c) { return spec.command == c.name; });
  if (it == table.end()) throw SchemaError("unknown command \"" + spec.command + "\"");
  const Tolerances tol(it->tolerances, spec.tolerances, tol_override);

  Rng rng(spec.seed);
  Verdicts verdicts;
  Result result;
  try {
    result = it->fn(spec.input, tol, rng, verdicts);
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    verdicts.fail("run", e);
  }

  Outcome out;
  out.pass = verdicts.pass();
  Json& r = out.report;
  r["command"] = spec.command;
  r["seed"] = spec.seed;
  r["tolerances"] = tol.to_json();
  r["pass"] = out.pass;
  r["first_failure"] = verdicts.first_failure() ? Json(*verdicts.first_failure()) : Json(nullptr);
  r["verdicts"] = verdicts.list();
  r["results"] = result.results;
  out.csv = std::move(result.csv);
  return out;
}

}  // namespace accretive::cli
