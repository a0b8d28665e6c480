#include "accretive/io.hpp"

#include "accretive/errors.hpp"

#include <cmath>
#include <cstdio>
#include <string_view>

namespace accretive::io {

namespace {

void dump_into(std::string& out, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_into(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_into(out, e, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      return;
    }
    default:
      out += j.dump();
  }
}

std::string describe(const std::string& where) { return where.empty() ? "input" : where; }

}  // namespace

std::string dump(const Json& j, int indent) {
  std::string out;
  dump_into(out, j, indent, 0);
  return out;
}

void require_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw SchemaError(describe(where) + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw SchemaError(describe(where) + ": unknown field \"" + it.key() + "\"");
  }
}

double number_from_json(const Json& j, const std::string& where) {
  if (!j.is_number()) throw SchemaError(describe(where) + ": expected a number");
  return j.get<double>();
}

Json to_json(const ExpPoly& f) {
  Json terms = Json::array();
  for (const Term& term : f.terms()) {
    // serialised coefficients are always monomials in t
    const Term t = recentre(term, 0.0);
    Json c = Json::array();
    for (double x : t.coeffs) c.push_back(x);
    terms.push_back(Json{{"rate", t.rate}, {"coeffs", c}});
  }
  return terms;
}

ExpPoly exppoly_from_json(const Json& j) {
  if (j.is_number()) return ExpPoly::constant(j.get<double>());
  if (!j.is_array()) throw SchemaError("ExpPoly: expected an array of terms or a number");
  std::vector<Term> terms;
  for (const auto& t : j) {
    require_keys(t, {"rate", "coeffs"}, "ExpPoly term");
    if (!t.contains("rate") || !t.contains("coeffs") || !t["coeffs"].is_array()) {
      throw SchemaError("ExpPoly term: needs \"rate\" and array \"coeffs\"");
    }
    Term term{number_from_json(t["rate"], "ExpPoly rate"), {}};
    for (const auto& c : t["coeffs"]) term.coeffs.push_back(number_from_json(c, "ExpPoly coefficient"));
    terms.push_back(std::move(term));
  }
  try {
    return ExpPoly(std::move(terms));
  } catch (const std::exception& e) {
    throw SchemaError(std::string("ExpPoly: ") + e.what());
  }
}

Json to_json(const Interval& I) { return Json{{"a", I.a()}, {"b", I.b()}}; }

Interval interval_from_json(const Json& j) {
  require_keys(j, {"a", "b"}, "interval");
  if (!j.contains("a") || !j.contains("b")) throw SchemaError("interval: needs \"a\" and \"b\"");
  try {
    return Interval(number_from_json(j["a"], "interval.a"), number_from_json(j["b"], "interval.b"));
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("interval: ") + e.what());
  }
}

Json to_json(const Mat& M) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) r.push_back(M(i, k));
    rows.push_back(r);
  }
  return rows;
}

Json to_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Mat matrix_from_json(const Json& j, int rows, int cols) {
  if (!j.is_array() || j.empty()) throw SchemaError("matrix: expected a non-empty array of rows");
  const int r = static_cast<int>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw SchemaError("matrix: rows must be non-empty arrays");
  const int c = static_cast<int>(j[0].size());
  Mat M(r, c);
  for (int i = 0; i < r; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != c) throw SchemaError("matrix: ragged rows");
    for (int k = 0; k < c; ++k) M(i, k) = number_from_json(j[i][k], "matrix entry");
  }
  if ((rows >= 0 && r != rows) || (cols >= 0 && c != cols)) {
    throw SchemaError("matrix: expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                      std::to_string(r) + "x" + std::to_string(c));
  }
  if (!M.allFinite()) throw SchemaError("matrix: entries must be finite");
  return M;
}

derivative::BoundaryFunction boundary_function_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw SchemaError("boundary function: needs a string \"kind\"");
  }
  const std::string kind = j["kind"].get<std::string>();
  derivative::BoundaryFunction g;
  try {
    if (kind == "linear") {
      require_keys(j, {"kind", "slope", "offset", "lipschitz_cert"}, "boundary function");
      if (!j.contains("slope")) throw SchemaError("boundary function: linear needs \"slope\"");
      const double offset = j.contains("offset") ? number_from_json(j["offset"], "offset") : 0.0;
      g = derivative::BoundaryFunction::linear(number_from_json(j["slope"], "slope"), offset);
    } else if (kind == "scaledsin") {
      require_keys(j, {"kind", "amplitude", "lipschitz_cert"}, "boundary function");
      if (!j.contains("amplitude")) throw SchemaError("boundary function: scaledsin needs \"amplitude\"");
      g = derivative::BoundaryFunction::scaled_sin(number_from_json(j["amplitude"], "amplitude"));
    } else if (kind == "table") {
      require_keys(j, {"kind", "knots", "values", "lipschitz_cert"}, "boundary function");
      if (!j.contains("knots") || !j.contains("values") || !j["knots"].is_array() || !j["values"].is_array()) {
        throw SchemaError("boundary function: table needs arrays \"knots\" and \"values\"");
      }
      std::vector<double> knots, values;
      for (const auto& x : j["knots"]) knots.push_back(number_from_json(x, "knot"));
      for (const auto& x : j["values"]) values.push_back(number_from_json(x, "value"));
      g = derivative::BoundaryFunction::table(std::move(knots), std::move(values));
    } else {
      throw SchemaError("boundary function: unknown kind \"" + kind + "\"");
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("boundary function: ") + e.what());
  }
  if (j.contains("lipschitz_cert")) {
    const double c = number_from_json(j["lipschitz_cert"], "lipschitz_cert");
    if (!(c >= 0.0)) throw SchemaError("boundary function: lipschitz_cert must be non-negative");
    g.lipschitz_cert = c;
  }
  return g;
}

derivative::Realization scalar_realization_from_json(const Json& j) {
  require_keys(j, {"interval", "g", "lipschitz_cert"}, "realisation");
  if (!j.contains("g")) throw SchemaError("realisation: needs \"g\"");
  const Interval I = j.contains("interval") ? interval_from_json(j["interval"]) : Interval(0.0, 1.0);
  derivative::BoundaryFunction g = boundary_function_from_json(j["g"]);
  if (j.contains("lipschitz_cert")) {
    const double c = number_from_json(j["lipschitz_cert"], "lipschitz_cert");
    if (!(c >= 0.0)) throw SchemaError("realisation: lipschitz_cert must be non-negative");
    g.lipschitz_cert = c;
  }
  return derivative::Realization(derivative::Context(I), std::move(g));
}

Json to_json(const blockop::BlockState& s) { return Json{{"u", to_json(s.u)}, {"v", to_json(s.v)}}; }

blockop::BlockState block_state_from_json(const Json& j) {
  require_keys(j, {"u", "v"}, "block state");
  if (!j.contains("u") || !j.contains("v")) throw SchemaError("block state: needs \"u\" and \"v\"");
  return {exppoly_from_json(j["u"]), exppoly_from_json(j["v"])};
}

NormDescriptor norm_from_json(const Json& j, int dim) {
  NormDescriptor n;
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "euclidean") n.kind = NormDescriptor::Kind::Euclidean;
    else if (s == "l1") n.kind = NormDescriptor::Kind::L1;
    else if (s == "linf") n.kind = NormDescriptor::Kind::LInf;
    else throw SchemaError("codomain norm: unknown name \"" + s + "\"");
    return n;
  }
  require_keys(j, {"gram"}, "codomain norm");
  if (!j.contains("gram")) throw SchemaError("codomain norm: needs \"gram\"");
  n.kind = NormDescriptor::Kind::Gram;
  n.gram = matrix_from_json(j["gram"], dim, dim);
  return n;
}

blockop::BlockRealization realization_from_json(const derivative::Context& ctx, const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw SchemaError("realization: needs a string \"kind\"");
  }
  const std::string kind = j["kind"].get<std::string>();
  const InnerSpace X = blockop::bd_space(ctx);
  try {
    if (kind == "f") {
      require_keys(j, {"kind", "matrix", "map"}, "realization");
      if (j.contains("matrix") == j.contains("map")) {
        throw SchemaError("realization: kind f needs exactly one of \"matrix\" and \"map\"");
      }
      if (j.contains("matrix")) {
        return blockop::BlockRealization::from_contraction(ctx, ContractionMap::linear(X, matrix_from_json(j["matrix"], 2, 2)));
      }
      const Json& m = j["map"];
      require_keys(m, {"type", "amplitude"}, "realization map");
      if (!m.contains("type") || m["type"] != "sin" || !m.contains("amplitude")) {
        throw SchemaError("realization map: supported form is {\"type\": \"sin\", \"amplitude\": A}");
      }
      const double A = number_from_json(m["amplitude"], "amplitude");
      auto f = [A](const Vec& x) -> Vec { return A * x.array().sin().matrix(); };
      return blockop::BlockRealization::from_contraction(ctx, ContractionMap(X, f, std::abs(A)));
    }
    if (kind == "M") {
      require_keys(j, {"kind", "matrix"}, "realization");
      if (!j.contains("matrix")) throw SchemaError("realization: kind M needs \"matrix\"");
      return blockop::BlockRealization::from_relation(ctx, LinearRelation(X, matrix_from_json(j["matrix"], 4, -1)));
    }
    if (kind == "ST") {
      require_keys(j, {"kind", "S", "T", "codomain_norm"}, "realization");
      if (!j.contains("S") || !j.contains("T")) throw SchemaError("realization: kind ST needs \"S\" and \"T\"");
      const Mat S = matrix_from_json(j["S"], -1, 2);
      const Mat T = matrix_from_json(j["T"], static_cast<int>(S.rows()), 2);
      NormDescriptor n = j.contains("codomain_norm") ? norm_from_json(j["codomain_norm"], static_cast<int>(S.rows()))
                                                     : NormDescriptor{};
      return blockop::BlockRealization::from_pair(ctx, OperatorPair(X, S, T, n));
    }
  } catch (const SchemaError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("realization: ") + e.what());
  }
  throw SchemaError("realization: unknown kind \"" + kind + "\"");
}

}  // namespace accretive::io
