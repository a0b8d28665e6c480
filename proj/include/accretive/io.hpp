#pragma once

#include "accretive/blockop.hpp"
#include "accretive/derivative.hpp"
#include "accretive/funcspace.hpp"
#include "accretive/relations.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>

namespace accretive::io {

using Json = nlohmann::ordered_json;

/// Serialises with insertion-ordered keys and every double as %.17g;
/// non-finite numbers become null.
std::string dump(const Json& j, int indent = 2);

/// Throws SchemaError naming the first key of `j` outside `allowed`.
void require_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where);

double number_from_json(const Json& j, const std::string& where);

/// [{"rate": r, "coeffs": [c0, c1, ...]}, ...]; a bare number is a constant.
Json to_json(const ExpPoly& f);
ExpPoly exppoly_from_json(const Json& j);

/// {"a": a, "b": b}
Json to_json(const Interval& I);
Interval interval_from_json(const Json& j);

/// Row-major nested arrays.
Json to_json(const Mat& M);
Mat matrix_from_json(const Json& j, int rows = -1, int cols = -1);
Json to_json(const Vec& v);

/// {"kind": "linear", "slope", "offset"} | {"kind": "scaledsin", "amplitude"} |
/// {"kind": "table", "knots", "values"}, each with an optional "lipschitz_cert" override.
derivative::BoundaryFunction boundary_function_from_json(const Json& j);

/// {"interval"?: Interval (default [0, 1]), "g": boundary function, "lipschitz_cert"?}
derivative::Realization scalar_realization_from_json(const Json& j);

/// {"u": ExpPoly, "v": ExpPoly}
Json to_json(const blockop::BlockState& s);
blockop::BlockState block_state_from_json(const Json& j);

/// "euclidean" | "l1" | "linf" | {"gram": [[..]]}
NormDescriptor norm_from_json(const Json& j, int dim);

/// {"kind": "f", "matrix": 2×2} | {"kind": "f", "map": {"type": "sin", "amplitude": A}} |
/// {"kind": "M", "matrix": 4×k basis} | {"kind": "ST", "S": 2×2, "T": 2×2, "codomain_norm"?}
blockop::BlockRealization realization_from_json(const derivative::Context& ctx, const Json& j);

}  // namespace accretive::io
