#pragma once

#include "accretive/io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace accretive::cli {

using io::Json;

/// One batch run. `input` is the command's own JSON object.
struct RunSpec {
  std::string command;
  Json input = Json::object();
  std::uint64_t seed = 42;
  Json tolerances = Json::object();
};

/// Reads {"command", "input" | "input_path", "seed", "tolerances"}; relative
/// input paths resolve against `base`. Throws SchemaError.
RunSpec parse_run_spec(const Json& j, const std::filesystem::path& base);

struct Outcome {
  Json report;
  std::string csv;  // empty when the command has no tabular output
  bool pass = false;
};

/// Executes the command. Malformed input throws SchemaError; numerical
/// failures become failed verdicts in the report.
Outcome run(const RunSpec& spec, std::optional<double> tol_override = std::nullopt);

const std::vector<std::string>& command_names();

}  // namespace accretive::cli
