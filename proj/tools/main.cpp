#include "commands.hpp"

#include "accretive/errors.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using accretive::SchemaError;
using accretive::cli::Json;

namespace {

constexpr int kExitVerdict = 1;
constexpr int kExitSchema = 2;

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification suites and solvers for accretive boundary realisations"};
  std::string command;
  std::string spec_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string names;
  for (const auto& n : accretive::cli::command_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("command", command, "One of: " + names);
  app.add_option("--spec", spec_path, "Run spec JSON {command, input | input_path, seed, tolerances}");
  app.add_option("--out", out_dir, "Directory for report.json and data.csv");
  app.add_option("--seed", seed, "Random seed (default 42)");
  app.add_option("--tol", tol, "Override every tolerance of the command");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitSchema;
  }

  accretive::cli::Outcome outcome;
  try {
    accretive::cli::RunSpec spec;
    if (!spec_path.empty()) {
      std::ifstream is(spec_path);
      if (!is) throw SchemaError("cannot open spec file " + spec_path);
      Json j;
      try {
        j = Json::parse(is);
      } catch (const Json::parse_error& e) {
        throw SchemaError("spec file " + spec_path + ": " + e.what());
      }
      spec = accretive::cli::parse_run_spec(j, fs::path(spec_path).parent_path());
    }
    if (!command.empty()) {
      if (!spec.command.empty() && spec.command != command) {
        throw SchemaError("command \"" + command + "\" conflicts with spec command \"" + spec.command + "\"");
      }
      spec.command = command;
    }
    if (spec.command.empty()) throw SchemaError("no command given; expected one of: " + names);
    if (seed) spec.seed = *seed;
    outcome = accretive::cli::run(spec, tol);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kExitSchema;
  }

  try {
    const fs::path out(out_dir);
    fs::create_directories(out);
    write_file(out / "report.json", accretive::io::dump(outcome.report) + "\n");
    if (!outcome.csv.empty()) write_file(out / "data.csv", outcome.csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerdict;
  }

  const Json& r = outcome.report;
  if (outcome.pass) {
    std::cout << r["command"].get<std::string>() << ": PASS\n";
    return 0;
  }
  std::cout << r["command"].get<std::string>() << ": FAIL (" << r["first_failure"].get<std::string>() << ")\n";
  return kExitVerdict;
}
