#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hnag/fixtures.hpp"

namespace hnag::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  // a certificate failed or a run diverged
inline constexpr int kExitUsage = 2;

/// One configuration for `run`, `flow` and `validate`. JSON keys are the flag
/// names with dashes turned into underscores.
struct RunConfig {
  std::string fixture;  // quadratic | logistic | lasso | l1 | path to a fixture .json
  std::size_t dim = 10;
  std::optional<double> mu;  // quadratic spectrum floor, logistic ridge
  std::optional<double> L;   // quadratic spectrum ceiling
  double gamma0 = 1.0;
  std::vector<std::string> variants{"explicit"};
  std::size_t max_iter = 1000;
  double grad_tol = 0.0;
  double gap_tol = 0.0;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::vector<std::string> format{"csv", "json"};
  std::string start = "ones";     // ones | reference
  std::optional<double> alpha;    // semi-implicit step size
  double t_end = 5.0;
  double tol = 1e-8;
  std::size_t samples = 201;
  std::optional<double> beta;     // constant flow beta; default 1/sqrt(L gamma0)
  std::size_t probes = 100;

  bool operator==(const RunConfig&) const = default;
};

/// Checks ranges and names; throws std::invalid_argument naming the key.
void validate_config(const RunConfig& cfg);

std::string config_to_json(const RunConfig& cfg);
/// Strict: unknown keys and wrong types are rejected.
RunConfig config_from_json(const std::string& text);

/// The default output directory: $HNAG_OUT_DIR when set, "." otherwise.
std::string default_out_dir();

/// Builds the fixture a config selects (generated, or loaded from a path).
Fixture make_fixture(const RunConfig& cfg);

/// The fixtures the project ships: the problems the acceptance suite and the
/// README examples use, by name.
std::vector<std::pair<std::string, Fixture>> shipped_fixtures();

/// Each command writes its artifacts under cfg.out and a summary to `out`.
int run_benchmark(const RunConfig& cfg, std::ostream& out);
int run_flow(const RunConfig& cfg, std::ostream& out);
int run_validate(const RunConfig& cfg, std::ostream& out);

/// Full command-line entry point (argv[0] is the program name).
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hnag::cli
