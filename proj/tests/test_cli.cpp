#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hnag_cli/cli.hpp"

namespace fs = std::filesystem;
using hnag::cli::RunConfig;

namespace {

struct Invocation {
  int status = 0;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hnag");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Invocation r;
  r.status = hnag::cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hnag_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::size_t csv_rows(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) - 1;
}

}  // namespace

TEST_CASE("minimal flags give a valid run") {
  const auto dir = scratch("minimal");
  const auto r = invoke({"run", "--fixture", "quadratic", "--dim", "2", "--variants", "explicit",
                         "--max-iter", "50", "--out", dir.string()});
  CHECK(r.status == 0);
  CHECK(fs::exists(dir / "trace_explicit.csv"));
  CHECK(fs::exists(dir / "report_explicit.json"));
  CHECK(r.out.find("explicit") != std::string::npos);
}

TEST_CASE("missing fixture is a usage error") {
  const auto r = invoke({"run", "--variants", "explicit"});
  CHECK(r.status == hnag::cli::kExitUsage);
  CHECK(r.err.find("fixture required") != std::string::npos);

  CHECK(invoke({"run", "--fixture", "cubic"}).status == hnag::cli::kExitUsage);
  CHECK(invoke({"run", "--fixture", "quadratic", "--variants", "momentum"}).status ==
        hnag::cli::kExitUsage);
  CHECK(invoke({"run", "--fixture", "quadratic", "--format", "xml"}).status == hnag::cli::kExitUsage);
  CHECK(invoke({"run", "--fixture", "quadratic", "--bogus", "1"}).status == hnag::cli::kExitUsage);
  CHECK(invoke({}).status == hnag::cli::kExitUsage);
}

TEST_CASE("config JSON round trip and strictness") {
  RunConfig cfg;
  cfg.fixture = "lasso";
  cfg.dim = 7;
  cfg.gamma0 = 0.25;
  cfg.variants = {"composite_split", "gradient_mapping"};
  cfg.max_iter = 321;
  cfg.gap_tol = 1e-7;
  cfg.seed = 99;
  cfg.out = "somewhere";
  cfg.format = {"json"};
  cfg.alpha = 3.5;
  cfg.beta = 0.125;
  cfg.tol = 1e-9;
  CHECK(hnag::cli::config_from_json(hnag::cli::config_to_json(cfg)) == cfg);

  RunConfig q;
  q.fixture = "quadratic";
  q.mu = 0.1;
  q.L = 3.0;
  CHECK(hnag::cli::config_from_json(hnag::cli::config_to_json(q)) == q);

  CHECK_THROWS_WITH_AS(hnag::cli::config_from_json(R"({"fixture":"l1","colour":1})"),
                       doctest::Contains("colour"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(hnag::cli::config_from_json(R"({"dim":"ten"})"), doctest::Contains("dim"),
                       std::invalid_argument);
  CHECK_THROWS_AS(hnag::cli::config_from_json("[1,2]"), std::invalid_argument);
  CHECK_THROWS_AS(hnag::cli::config_from_json("{"), std::invalid_argument);
}

TEST_CASE("flags override the config file") {
  const auto dir = scratch("override");
  RunConfig cfg;
  cfg.fixture = "quadratic";
  cfg.dim = 3;
  cfg.variants = {"explicit", "extra_gradient"};
  cfg.max_iter = 10;
  cfg.out = (dir / "from_file").string();
  std::ofstream(dir / "cfg.json") << hnag::cli::config_to_json(cfg);

  const auto r = invoke({"run", "--config", (dir / "cfg.json").string(), "--variants", "nag_flow_b",
                         "--out", (dir / "from_flag").string()});
  CHECK(r.status == 0);
  CHECK(fs::exists(dir / "from_flag" / "trace_nag_flow_b.csv"));
  CHECK_FALSE(fs::exists(dir / "from_flag" / "trace_explicit.csv"));
  CHECK_FALSE(fs::exists(dir / "from_file"));
  CHECK(csv_rows(dir / "from_flag" / "trace_nag_flow_b.csv") == 11);
}

TEST_CASE("HNAG_OUT_DIR sets the default output directory") {
  const auto dir = scratch("env");
  ::setenv("HNAG_OUT_DIR", dir.string().c_str(), 1);
  CHECK(hnag::cli::default_out_dir() == dir.string());
  const auto r = invoke({"run", "--fixture", "quadratic", "--dim", "2", "--max-iter", "5"});
  ::unsetenv("HNAG_OUT_DIR");
  CHECK(r.status == 0);
  CHECK(fs::exists(dir / "trace_explicit.csv"));
  CHECK(hnag::cli::default_out_dir() == ".");
}

TEST_CASE("equilibrium start finishes in zero iterations") {
  const auto dir = scratch("equilibrium");
  const auto r = invoke({"run", "--fixture", "quadratic", "--dim", "4", "--variants",
                         "explicit,extra_gradient,semi_implicit,nag_flow_a,nag_flow_b", "--start",
                         "reference", "--gap-tol", "1e-12", "--out", dir.string()});
  CHECK(r.status == 0);
  for (const char* v : {"explicit", "extra_gradient", "semi_implicit", "nag_flow_a", "nag_flow_b"}) {
    CHECK(csv_rows(dir / ("trace_" + std::string(v) + ".csv")) == 1);
  }
}

TEST_CASE("extra-gradient needs fewer iterations than the explicit scheme") {
  const auto dir = scratch("ordering");
  const auto r = invoke({"run", "--fixture", "quadratic", "--mu", "1", "--L", "100", "--variants",
                         "explicit,extra_gradient,nag_flow_b", "--gap-tol", "1e-9", "--max-iter",
                         "5000", "--out", dir.string()});
  CHECK(r.status == 0);
  for (const char* v : {"explicit", "extra_gradient", "nag_flow_b"}) {
    const std::string rep = slurp(dir / ("report_" + std::string(v) + ".json"));
    CHECK(rep.find("\"pass\": true") != std::string::npos);
  }
  CHECK(csv_rows(dir / "trace_extra_gradient.csv") < csv_rows(dir / "trace_explicit.csv"));
}

TEST_CASE("composite schemes on the lasso fixture pass") {
  const auto dir = scratch("lasso");
  const auto r = invoke({"run", "--fixture", "lasso", "--variants",
                         "composite_split,composite_alt,gradient_mapping", "--max-iter", "300",
                         "--out", dir.string()});
  CHECK(r.status == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
}

TEST_CASE("a misdeclared L diverges with a nonzero status") {
  const auto dir = scratch("diverge");
  auto fx = hnag::quadratic_fixture(4, 1.0, 100.0, 3);
  fx.L = 0.01;
  hnag::save_fixture(fx, (dir / "bad.json").string());
  const auto r = invoke({"run", "--fixture", (dir / "bad.json").string(), "--max-iter", "100000",
                         "--out", dir.string()});
  CHECK(r.status == hnag::cli::kExitFailed);
  CHECK(r.out.find("diverged") != std::string::npos);
}

TEST_CASE("identical configs give identical traces") {
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  const std::vector<std::string> common{"run", "--fixture", "logistic", "--dim", "5", "--seed", "4",
                                        "--variants", "explicit,nag_flow_b", "--max-iter", "200"};
  auto args_a = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  auto args_b = common;
  args_b.insert(args_b.end(), {"--out", b.string()});
  CHECK(invoke(args_a).status == 0);
  CHECK(invoke(args_b).status == 0);
  CHECK(slurp(a / "trace_explicit.csv") == slurp(b / "trace_explicit.csv"));
  CHECK(slurp(a / "trace_nag_flow_b.csv") == slurp(b / "trace_nag_flow_b.csv"));
}

TEST_CASE("flow subcommand") {
  const auto dir = scratch("flow");
  auto r = invoke({"flow", "--fixture", "quadratic", "--dim", "3", "--mu", "1", "--L", "10",
                   "--t-end", "5", "--out", dir.string()});
  CHECK(r.status == 0);
  CHECK(slurp(dir / "flow.csv").rfind("t,L,grad_norm,gamma\n", 0) == 0);
  CHECK(slurp(dir / "decay_report.json").find("\"pass\": true") != std::string::npos);

  const auto eq = scratch("flow_eq");
  r = invoke({"flow", "--fixture", "quadratic", "--dim", "3", "--mu", "1", "--L", "10", "--gamma0",
              "1", "--start", "reference", "--out", eq.string()});
  CHECK(r.status == 0);
  std::istringstream rows(slurp(eq / "flow.csv"));
  std::string line;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    const auto first = line.find(',');
    const auto second = line.find(',', first + 1);
    CHECK(std::abs(std::stod(line.substr(first + 1, second - first - 1))) <= 1e-12);
  }

  CHECK(invoke({"flow", "--fixture", "lasso", "--out", dir.string()}).status == hnag::cli::kExitUsage);
}

TEST_CASE("validate subcommand") {
  const auto r = invoke({"validate", "--fixture", "lasso", "--probes", "20"});
  CHECK(r.status == 0);
  CHECK(r.out.find("\"passed\": true") != std::string::npos);
}

TEST_CASE("shipped fixtures are named and distinct") {
  const auto fixtures = hnag::cli::shipped_fixtures();
  CHECK(fixtures.size() >= 4);
  for (std::size_t i = 0; i < fixtures.size(); ++i) {
    for (std::size_t j = i + 1; j < fixtures.size(); ++j) {
      CHECK(fixtures[i].first != fixtures[j].first);
    }
  }
}
