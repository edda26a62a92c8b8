#include "hnag_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hnag/diagnostics.hpp"
#include "hnag/flow.hpp"
#include "hnag/solvers.hpp"

namespace hnag::cli {


namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using flow::FlowParams;
using flow::FlowState;
using flow::IntegratorOptions;
using flow::Trajectory;
using flow::DecayReport;

namespace {

bool is_fixture_path(const std::string& name) {
  return name.size() > 5 && name.substr(name.size() - 5) == ".json";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << text;
}

std::string fixture_label(const RunConfig& cfg) {
  return is_fixture_path(cfg.fixture) ? fs::path(cfg.fixture).stem().string() : cfg.fixture;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

std::string default_out_dir() {
  const char* env = std::getenv("HNAG_OUT_DIR");
  return (env != nullptr && *env != '\0') ? std::string(env) : std::string(".");
}

void validate_config(const RunConfig& cfg) {
  require(!cfg.fixture.empty(), "fixture required");
  if (!is_fixture_path(cfg.fixture)) {
    static const std::set<std::string> kinds{"quadratic", "logistic", "lasso", "l1"};
    require(kinds.contains(cfg.fixture),
            "fixture: unknown kind '" + cfg.fixture + "' (quadratic, logistic, lasso, l1 or a .json path)");
  }
  require(cfg.dim >= 1 && cfg.dim <= 100, "dim: must be in [1, 100]");
  require(!cfg.mu || (std::isfinite(*cfg.mu) && *cfg.mu >= 0.0), "mu: must be nonnegative");
  require(!cfg.L || (std::isfinite(*cfg.L) && *cfg.L > 0.0), "L: must be positive");
  require(std::isfinite(cfg.gamma0) && cfg.gamma0 > 0.0, "gamma0: must be positive");
  require(!cfg.variants.empty(), "variants: at least one variant required");
  std::set<std::string> seen;
  for (const auto& v : cfg.variants) {
    parse_variant(v);
    require(seen.insert(v).second, "variants: '" + v + "' listed twice");
  }
  require(cfg.grad_tol >= 0.0, "grad_tol: must be nonnegative");
  require(cfg.gap_tol >= 0.0, "gap_tol: must be nonnegative");
  require(!cfg.out.empty(), "out: must not be empty");
  for (const auto& f : cfg.format) {
    require(f == "csv" || f == "json", "format: '" + f + "' is not csv or json");
  }
  require(cfg.start == "ones" || cfg.start == "reference", "start: must be ones or reference");
  require(!cfg.alpha || (std::isfinite(*cfg.alpha) && *cfg.alpha > 0.0), "alpha: must be positive");
  require(std::isfinite(cfg.t_end) && cfg.t_end > 0.0, "t_end: must be positive");
  require(cfg.tol > 1e-12 && cfg.tol < 1e-2, "tol: must be in (1e-12, 1e-2)");
  require(cfg.samples >= 2, "samples: must be at least 2");
  require(!cfg.beta || (std::isfinite(*cfg.beta) && *cfg.beta >= 0.0), "beta: must be nonnegative");
  require(cfg.probes >= 1, "probes: must be positive");
}

std::string config_to_json(const RunConfig& cfg) {
  json doc;
  doc["fixture"] = cfg.fixture;
  doc["dim"] = cfg.dim;
  if (cfg.mu) doc["mu"] = *cfg.mu;
  if (cfg.L) doc["L"] = *cfg.L;
  doc["gamma0"] = cfg.gamma0;
  doc["variants"] = cfg.variants;
  doc["max_iter"] = cfg.max_iter;
  doc["grad_tol"] = cfg.grad_tol;
  doc["gap_tol"] = cfg.gap_tol;
  doc["seed"] = cfg.seed;
  doc["out"] = cfg.out;
  doc["format"] = cfg.format;
  doc["start"] = cfg.start;
  if (cfg.alpha) doc["alpha"] = *cfg.alpha;
  doc["t_end"] = cfg.t_end;
  doc["tol"] = cfg.tol;
  doc["samples"] = cfg.samples;
  if (cfg.beta) doc["beta"] = *cfg.beta;
  doc["probes"] = cfg.probes;
  return doc.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  require(doc.is_object(), "config: top level must be an object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "fixture") cfg.fixture = value.get<std::string>();
      else if (key == "dim") cfg.dim = value.get<std::size_t>();
      else if (key == "mu") cfg.mu = value.get<double>();
      else if (key == "L") cfg.L = value.get<double>();
      else if (key == "gamma0") cfg.gamma0 = value.get<double>();
      else if (key == "variants") cfg.variants = value.get<std::vector<std::string>>();
      else if (key == "max_iter") cfg.max_iter = value.get<std::size_t>();
      else if (key == "grad_tol") cfg.grad_tol = value.get<double>();
      else if (key == "gap_tol") cfg.gap_tol = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "format") cfg.format = value.get<std::vector<std::string>>();
      else if (key == "start") cfg.start = value.get<std::string>();
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "t_end") cfg.t_end = value.get<double>();
      else if (key == "tol") cfg.tol = value.get<double>();
      else if (key == "samples") cfg.samples = value.get<std::size_t>();
      else if (key == "beta") cfg.beta = value.get<double>();
      else if (key == "probes") cfg.probes = value.get<std::size_t>();
      else throw std::invalid_argument("config: unknown key '" + key + "'");
    } catch (const json::type_error&) {
      throw std::invalid_argument("config: key '" + key + "' has the wrong type");
    }
  }
  return cfg;
}

Fixture make_fixture(const RunConfig& cfg) {
  if (is_fixture_path(cfg.fixture)) return load_fixture(cfg.fixture);
  if (cfg.fixture == "quadratic") {
    return quadratic_fixture(cfg.dim, cfg.mu.value_or(1.0), cfg.L.value_or(100.0), cfg.seed);
  }
  require(!cfg.L, "L: only the quadratic fixture takes L");
  if (cfg.fixture == "logistic") {
    return logistic_fixture(cfg.dim, 4 * cfg.dim, cfg.mu.value_or(0.01), cfg.seed);
  }
  require(!cfg.mu, "mu: only the quadratic and logistic fixtures take mu");
  if (cfg.fixture == "lasso") return lasso_fixture(2 * cfg.dim, cfg.dim, 0.0, cfg.seed);
  return l1_fixture(cfg.dim, 1.0);
}

std::vector<std::pair<std::string, Fixture>> shipped_fixtures() {
  return {
      {"quadratic_mu1_L100", quadratic_fixture(10, 1.0, 100.0, 0)},
      {"quadratic_mu0_L1", quadratic_fixture(10, 0.0, 1.0, 0)},
      {"quadratic_ill", quadratic_fixture(20, 1e-3, 10.0, 1)},
      {"logistic", logistic_fixture(10, 40, 0.01, 0)},
      {"lasso_20x10", lasso_fixture(20, 10, 0.0, 0)},
  };
}

namespace {

struct VariantOutcome {
  std::string variant;
  std::size_t iters = 0;
  double final_gap = 0.0;
  std::string status;  // pass | FAIL | diverged | error
  std::string detail;
};

VariantOutcome run_one(const RunConfig& cfg, const Problem& problem, const Fixture& fx,
                       Variant variant) {
  VariantOutcome o;
  o.variant = to_string(variant);
  SolverParams p;
  p.variant = variant;
  p.gamma0 = cfg.gamma0;
  p.mu = fx.mu;
  p.L = fx.L;
  p.max_iter = cfg.max_iter;
  p.stop_grad_tol = cfg.grad_tol;
  p.stop_gap_tol = cfg.gap_tol;
  if (variant == Variant::kSemiImplicit) p.alpha_override = cfg.alpha.value_or(1.0);
  const auto n = static_cast<Eigen::Index>(problem_dim(problem));
  Vector x0 = Vector::Ones(n);
  if (cfg.start == "reference") {
    if (!fx.x_star) throw std::invalid_argument("start: fixture has no reference minimizer");
    x0 = Eigen::Map<const Vector>(fx.x_star->data(), n);
  }
  RunResult res;
  try {
    res = run(x0, x0, p, problem);
  } catch (const DivergenceError& e) {
    o.status = "diverged";
    o.detail = e.what();
    return o;
  }
  res.trace.fixture = fixture_label(cfg);
  const auto report = check_certificates(res.trace, envelope_for(variant, p.L, p.mu, p.gamma0), variant);
  o.iters = res.trace.iterations();
  o.final_gap = res.trace.records.back().f_gap;
  o.status = report.passed() ? "pass" : "FAIL";
  for (const auto& c : report.checks) {
    if (!c.pass) o.detail += (o.detail.empty() ? "" : ",") + c.name;
  }

  const fs::path dir(cfg.out);
  for (const auto& f : cfg.format) {
    if (f == "csv") write_file(dir / ("trace_" + o.variant + ".csv"), trace_csv(res.trace));
    if (f == "json") write_file(dir / ("report_" + o.variant + ".json"), report.to_json() + "\n");
  }
  return o;
}

}  // namespace

int run_benchmark(const RunConfig& cfg, std::ostream& out) {
  validate_config(cfg);
  const Fixture fx = make_fixture(cfg);
  const Problem problem = build_problem(fx);
  fs::create_directories(cfg.out);

  std::vector<VariantOutcome> outcomes;
  for (const auto& name : cfg.variants) {
    const Variant v = parse_variant(name);
    try {
      outcomes.push_back(run_one(cfg, problem, fx, v));
    } catch (const std::invalid_argument& e) {
      outcomes.push_back({name, 0, 0.0, "error", e.what()});
    }
  }

  bool ok = true;
  out << std::left << std::setw(18) << "variant" << std::setw(8) << "iters" << std::setw(24)
      << "final_gap" << "certificates\n";
  for (const auto& o : outcomes) {
    char gap[32];
    std::snprintf(gap, sizeof gap, "%.6e", o.final_gap);
    out << std::left << std::setw(18) << o.variant << std::setw(8) << o.iters << std::setw(24)
        << gap << o.status;
    if (!o.detail.empty()) out << " (" << o.detail << ")";
    out << "\n";
    ok = ok && o.status == "pass";
  }
  return ok ? kExitOk : kExitFailed;
}

int run_flow(const RunConfig& cfg, std::ostream& out) {
  validate_config(cfg);
  const Fixture fx = make_fixture(cfg);
  const Problem problem = build_problem(fx);
  const auto* smooth = std::get_if<SmoothObjective>(&problem);
  if (smooth == nullptr) throw std::invalid_argument("fixture: flow needs a smooth fixture");

  FlowParams fp;
  fp.mu = fx.mu;
  fp.objective = *smooth;
  fp.beta = cfg.beta ? flow::constant_beta(*cfg.beta) : flow::default_beta(*smooth, cfg.gamma0);

  const auto n = static_cast<Eigen::Index>(smooth->dim);
  FlowState init;
  init.x = Vector::Ones(n);
  if (cfg.start == "reference") {
    if (!smooth->minimizer) throw std::invalid_argument("start: fixture has no reference minimizer");
    init.x = *smooth->minimizer;
  }
  init.v = init.x;
  init.gamma = cfg.gamma0;

  IntegratorOptions opts;
  opts.tol = cfg.tol;
  opts.samples = cfg.samples;
  Trajectory traj;
  try {
    traj = flow::integrate_flow(init, fp, cfg.t_end, opts);
  } catch (const IntegrationError& e) {
    out << "integration failed: " << e.what() << "\n";
    return kExitFailed;
  }

  fs::create_directories(cfg.out);
  const fs::path dir(cfg.out);
  write_file(dir / "flow.csv", flow::trajectory_csv(traj, fp));
  bool ok = true;
  if (smooth->has_reference()) {
    const DecayReport rep = flow::verify_continuous_decay(traj, fp, cfg.tol);
    write_file(dir / "decay_report.json", rep.to_json() + "\n");
    ok = rep.pass;
    out << "samples " << traj.times.size() << ", accepted steps " << traj.accepted_steps
        << ", L(0) " << rep.initial_lyapunov << ", L(t_end) " << rep.final_lyapunov
        << ", worst ratio " << rep.worst_ratio << ": " << (ok ? "pass" : "FAIL") << "\n";
  } else {
    out << "samples " << traj.times.size() << ", no reference minimizer, decay not checked\n";
  }
  return ok ? kExitOk : kExitFailed;
}

int run_validate(const RunConfig& cfg, std::ostream& out) {
  validate_config(cfg);
  const Problem problem = build_problem(make_fixture(cfg));
  const ValidationReport rep =
      std::holds_alternative<SmoothObjective>(problem)
          ? validate_objective(std::get<SmoothObjective>(problem), cfg.probes, cfg.seed)
          : validate_composite(std::get<CompositeObjective>(problem), cfg.probes, cfg.seed);
  out << rep.to_json() << "\n";
  return rep.passed() ? kExitOk : kExitFailed;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"H-NAG solvers, flow integration and certificate checks"};
  app.require_subcommand(1);

  RunConfig flags;
  std::string config_path;
  std::string variants_csv;
  std::string format_csv;

  std::vector<CLI::App*> subs{app.add_subcommand("run", "run discrete schemes and check certificates"),
                              app.add_subcommand("flow", "integrate the continuous flow"),
                              app.add_subcommand("validate", "probe a fixture's oracles")};
  std::map<std::string, CLI::Option*> opt;
  for (CLI::App* sub : subs) {
    auto add = [&](const std::string& name, auto& target, const std::string& help) {
      opt[sub->get_name() + name] = sub->add_option(name, target, help);
    };
    add("--config", config_path, "JSON config file; flags override its values");
    add("--fixture", flags.fixture, "quadratic, logistic, lasso, l1 or a fixture .json");
    add("--dim", flags.dim, "problem dimension");
    add("--mu", flags.mu, "quadratic mu or logistic ridge");
    add("--L", flags.L, "quadratic L");
    add("--gamma0", flags.gamma0, "initial gamma");
    add("--variants", variants_csv, "comma-separated variant names");
    add("--max-iter", flags.max_iter, "iteration cap");
    add("--grad-tol", flags.grad_tol, "stop when the gradient norm drops below");
    add("--gap-tol", flags.gap_tol, "stop when the Lyapunov value drops below");
    add("--seed", flags.seed, "fixture seed");
    add("--out", flags.out, "output directory (default $HNAG_OUT_DIR or .)");
    add("--format", format_csv, "comma-separated subset of csv,json");
    add("--start", flags.start, "ones or reference");
    add("--alpha", flags.alpha, "semi-implicit step size");
    add("--t-end", flags.t_end, "flow horizon");
    add("--tol", flags.tol, "integrator tolerance");
    add("--samples", flags.samples, "flow output samples");
    add("--beta", flags.beta, "constant flow beta");
    add("--probes", flags.probes, "validation probes");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* chosen = nullptr;
  for (CLI::App* sub : subs) {
    if (sub->parsed()) chosen = sub;
  }
  const std::string name = chosen->get_name();
  auto given = [&](const std::string& flag) { return opt.at(name + flag)->count() > 0; };

  try {
    RunConfig cfg;
    cfg.out = default_out_dir();
    if (given("--config")) {
      std::ifstream f(config_path);
      if (!f) throw std::invalid_argument("config: cannot open '" + config_path + "'");
      std::stringstream ss;
      ss << f.rdbuf();
      const std::string text = ss.str();
      cfg = config_from_json(text);
      if (!json::parse(text).contains("out")) cfg.out = default_out_dir();
    }
    auto split = [](const std::string& s) {
      std::vector<std::string> parts;
      std::stringstream ss(s);
      for (std::string item; std::getline(ss, item, ',');) {
        if (!item.empty()) parts.push_back(item);
      }
      return parts;
    };
    if (given("--fixture")) cfg.fixture = flags.fixture;
    if (given("--dim")) cfg.dim = flags.dim;
    if (given("--mu")) cfg.mu = flags.mu;
    if (given("--L")) cfg.L = flags.L;
    if (given("--gamma0")) cfg.gamma0 = flags.gamma0;
    if (given("--variants")) cfg.variants = split(variants_csv);
    if (given("--max-iter")) cfg.max_iter = flags.max_iter;
    if (given("--grad-tol")) cfg.grad_tol = flags.grad_tol;
    if (given("--gap-tol")) cfg.gap_tol = flags.gap_tol;
    if (given("--seed")) cfg.seed = flags.seed;
    if (given("--out")) cfg.out = flags.out;
    if (given("--format")) cfg.format = split(format_csv);
    if (given("--start")) cfg.start = flags.start;
    if (given("--alpha")) cfg.alpha = flags.alpha;
    if (given("--t-end")) cfg.t_end = flags.t_end;
    if (given("--tol")) cfg.tol = flags.tol;
    if (given("--samples")) cfg.samples = flags.samples;
    if (given("--beta")) cfg.beta = flags.beta;
    if (given("--probes")) cfg.probes = flags.probes;

    if (name == "run") return run_benchmark(cfg, out);
    if (name == "flow") return run_flow(cfg, out);
    return run_validate(cfg, out);
  } catch (const std::invalid_argument& e) {
    err << "hnag: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "hnag: " << e.what() << "\n";
    return kExitFailed;
  }
}

}  // namespace hnag::cli
