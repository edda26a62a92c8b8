#include <benchmark/benchmark.h>

#include "hnag/diagnostics.hpp"
#include "hnag/fixtures.hpp"
#include "hnag/flow.hpp"
#include "hnag/solvers.hpp"

namespace {

using namespace hnag;

SmoothObjective quadratic(std::size_t n) {
  return std::get<SmoothObjective>(build_problem(quadratic_fixture(n, 1.0, 100.0, 1)));
}

SolverParams params(Variant v, double mu, double L) {
  SolverParams p;
  p.variant = v;
  p.mu = mu;
  p.L = L;
  return p;
}

void BM_StepExplicit(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto f = quadratic(n);
  const auto p = params(Variant::kExplicit, 1.0, 100.0);
  SolverState s{Vector::Ones(static_cast<Eigen::Index>(n)), Vector::Zero(static_cast<Eigen::Index>(n)), 1.0};
  for (auto _ : st) {
    s = step_explicit(s, f, p);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_StepExplicit)->Arg(10)->Arg(100);

void BM_StepExtraGradient(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto f = quadratic(n);
  const auto p = params(Variant::kExtraGradient, 1.0, 100.0);
  SolverState s{Vector::Ones(static_cast<Eigen::Index>(n)), Vector::Zero(static_cast<Eigen::Index>(n)), 1.0};
  for (auto _ : st) {
    s = step_extra_gradient(s, f, p);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_StepExtraGradient)->Arg(10)->Arg(100);

void BM_StepSemiImplicit(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto f = quadratic(n);
  const auto prox = *full_prox(f);
  auto p = params(Variant::kSemiImplicit, 1.0, 100.0);
  p.alpha_override = 1.0;
  SolverState s{Vector::Ones(static_cast<Eigen::Index>(n)), Vector::Zero(static_cast<Eigen::Index>(n)), 1.0};
  for (auto _ : st) {
    s = step_semi_implicit(s, prox, p);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_StepSemiImplicit)->Arg(10)->Arg(100);

void BM_StepCompositeSplit(benchmark::State& st) {
  const auto comp = std::get<CompositeObjective>(build_problem(lasso_fixture(40, 20, 0.0, 1)));
  const auto p = params(Variant::kCompositeSplit, comp.strong_mu, comp.lipschitz_L());
  SolverState s{Vector::Ones(20), Vector::Zero(20), 1.0};
  for (auto _ : st) {
    s = step_composite_split(s, comp, p);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_StepCompositeSplit);

void BM_StepGradientMapping(benchmark::State& st) {
  const auto comp = std::get<CompositeObjective>(build_problem(lasso_fixture(40, 20, 0.0, 1)));
  const auto p = params(Variant::kGradientMapping, comp.strong_mu, comp.lipschitz_L());
  SolverState s{Vector::Ones(20), Vector::Zero(20), 1.0};
  for (auto _ : st) {
    s = step_gradient_mapping(s, comp, p);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_StepGradientMapping);

void BM_RunAndCertify(benchmark::State& st) {
  const auto f = quadratic(20);
  auto p = params(Variant::kExplicit, 1.0, 100.0);
  p.max_iter = static_cast<std::size_t>(st.range(0));
  const auto env = envelope_for(Variant::kExplicit, 100.0, 1.0, 1.0);
  for (auto _ : st) {
    const auto res = run(Vector::Ones(20), Vector::Zero(20), p, f);
    benchmark::DoNotOptimize(check_certificates(res.trace, env, Variant::kExplicit).passed());
  }
}
BENCHMARK(BM_RunAndCertify)->Arg(100)->Arg(1000);

void BM_IntegrateFlow(benchmark::State& st) {
  const auto f = quadratic(static_cast<std::size_t>(st.range(0)));
  flow::FlowParams fp;
  fp.mu = 1.0;
  fp.objective = f;
  fp.beta = flow::default_beta(f, 1.0);
  const auto n = static_cast<Eigen::Index>(f.dim);
  const flow::FlowState init{Vector::Ones(n), Vector::Zero(n), 1.0};
  flow::IntegratorOptions opts;
  opts.tol = 1e-8;
  for (auto _ : st) {
    benchmark::DoNotOptimize(flow::integrate_flow(init, fp, 5.0, opts).accepted_steps);
  }
}
BENCHMARK(BM_IntegrateFlow)->Arg(10)->Arg(50);

}  // namespace
BENCHMARK_MAIN();
