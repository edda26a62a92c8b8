#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hnag/objectives.hpp"

namespace hnag::flow {

/// A point (x, v, gamma) of the H-NAG phase space.
struct FlowState {
  Vector x;
  Vector v;
  double gamma = 1.0;
};

/// Hessian-damping coefficient as a function of time; must be nonnegative.
using BetaSchedule = std::function<double(double)>;

BetaSchedule constant_beta(double beta);
/// beta(t) = 1 / sqrt(L * gamma0), the continuous counterpart of beta_0 = 1/(L alpha_0).
BetaSchedule default_beta(const SmoothObjective& objective, double gamma0);

struct FlowParams {
  double mu = 0.0;
  BetaSchedule beta;
  SmoothObjective objective;
};

struct FlowDerivative {
  Vector dx;
  Vector dv;
  double dgamma = 0.0;
};

/// x' = v - x - beta(t) grad f(x),  gamma v' = mu (x - v) - grad f(x),  gamma' = mu - gamma.
FlowDerivative vector_field(const FlowState& state, const FlowParams& params, double t);

struct IntegratorOptions {
  double tol = 1e-8;
  std::size_t samples = 201;  // uniformly spaced output samples, at least 100
  double initial_step = 0.0;  // 0 picks t_end * 1e-3
  std::size_t max_steps = 10'000'000;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<FlowState> states;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

/**
 * Dormand-Prince 5(4) with PI step-size control and the method's native
 * continuous extension for the uniformly spaced samples.
 *
 * The local error estimate is measured in the RMS norm with atol = rtol = tol.
 * Throws IntegrationError when the step size falls below 1e-14 * t_end.
 */
Trajectory integrate_flow(const FlowState& initial, const FlowParams& params, double t_end,
                          const IntegratorOptions& options = {});

/// f(x) - f* + gamma/2 ||v - x*||^2. Requires the objective's reference minimizer.
double lyapunov_continuous(const FlowState& state, const SmoothObjective& objective);

struct DecayReport {
  bool pass = true;
  bool integral_pass = true;
  bool monotone_pass = true;
  double epsilon = 0.0;           // 100 * tol
  double worst_ratio = 0.0;       // max_t L(t) / (e^{-t} L(0)), 0 when L(0) = 0
  double worst_time = 0.0;
  double worst_integral_ratio = 0.0;
  double worst_integral_time = 0.0;
  double worst_monotone_excess = 0.0;  // relative to L(0)
  double worst_monotone_time = 0.0;
  double initial_lyapunov = 0.0;
  double final_lyapunov = 0.0;
  std::vector<double> lyapunov;   // L(t_i)
  std::vector<double> integral;   // int_0^t_i e^{s - t_i} beta(s) ||grad f(x(s))||^2 ds

  std::string to_json() const;
};

/**
 * Checks L(t) <= e^{-t} L(0)(1 + eps) and
 * L(t) + int_0^t e^{s-t} beta(s) ||grad f||^2 ds <= e^{-t} L(0)(1 + eps) at every
 * sample (trapezoid rule for the integral), plus the sample-to-sample decay
 * L(t_{i+1}) <= e^{-(t_{i+1}-t_i)} L(t_i) + eps L(0). eps = 100 * tol.
 */
DecayReport verify_continuous_decay(const Trajectory& trajectory, const FlowParams& params,
                                    double tol);

/// CSV with header `t,L,grad_norm,gamma`, 17 significant digits.
std::string trajectory_csv(const Trajectory& trajectory, const FlowParams& params);
/// Full-state dump: {"t": [...], "x": [[...]], "v": [[...]], "gamma": [...]}.
std::string trajectory_json(const Trajectory& trajectory);

}  // namespace hnag::flow
