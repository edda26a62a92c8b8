#pragma once

#include <cstddef>
#include <optional>

#include "hnag/diagnostics.hpp"
#include "hnag/objectives.hpp"
#include "hnag/variant.hpp"

namespace hnag {

/// The triple (x_k, v_k, gamma_k) plus what the last step produced.
struct SolverState {
  Vector x;
  Vector v;
  double gamma = 1.0;
  std::size_t k = 0;
  // grad f(x_k) (or grad h(x_k), or the gradient mapping at x_k for the
  // gradient-mapping scheme), reused by the next step.
  std::optional<Vector> last_grad;
  double last_alpha = 0.0;
  double last_beta = 0.0;
  // p_k for the semi-implicit scheme, q_k = grad h(x_k) + p_k for the splits.
  std::optional<Vector> last_subgrad;
  double last_step_sq = 0.0;  // squared norm entering R_k
};

struct SolverParams {
  Variant variant = Variant::kExplicit;
  double gamma0 = 1.0;
  double mu = 0.0;
  double L = 1.0;
  std::optional<double> alpha_override;  // semi-implicit step size
  std::size_t max_iter = 1000;
  double stop_grad_tol = 0.0;  // <= 0 disables
  double stop_gap_tol = 0.0;   // <= 0 disables; needs a reference minimizer
};

/// Throws std::invalid_argument on parameters the variant cannot use.
void validate_params(const SolverParams& params);

// Step-size rules.
double alpha_explicit(double gamma, double L);        // sqrt(gamma / L)
double alpha_extra_gradient(double gamma, double L);  // L a^2 = gamma (2 + a)
double alpha_golden(double gamma, double L);          // L a^2 = gamma (1 + a)
double alpha_composite_alt(double gamma, double L);   // sqrt(gamma / (4L))
/// Positive root of L a^2 = gamma + a (mu - gamma).
double alpha_nag_flow_b(double gamma, double mu, double L);

SolverState step_explicit(const SolverState& state, const SmoothObjective& obj,
                          const SolverParams& params);
SolverState step_extra_gradient(const SolverState& state, const SmoothObjective& obj,
                                const SolverParams& params);
/// `full` is the prox of the whole objective (see full_prox).
SolverState step_semi_implicit(const SolverState& state, const ProxFunction& full,
                               const SolverParams& params);
SolverState step_composite_split(const SolverState& state, const CompositeObjective& comp,
                                 const SolverParams& params);
SolverState step_composite_alt(const SolverState& state, const CompositeObjective& comp,
                               const SolverParams& params);
/// x_{k+1} uses the mapping at x_k, v_{k+1} the mapping at x_{k+1}, which is
/// cached for the next step.
SolverState step_gradient_mapping(const SolverState& state, const CompositeObjective& comp,
                                  const SolverParams& params);
SolverState step_nag_flow_a(const SolverState& state, const SmoothObjective& obj,
                            const SolverParams& params);
SolverState step_nag_flow_b(const SolverState& state, const SmoothObjective& obj,
                            const SolverParams& params);

/// L (y - prox_{g/L}(y - grad h(y) / L)).
Vector gradient_mapping(const CompositeObjective& comp, const Vector& y, double L);

/// Inputs of the velocity-free form of the explicit scheme at step k >= 1.
struct ThreeTermInput {
  Vector x_prev;     // x_{k-1}
  Vector x_curr;     // x_k
  Vector grad_prev;  // grad f(x_{k-1})
  Vector grad_curr;  // grad f(x_k)
  double alpha_prev = 0.0;
  double alpha_curr = 0.0;
  double beta_prev = 0.0;
  double beta_curr = 0.0;
  double gamma_prev = 0.0;  // gamma_{k-1}
  double mu = 0.0;
  std::size_t k = 0;
};

/// x_{k+1} from x_k, x_{k-1} and their gradients, with v eliminated.
Vector three_term_x_recurrence(const ThreeTermInput& in);

struct RunResult {
  SolverState final_state;
  Trace trace;
};

/**
 * Iterates the selected variant from (x0, v0, gamma0) until max_iter, or
 * until the gradient norm (gradient-mapping norm for composites) drops below
 * stop_grad_tol, or the Lyapunov value drops below stop_gap_tol. Returns the
 * full trace. A non-finite iterate throws DivergenceError carrying the index.
 */
RunResult run(const Vector& x0, const Vector& v0, const SolverParams& params,
              const Problem& problem);

}  // namespace hnag
