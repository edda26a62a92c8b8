#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hnag/types.hpp"

namespace hnag {

using ValueOracle = std::function<double(const Vector&)>;
using GradientOracle = std::function<Vector(const Vector&)>;
using HessianOracle = std::function<Matrix(const Vector&)>;
/// (point, step) -> prox_{step * phi}(point)
using ProxOracle = std::function<Vector(const Vector&, double)>;

/**
 * A differentiable mu-convex function with L-Lipschitz gradient.
 *
 * L and mu are declared by the constructor of the objective, never estimated.
 * Use validate_objective() to catch a misdeclaration. Oracles capture their
 * data by shared immutable state, so copies are cheap and concurrent reads are
 * safe.
 */
struct SmoothObjective {
  std::size_t dim = 0;
  ValueOracle value;
  GradientOracle gradient;
  double lipschitz_L = 0.0;
  double strong_mu = 0.0;
  std::optional<Vector> minimizer;
  std::optional<double> min_value;

  // Present only for problems with closed forms.
  ProxOracle prox;         // prox of the whole function
  HessianOracle hessian;
  bool identically_zero = false;

  bool has_reference() const { return minimizer.has_value() && min_value.has_value(); }
};

/// A proper, convex, lower-semicontinuous function given through its prox.
/// The value oracle returns +infinity outside the domain (indicators).
struct ProxFunction {
  ValueOracle value;
  ProxOracle prox;
};

/// f = h + g with smooth h and prox-friendly g. strong_mu is the modulus of f.
struct CompositeObjective {
  SmoothObjective smooth_part;
  ProxFunction nonsmooth_part;
  double strong_mu = 0.0;
  std::optional<Vector> minimizer;
  std::optional<double> min_value;

  std::size_t dim() const { return smooth_part.dim; }
  double lipschitz_L() const { return smooth_part.lipschitz_L; }
  bool has_reference() const { return minimizer.has_value() && min_value.has_value(); }

  // h is summed first, then g.
  double value(const Vector& x) const {
    double total = smooth_part.value(x);
    total += nonsmooth_part.value(x);
    return total;
  }
};

/// Either kind of objective; the solver variant decides which one it needs.
using Problem = std::variant<SmoothObjective, CompositeObjective>;

std::size_t problem_dim(const Problem& problem);
bool problem_has_reference(const Problem& problem);
/// Objective value f(x) (h + g for composites).
double problem_value(const Problem& problem, const Vector& x);

// ---------------------------------------------------------------------------
// Problem constructors

/// f(x) = 1/2 x'Qx - b'x. Q must be symmetric positive semidefinite and b must
/// lie in range(Q). L = lambda_max(Q), mu = lambda_min(Q).
SmoothObjective make_quadratic(const Matrix& Q, const Vector& b);

/// Mean logistic loss over rows of `features` with +-1 labels plus a ridge term.
/// L = ||A||_op^2 / (4n) + ridge, mu = ridge. No minimizer is attached.
SmoothObjective make_logistic(const Matrix& features, const Vector& labels, double ridge);

/// h(x) = 1/2 ||Ax - b||^2, g(x) = weight * ||x||_1. No minimizer is attached.
CompositeObjective make_lasso(const Matrix& A, const Vector& b, double weight);

/// The zero function on R^dim (lipschitz_L = 0, the only such objective).
SmoothObjective make_zero_function(std::size_t dim);

/// f(x) = weight * ||x||_1 as a composite with zero smooth part. x* = 0.
CompositeObjective make_l1_problem(std::size_t dim, double weight);

/// Attaches a reference minimizer and value to a smooth objective.
SmoothObjective with_reference(SmoothObjective obj, Vector minimizer);
CompositeObjective with_reference(CompositeObjective obj, Vector minimizer);

// ---------------------------------------------------------------------------
// Prox functions

/// Componentwise sign(x_i) * max(|x_i| - lambda, 0).
Vector prox_l1(const Vector& x, double lambda);

/// p = (input - output) / lambda, an element of dg(output) whenever
/// output = prox_{lambda g}(input).
Vector subgradient_from_prox(const Vector& input, const Vector& output, double lambda);

ProxFunction l1_norm(double weight);
ProxFunction zero_function();
/// Indicator of the box [lower, upper] (componentwise).
ProxFunction box_indicator(Vector lower, Vector upper);

/// The full-f prox needed by the semi-implicit scheme, when one exists in
/// closed form: quadratics, and composites whose smooth part is zero.
std::optional<ProxFunction> full_prox(const SmoothObjective& obj);
std::optional<ProxFunction> full_prox(const CompositeObjective& obj);

// ---------------------------------------------------------------------------
// Reference minimizers

struct ReferenceSolution {
  Vector x;
  double value = 0.0;
  double stationarity = 0.0;  // gradient(-mapping) norm at x
  std::size_t iterations = 0;
};

/// Plain proximal gradient with step 1/L, run until the gradient mapping
/// norm is below `tol` and iterates stagnate, or `max_iter` is reached.
ReferenceSolution reference_prox_gradient(const CompositeObjective& obj, double tol = 1e-12,
                                          std::size_t max_iter = 2'000'000);

/// Damped Newton iteration; requires a Hessian oracle.
ReferenceSolution reference_newton(const SmoothObjective& obj, double tol = 1e-13,
                                   std::size_t max_iter = 200);

// ---------------------------------------------------------------------------
// Validation battery

struct ValidationCheck {
  std::string name;
  double worst = 0.0;  // worst relative violation, 0 when none
  bool pass = true;
};

struct ValidationReport {
  std::size_t probes = 0;
  double tolerance = 1e-5;
  std::vector<ValidationCheck> checks;

  bool passed() const;
  const ValidationCheck* find(const std::string& name) const;
  std::string to_json() const;
};

/// Finite-difference gradient, mu-convexity, upper Bregman bound and
/// L-smoothness at `probes` random point pairs; stationarity at x* if present.
ValidationReport validate_objective(const SmoothObjective& obj, std::size_t probes,
                                    std::uint64_t seed, double tolerance = 1e-5);

/// The smooth battery on h plus prox optimality, prox nonexpansiveness,
/// value consistency and mu-convexity of f at prox outputs.
ValidationReport validate_composite(const CompositeObjective& obj, std::size_t probes,
                                    std::uint64_t seed, double tolerance = 1e-5);

}  // namespace hnag
