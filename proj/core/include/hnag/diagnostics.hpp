#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hnag/objectives.hpp"
#include "hnag/variant.hpp"

namespace hnag {

/// Diagnostics of the state (x_k, v_k, gamma_k). The step fields (alpha, beta,
/// step_sq) describe the step k -> k+1 and stay NaN on the last record.
struct TraceRecord {
  std::size_t k = 0;
  double f_gap = 0.0;
  double grad_norm_sq = 0.0;  // ||grad f(x_k)||^2, or the composite surrogate
  double gamma = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double step_sq = 0.0;       // squared norm entering R_{k+1}
  double lyapunov = 0.0;      // L_k
  double residual_sum = 0.0;  // R_k
  double lambda = 1.0;        // prod_{i<k} 1/(1+alpha_i)
  double envelope = 0.0;      // rate envelope at k, NaN when the variant has none
};

struct Trace {
  Variant variant = Variant::kExplicit;
  std::string fixture;
  double L = 0.0;
  double mu = 0.0;
  double gamma0 = 0.0;
  bool composite = false;  // grad_norm_sq holds a subgradient surrogate
  std::vector<TraceRecord> records;

  /// Number of completed steps.
  std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }
};

/// f(x) - f* + gamma/2 ||v - x*||^2; throws when no reference minimizer is attached.
double lyapunov_discrete(const Vector& x, const Vector& v, double gamma, const SmoothObjective& obj);
double lyapunov_discrete(const Vector& x, const Vector& v, double gamma, const Problem& problem);

/// lambda / (1 + alpha); alpha must be positive.
double lambda_update(double lambda, double alpha);

double envelope_explicit(double k, double L, double mu, double gamma0);
double envelope_extra_gradient(double k, double L, double mu, double gamma0);

struct RateEnvelope {
  enum class Kind {
    kExplicit,       // explicit scheme and the composite splitting scheme
    kExtraGradient,
    kComposite,
    kCompositeAlt,
    kNagFlowA,       // also the gradient-mapping scheme
    kNagFlowB,
    kNone,
  };
  Kind kind = Kind::kNone;
  double L = 1.0;
  double mu = 0.0;
  double gamma0 = 1.0;

  /// NaN for kNone.
  double value(double k) const;
  bool has_value() const { return kind != Kind::kNone; }
};

/// The envelope each variant is certified against.
RateEnvelope envelope_for(Variant variant, double L, double mu, double gamma0);

struct CertificateCheck {
  std::string name;
  bool pass = true;
  std::size_t worst_k = 0;
  double worst_slack = 0.0;  // max over k of lhs - (rhs + eps), <= 0 when passing
  std::optional<std::size_t> first_violation_k;
};

struct CertificateReport {
  Variant variant = Variant::kExplicit;
  std::string fixture;
  std::size_t n_iters = 0;
  double epsilon = 0.0;
  std::vector<CertificateCheck> checks;

  bool passed() const;
  const CertificateCheck* find(const std::string& name) const;
  std::string to_json() const;
};

/**
 * Checks the per-iteration certificate chain of a trace:
 *   contraction   E_{k+1} <= E_k/(1+alpha_k)   (L alone for the split, gradient
 *                 mapping and nag_flow_a schemes; (1-alpha_k) L_k for nag_flow_b)
 *   cumulative    E_k <= lambda_k L_0
 *   envelope      L_k <= envelope(k) L_0
 *   grad_decay    ||grad f(x_k)||^2 <= 2L L_0 lambda_k   (smooth variants)
 *   residual_sum  recursive R_k equals the direct resummation (relative 1e-12)
 *   lambda_recursion, gamma_recursion, lambda_vs_gamma
 * Every inequality gets the additive slack eps = 1e-12 (1 + max(E_0, 1)).
 */
CertificateReport check_certificates(const Trace& trace, const RateEnvelope& envelope,
                                     Variant variant);

/// `k,f_gap,grad_norm_sq,gamma,alpha,lambda,lyapunov,envelope`, %.17g.
std::string trace_csv(const Trace& trace);

}  // namespace hnag
