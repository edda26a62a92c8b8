#include "hnag/solvers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hnag {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

// v update shared by every scheme: [gamma v + mu a anchor - a g] / (gamma + mu a)
Vector velocity_update(const SolverState& s, double mu, double a, const Vector& anchor,
                       const Vector& g) {
  return (s.gamma * s.v + mu * a * anchor - a * g) / (s.gamma + mu * a);
}

double gamma_update(double gamma, double mu, double a) { return (gamma + mu * a) / (1.0 + a); }

SolverState next_state(const SolverState& s, Vector x, Vector v, double gamma, double a, double b) {
  SolverState out;
  out.x = std::move(x);
  out.v = std::move(v);
  out.gamma = gamma;
  out.k = s.k + 1;
  out.last_alpha = a;
  out.last_beta = b;
  return out;
}

// The explicit step shared by the explicit scheme and nag_flow_a; only alpha differs.
SolverState explicit_like(const SolverState& s, const SmoothObjective& obj,
                          const SolverParams& p, double a) {
  const double b = 1.0 / (p.L * a);
  const Vector g = s.last_grad ? *s.last_grad : obj.gradient(s.x);
  Vector x1 = (s.x + a * s.v - a * b * g) / (1.0 + a);
  Vector g1 = obj.gradient(x1);
  Vector v1 = velocity_update(s, p.mu, a, x1, g1);
  SolverState out = next_state(s, std::move(x1), std::move(v1), gamma_update(s.gamma, p.mu, a), a, b);
  out.last_step_sq = g.squaredNorm();
  out.last_grad = std::move(g1);
  return out;
}

SolverState split_like(const SolverState& s, const CompositeObjective& comp,
                       const SolverParams& p, double a, double b) {
  const auto& h = comp.smooth_part;
  const Vector gh = s.last_grad ? *s.last_grad : h.gradient(s.x);
  const Vector z = (s.x + a * s.v - a * b * gh) / (1.0 + a);
  const double step = a * b / (1.0 + a);
  Vector x1 = comp.nonsmooth_part.prox(z, step);
  // element of dg(x1) from the prox optimality condition
  const Vector sub = (s.v - x1 - b * gh - (x1 - s.x) / a) / b;
  Vector gh1 = h.gradient(x1);
  Vector v1 = velocity_update(s, p.mu, a, x1, gh1 + sub);
  SolverState out = next_state(s, std::move(x1), std::move(v1), gamma_update(s.gamma, p.mu, a), a, b);
  Vector q = gh1 + sub;
  out.last_step_sq = q.squaredNorm();
  out.last_subgrad = std::move(q);
  out.last_grad = std::move(gh1);
  return out;
}

}  // namespace

void validate_params(const SolverParams& p) {
  require_positive(p.gamma0, "gamma0");
  if (!(p.mu >= 0.0) || !std::isfinite(p.mu)) {
    throw std::invalid_argument("mu must be nonnegative and finite");
  }
  if (p.variant == Variant::kSemiImplicit) {
    if (!p.alpha_override) {
      throw std::invalid_argument("semi_implicit needs alpha_override (any positive step size)");
    }
    require_positive(*p.alpha_override, "alpha_override");
    if (!(p.L >= 0.0)) throw std::invalid_argument("L must be nonnegative");
  } else {
    require_positive(p.L, "L");
    if (p.alpha_override) {
      throw std::invalid_argument("alpha_override only applies to semi_implicit");
    }
  }
}

double alpha_explicit(double gamma, double L) { return std::sqrt(gamma / L); }

double alpha_extra_gradient(double gamma, double L) {
  return (gamma + std::sqrt(gamma * gamma + 8.0 * L * gamma)) / (2.0 * L);
}

double alpha_golden(double gamma, double L) {
  return (gamma + std::sqrt(gamma * gamma + 4.0 * L * gamma)) / (2.0 * L);
}

double alpha_composite_alt(double gamma, double L) { return std::sqrt(gamma / (4.0 * L)); }

double alpha_nag_flow_b(double gamma, double mu, double L) {
  const double c = mu - gamma;
  const double disc = std::sqrt(c * c + 4.0 * L * gamma);
  // avoid cancellation when c < 0
  const double a = c >= 0.0 ? (c + disc) / (2.0 * L) : 2.0 * gamma / (disc - c);
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("nag_flow_b: no positive root of L a^2 = gamma + a (mu - gamma)");
  }
  return a;
}

SolverState step_explicit(const SolverState& state, const SmoothObjective& obj,
                          const SolverParams& params) {
  return explicit_like(state, obj, params, alpha_explicit(state.gamma, params.L));
}

SolverState step_nag_flow_a(const SolverState& state, const SmoothObjective& obj,
                            const SolverParams& params) {
  return explicit_like(state, obj, params, alpha_golden(state.gamma, params.L));
}

SolverState step_extra_gradient(const SolverState& state, const SmoothObjective& obj,
                                const SolverParams& params) {
  const double a = alpha_extra_gradient(state.gamma, params.L);
  const double b = 1.0 / (params.L * a);
  const Vector g = obj.gradient(state.x);
  const Vector y = (state.x + a * state.v - a * b * g) / (1.0 + a);
  const Vector gy = obj.gradient(y);
  Vector v1 = velocity_update(state, params.mu, a, y, gy);
  Vector x1 = y - gy / params.L;
  SolverState out = next_state(state, std::move(x1), std::move(v1),
                               gamma_update(state.gamma, params.mu, a), a, b);
  out.last_step_sq = g.squaredNorm();
  return out;
}

SolverState step_semi_implicit(const SolverState& state, const ProxFunction& full,
                               const SolverParams& params) {
  if (!params.alpha_override) {
    throw std::invalid_argument("semi_implicit needs alpha_override");
  }
  const double a = *params.alpha_override;
  const double b = a / state.gamma;
  const Vector y = (state.x + a * state.v) / (1.0 + a);
  const double step = a * b / (1.0 + a);
  Vector x1 = full.prox(y, step);
  Vector p = (state.v - x1 - (x1 - state.x) / a) / b;
  Vector v1 = velocity_update(state, params.mu, a, x1, p);
  SolverState out = next_state(state, std::move(x1), std::move(v1),
                               gamma_update(state.gamma, params.mu, a), a, b);
  out.last_step_sq = p.squaredNorm();
  out.last_subgrad = std::move(p);
  return out;
}

SolverState step_composite_split(const SolverState& state, const CompositeObjective& comp,
                                 const SolverParams& params) {
  const double a = alpha_explicit(state.gamma, params.L);
  return split_like(state, comp, params, a, 1.0 / (params.L * a));
}

SolverState step_composite_alt(const SolverState& state, const CompositeObjective& comp,
                               const SolverParams& params) {
  const double a = alpha_composite_alt(state.gamma, params.L);
  return split_like(state, comp, params, a, 1.0 / (2.0 * params.L * a));
}

Vector gradient_mapping(const CompositeObjective& comp, const Vector& y, double L) {
  const Vector inner = y - comp.smooth_part.gradient(y) / L;
  return L * (y - comp.nonsmooth_part.prox(inner, 1.0 / L));
}

SolverState step_gradient_mapping(const SolverState& state, const CompositeObjective& comp,
                                  const SolverParams& params) {
  const double a = alpha_golden(state.gamma, params.L);
  const double b = 1.0 / (params.L * a);
  const Vector G = state.last_grad ? *state.last_grad : gradient_mapping(comp, state.x, params.L);
  Vector x1 = (state.x + a * state.v - a * b * G) / (1.0 + a);
  Vector G1 = gradient_mapping(comp, x1, params.L);
  Vector v1 = velocity_update(state, params.mu, a, x1, G1);
  SolverState out = next_state(state, std::move(x1), std::move(v1),
                               gamma_update(state.gamma, params.mu, a), a, b);
  out.last_step_sq = G.squaredNorm();
  out.last_grad = std::move(G1);
  return out;
}

SolverState step_nag_flow_b(const SolverState& state, const SmoothObjective& obj,
                            const SolverParams& params) {
  const double a = alpha_nag_flow_b(state.gamma, params.mu, params.L);
  const double gamma1 = state.gamma + a * (params.mu - state.gamma);
  const Vector y = (gamma1 * state.x + a * state.gamma * state.v) / (gamma1 + a * state.gamma);
  const Vector gy = obj.gradient(y);
  Vector v1 = state.v + a * (params.mu * (y - state.v) - gy) / gamma1;
  Vector x1 = y - gy / params.L;
  SolverState out = next_state(state, std::move(x1), std::move(v1), gamma1, a,
                               1.0 / (params.L * a));
  out.last_step_sq = gy.squaredNorm();
  return out;
}

Vector three_term_x_recurrence(const ThreeTermInput& in) {
  if (in.k < 1) {
    throw std::invalid_argument("three_term_x_recurrence: needs k >= 1 (two prior iterates)");
  }
  require_positive(in.alpha_prev, "alpha_{k-1}");
  require_positive(in.alpha_curr, "alpha_k");
  require_positive(in.gamma_prev, "gamma_{k-1}");
  // D_k = (x_{k+1} - x_k) / alpha_k, c = gamma_{k-1} / alpha_{k-1}
  const double c = in.gamma_prev / in.alpha_prev;
  const Vector d_prev = (in.x_curr - in.x_prev) / in.alpha_prev;
  const Vector d = (c * d_prev - c * (in.beta_curr * in.grad_curr - in.beta_prev * in.grad_prev) -
                    (1.0 + in.mu * in.beta_curr) * in.grad_curr) /
                   ((c + in.mu) * (1.0 + in.alpha_curr));
  return in.x_curr + in.alpha_curr * d;
}

// ---------------------------------------------------------------------------

namespace {

class Runner {
 public:
  Runner(const SolverParams& params, const Problem& problem)
      : p_(params), problem_(problem),
        smooth_(std::get_if<SmoothObjective>(&problem)),
        comp_(std::get_if<CompositeObjective>(&problem)),
        has_ref_(problem_has_reference(problem)),
        env_(envelope_for(params.variant, params.L, params.mu, params.gamma0)) {
    const Variant v = p_.variant;
    if (v == Variant::kSemiImplicit) {
      full_ = smooth_ ? full_prox(*smooth_) : full_prox(*comp_);
      if (!full_) {
        throw std::invalid_argument(
            "semi_implicit needs a closed-form prox of the whole objective "
            "(quadratics, or composites with zero smooth part)");
      }
    } else if (is_composite_variant(v) && !comp_) {
      throw std::invalid_argument(std::string(to_string(v)) + " needs a composite objective");
    } else if (!is_composite_variant(v) && !smooth_) {
      throw std::invalid_argument(std::string(to_string(v)) + " needs a smooth objective");
    }
  }

  SolverState initial(const Vector& x0, const Vector& v0) const {
    SolverState s;
    s.x = x0;
    s.v = v0;
    s.gamma = p_.gamma0;
    switch (p_.variant) {
      case Variant::kExplicit:
      case Variant::kNagFlowA:
        s.last_grad = smooth_->gradient(x0);
        break;
      case Variant::kCompositeSplit:
      case Variant::kCompositeAlt:
        s.last_grad = comp_->smooth_part.gradient(x0);
        break;
      case Variant::kGradientMapping:
        s.last_grad = gradient_mapping(*comp_, x0, p_.L);
        break;
      default:
        break;
    }
    return s;
  }

  SolverState step(const SolverState& s) const {
    switch (p_.variant) {
      case Variant::kExplicit: return step_explicit(s, *smooth_, p_);
      case Variant::kExtraGradient: return step_extra_gradient(s, *smooth_, p_);
      case Variant::kSemiImplicit: return step_semi_implicit(s, *full_, p_);
      case Variant::kCompositeSplit: return step_composite_split(s, *comp_, p_);
      case Variant::kCompositeAlt: return step_composite_alt(s, *comp_, p_);
      case Variant::kGradientMapping: return step_gradient_mapping(s, *comp_, p_);
      case Variant::kNagFlowA: return step_nag_flow_a(s, *smooth_, p_);
      case Variant::kNagFlowB: return step_nag_flow_b(s, *smooth_, p_);
    }
    throw std::logic_error("unhandled variant");
  }

  // Point at which the Lyapunov value is taken. The gradient-mapping and
  // nag_flow_a schemes are run in shifted form; their natural iterate is the
  // prox-gradient step from x_k.
  Vector lyapunov_point(const SolverState& s) const {
    if (p_.variant == Variant::kGradientMapping || p_.variant == Variant::kNagFlowA) {
      return s.x - *s.last_grad / p_.L;
    }
    return s.x;
  }

  // Composite stationarity surrogate at x_k.
  Vector mapping_at(const SolverState& s) const {
    if (p_.variant == Variant::kGradientMapping) return *s.last_grad;
    return gradient_mapping(*comp_, s.x, p_.L > 0.0 ? p_.L : 1.0);
  }

  double grad_norm_sq(const SolverState& s) const {
    if (smooth_) {
      if (s.last_grad) return s.last_grad->squaredNorm();
      return smooth_->gradient(s.x).squaredNorm();
    }
    if (p_.variant == Variant::kGradientMapping) return s.last_grad->squaredNorm();
    if (s.last_subgrad) return s.last_subgrad->squaredNorm();
    return mapping_at(s).squaredNorm();  // k = 0 of the splits
  }

  TraceRecord record(const SolverState& s, double lambda, double residual) const {
    TraceRecord rec;
    rec.k = s.k;
    rec.gamma = s.gamma;
    rec.alpha = rec.beta = rec.step_sq = kNaN;
    rec.lambda = lambda;
    rec.residual_sum = residual;
    rec.grad_norm_sq = grad_norm_sq(s);
    rec.envelope = env_.value(static_cast<double>(s.k));
    if (has_ref_) {
      const Vector point = lyapunov_point(s);
      rec.lyapunov = lyapunov_discrete(point, s.v, s.gamma, problem_);
      const double fstar = smooth_ ? *smooth_->min_value : *comp_->min_value;
      rec.f_gap = problem_value(problem_, point) - fstar;
    } else {
      rec.lyapunov = rec.f_gap = kNaN;
    }
    return rec;
  }

  bool should_stop(const SolverState& s, const TraceRecord& rec) const {
    if (p_.stop_gap_tol > 0.0 && has_ref_ && rec.lyapunov <= p_.stop_gap_tol) return true;
    if (p_.stop_grad_tol > 0.0) {
      const double norm = smooth_ ? std::sqrt(rec.grad_norm_sq) : mapping_at(s).norm();
      if (norm <= p_.stop_grad_tol) return true;
    }
    return false;
  }

  const RateEnvelope& envelope() const { return env_; }

 private:
  const SolverParams& p_;
  const Problem& problem_;
  const SmoothObjective* smooth_;
  const CompositeObjective* comp_;
  bool has_ref_;
  RateEnvelope env_;
  std::optional<ProxFunction> full_;
};

bool uses_residual(Variant v) {
  return v == Variant::kExplicit || v == Variant::kExtraGradient || v == Variant::kSemiImplicit ||
         v == Variant::kCompositeAlt;
}

}  // namespace

RunResult run(const Vector& x0, const Vector& v0, const SolverParams& params,
              const Problem& problem) {
  validate_params(params);
  const std::size_t n = problem_dim(problem);
  if (static_cast<std::size_t>(x0.size()) != n || static_cast<std::size_t>(v0.size()) != n) {
    throw std::invalid_argument("run: x0 and v0 must have the objective's dimension " +
                                std::to_string(n));
  }
  if (!x0.allFinite() || !v0.allFinite()) {
    throw std::invalid_argument("run: x0 and v0 must be finite");
  }
  const Runner runner(params, problem);

  RunResult result;
  Trace& trace = result.trace;
  trace.variant = params.variant;
  trace.L = params.L;
  trace.mu = params.mu;
  trace.gamma0 = params.gamma0;
  trace.composite = std::holds_alternative<CompositeObjective>(problem);

  SolverState state = runner.initial(x0, v0);
  double lambda = 1.0;
  double residual = 0.0;
  const bool with_r = uses_residual(params.variant);
  trace.records.push_back(runner.record(state, lambda, residual));

  while (state.k < params.max_iter && !runner.should_stop(state, trace.records.back())) {
    SolverState next = runner.step(state);
    if (!next.x.allFinite() || !next.v.allFinite() || !std::isfinite(next.gamma) ||
        !(next.gamma > 0.0)) {
      throw DivergenceError(std::string(to_string(params.variant)) + ": non-finite iterate",
                            next.k);
    }
    TraceRecord& cur = trace.records.back();
    cur.alpha = next.last_alpha;
    cur.beta = next.last_beta;
    cur.step_sq = next.last_step_sq;
    lambda = lambda_update(lambda, next.last_alpha);
    residual = with_r ? (residual + 0.5 * cur.alpha * cur.beta * cur.step_sq) / (1.0 + cur.alpha)
                      : 0.0;
    state = std::move(next);
    trace.records.push_back(runner.record(state, lambda, residual));
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace hnag
