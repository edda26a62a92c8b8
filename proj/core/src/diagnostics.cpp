#include "hnag/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hnag {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Accumulates lhs <= rhs + eps over the iterations of one named check.
class CheckBuilder {
 public:
  explicit CheckBuilder(std::string name) { check_.name = std::move(name); }

  void add(std::size_t k, double lhs, double rhs) {
    const double slack = std::isnan(lhs) || std::isnan(rhs) ? std::numeric_limits<double>::infinity()
                                                            : lhs - rhs;
    if (!seen_ || slack > check_.worst_slack) {
      check_.worst_slack = slack;
      check_.worst_k = k;
    }
    seen_ = true;
    if (!(slack <= 0.0)) {
      check_.pass = false;
      if (!check_.first_violation_k) check_.first_violation_k = k;
    }
  }

  CertificateCheck finish() const { return check_; }

 private:
  CertificateCheck check_;
  bool seen_ = false;
};

bool uses_residual(Variant v) {
  return v == Variant::kExplicit || v == Variant::kExtraGradient || v == Variant::kSemiImplicit ||
         v == Variant::kCompositeAlt;
}

bool smooth_gradient_recorded(Variant v) {
  return v == Variant::kExplicit || v == Variant::kExtraGradient || v == Variant::kSemiImplicit ||
         v == Variant::kNagFlowB;
}

std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace

double lyapunov_discrete(const Vector& x, const Vector& v, double gamma, const SmoothObjective& obj) {
  if (!obj.has_reference()) {
    throw std::invalid_argument("lyapunov_discrete: objective has no reference minimizer");
  }
  return obj.value(x) - *obj.min_value + 0.5 * gamma * (v - *obj.minimizer).squaredNorm();
}

double lyapunov_discrete(const Vector& x, const Vector& v, double gamma, const Problem& problem) {
  if (const auto* smooth = std::get_if<SmoothObjective>(&problem)) {
    return lyapunov_discrete(x, v, gamma, *smooth);
  }
  const auto& comp = std::get<CompositeObjective>(problem);
  if (!comp.has_reference()) {
    throw std::invalid_argument("lyapunov_discrete: objective has no reference minimizer");
  }
  return comp.value(x) - *comp.min_value + 0.5 * gamma * (v - *comp.minimizer).squaredNorm();
}

double lambda_update(double lambda, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("lambda_update: alpha must be positive");
  return lambda / (1.0 + alpha);
}

namespace {

// c0 L / (c1 sqrt(L) + sqrt(g) k)^2 written as 1 / (1 + r k)^2, r = sqrt(g) / (c1 sqrt(L)),
// so that k = 0 gives exactly 1.
double sublinear(double r, double k) {
  const double d = 1.0 + r * k;
  return 1.0 / (d * d);
}

}  // namespace

double envelope_explicit(double k, double L, double mu, double gamma0) {
  const double sub = sublinear(std::sqrt(gamma0) / (2.0 * std::sqrt(2.0 * L)), k);
  const double lin = std::pow(1.0 + std::sqrt(std::min(gamma0, mu) / L), -k);
  return std::min(sub, lin);
}

double envelope_extra_gradient(double k, double L, double mu, double gamma0) {
  const double sub = sublinear(std::sqrt(1.5 * gamma0) / (2.0 * std::sqrt(L)), k);
  const double lin = std::pow(1.0 + std::sqrt(2.0 * std::min(gamma0, mu) / L), -k);
  return std::min(sub, lin);
}

double RateEnvelope::value(double k) const {
  const double m = std::min(gamma0, mu);
  switch (kind) {
    case Kind::kExplicit:
    case Kind::kComposite:
      return envelope_explicit(k, L, mu, gamma0);
    case Kind::kExtraGradient:
      return envelope_extra_gradient(k, L, mu, gamma0);
    case Kind::kCompositeAlt:
      return std::min(sublinear(std::sqrt(gamma0) / (4.0 * std::sqrt(2.0 * L)), k),
                      std::pow(1.0 + 0.5 * std::sqrt(m / L), -k));
    case Kind::kNagFlowA:
      return std::min(sublinear(std::sqrt(gamma0) / (2.0 * std::sqrt(L)), k),
                      std::pow(1.0 + std::sqrt(m / L), -k));
    case Kind::kNagFlowB:
      return std::min(sublinear(std::sqrt(gamma0) / (2.0 * std::sqrt(L)), k),
                      std::pow(std::max(0.0, 1.0 - std::sqrt(m / L)), k));
    case Kind::kNone:
      break;
  }
  return kNaN;
}

RateEnvelope envelope_for(Variant variant, double L, double mu, double gamma0) {
  RateEnvelope env{RateEnvelope::Kind::kNone, L, mu, gamma0};
  switch (variant) {
    case Variant::kExplicit: env.kind = RateEnvelope::Kind::kExplicit; break;
    case Variant::kExtraGradient: env.kind = RateEnvelope::Kind::kExtraGradient; break;
    case Variant::kSemiImplicit: env.kind = RateEnvelope::Kind::kNone; break;
    case Variant::kCompositeSplit: env.kind = RateEnvelope::Kind::kComposite; break;
    case Variant::kCompositeAlt: env.kind = RateEnvelope::Kind::kCompositeAlt; break;
    case Variant::kGradientMapping:
    case Variant::kNagFlowA: env.kind = RateEnvelope::Kind::kNagFlowA; break;
    case Variant::kNagFlowB: env.kind = RateEnvelope::Kind::kNagFlowB; break;
  }
  return env;
}

bool CertificateReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const CertificateCheck* CertificateReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string CertificateReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["variant"] = std::string(to_string(variant));
  doc["fixture"] = fixture;
  doc["n_iters"] = n_iters;
  doc["epsilon"] = epsilon;
  doc["pass"] = passed();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json item;
    item["name"] = c.name;
    item["pass"] = c.pass;
    item["worst_k"] = c.worst_k;
    item["worst_slack"] = c.worst_slack;
    if (c.first_violation_k) {
      item["first_violation_k"] = *c.first_violation_k;
    } else {
      item["first_violation_k"] = nullptr;
    }
    arr.push_back(std::move(item));
  }
  doc["checks"] = std::move(arr);
  return doc.dump(2);
}

CertificateReport check_certificates(const Trace& trace, const RateEnvelope& envelope,
                                     Variant variant) {
  CertificateReport rep;
  rep.variant = variant;
  rep.fixture = trace.fixture;
  rep.n_iters = trace.iterations();
  const auto& r = trace.records;
  if (r.empty()) return rep;

  const bool with_r = uses_residual(variant);
  auto energy = [&](const TraceRecord& rec) {
    return with_r ? rec.lyapunov + rec.residual_sum : rec.lyapunov;
  };
  const double L0 = r.front().lyapunov;
  const double E0 = energy(r.front());
  const double eps = 1e-12 * (1.0 + std::max(std::isfinite(E0) ? E0 : 1.0, 1.0));
  rep.epsilon = eps;

  CheckBuilder contraction("contraction");
  CheckBuilder cumulative("cumulative");
  CheckBuilder env_check("envelope");
  CheckBuilder grad_decay("grad_decay");
  CheckBuilder residual("residual_sum");
  CheckBuilder lambda_rec("lambda_recursion");
  CheckBuilder gamma_rec("gamma_recursion");
  CheckBuilder lambda_gamma("lambda_vs_gamma");

  const bool check_grad = smooth_gradient_recorded(variant) && !trace.composite && trace.L > 0.0;
  double direct_sum = 0.0;  // sum_{i<k} a_i / lambda_i

  lambda_rec.add(0, std::abs(r[0].lambda - 1.0), 0.0);
  for (std::size_t k = 0; k < r.size(); ++k) {
    const auto& rec = r[k];
    cumulative.add(k, energy(rec), rec.lambda * L0 + eps);
    if (envelope.has_value()) env_check.add(k, rec.lyapunov, envelope.value(double(k)) * L0 + eps);
    if (check_grad) grad_decay.add(k, rec.grad_norm_sq, 2.0 * trace.L * L0 * rec.lambda + eps);

    const double direct = rec.lambda * direct_sum;
    const double tol = 1e-12 * std::max(std::abs(direct), std::abs(rec.residual_sum));
    residual.add(k, std::abs(rec.residual_sum - direct), tol);
    if (variant != Variant::kNagFlowB) {
      lambda_gamma.add(k, rec.lambda, rec.gamma / trace.gamma0 + eps);
    }

    if (k + 1 == r.size()) break;
    const auto& next = r[k + 1];
    const double a = rec.alpha;
    if (variant == Variant::kNagFlowB) {
      contraction.add(k + 1, energy(next), (1.0 - a) * energy(rec) + eps);
      const double g_expected = rec.gamma + a * (trace.mu - rec.gamma);
      gamma_rec.add(k + 1, std::abs(next.gamma - g_expected), 1e-13 * std::abs(g_expected));
    } else {
      contraction.add(k + 1, energy(next), energy(rec) / (1.0 + a) + eps);
      const double lhs = next.gamma * (1.0 + a);
      const double rhs = rec.gamma + trace.mu * a;
      gamma_rec.add(k + 1, std::abs(lhs - rhs), 1e-13 * std::abs(rhs));
    }
    const double lam_expected = rec.lambda / (1.0 + a);
    lambda_rec.add(k + 1, std::abs(next.lambda - lam_expected), 1e-14 * lam_expected);
    direct_sum += 0.5 * rec.alpha * rec.beta * rec.step_sq / rec.lambda;
  }

  rep.checks.push_back(contraction.finish());
  rep.checks.push_back(cumulative.finish());
  if (envelope.has_value()) rep.checks.push_back(env_check.finish());
  if (check_grad) rep.checks.push_back(grad_decay.finish());
  if (with_r) rep.checks.push_back(residual.finish());
  rep.checks.push_back(lambda_rec.finish());
  rep.checks.push_back(gamma_rec.finish());
  if (variant != Variant::kNagFlowB) rep.checks.push_back(lambda_gamma.finish());
  return rep;
}

std::string trace_csv(const Trace& trace) {
  std::ostringstream out;
  out << "k,f_gap,grad_norm_sq,gamma,alpha,lambda,lyapunov,envelope\n";
  for (const auto& rec : trace.records) {
    out << rec.k << ',' << fmt17(rec.f_gap) << ',' << fmt17(rec.grad_norm_sq) << ','
        << fmt17(rec.gamma) << ',' << fmt17(rec.alpha) << ',' << fmt17(rec.lambda) << ','
        << fmt17(rec.lyapunov) << ',' << fmt17(rec.envelope) << '\n';
  }
  return out.str();
}

}  // namespace hnag
