#include "hnag/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include <Eigen/Dense>
#include <json.hpp>

namespace hnag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Spectral data shared by the quadratic oracles.
struct QuadraticData {
  Matrix Q;
  Vector b;
  Matrix eigvecs;
  Vector eigvals;
  Vector b_coeffs;  // eigvecs' b, exactly zero along the null space
};

double softplus(double t) {
  // log(1 + exp(t)) without overflow
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double sigmoid(double t) {
  if (t >= 0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double max_eigenvalue_gram(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(A.transpose() * A, Eigen::EigenvaluesOnly);
  return std::max(es.eigenvalues().maxCoeff(), 0.0);
}

}  // namespace

std::size_t problem_dim(const Problem& problem) {
  return std::visit([](const auto& obj) -> std::size_t {
    if constexpr (std::is_same_v<std::decay_t<decltype(obj)>, SmoothObjective>) {
      return obj.dim;
    } else {
      return obj.dim();
    }
  }, problem);
}

bool problem_has_reference(const Problem& problem) {
  return std::visit([](const auto& obj) { return obj.has_reference(); }, problem);
}

double problem_value(const Problem& problem, const Vector& x) {
  return std::visit([&x](const auto& obj) -> double { return obj.value(x); }, problem);
}

SmoothObjective make_quadratic(const Matrix& Q, const Vector& b) {
  if (Q.rows() != Q.cols() || Q.rows() == 0) {
    throw std::invalid_argument("make_quadratic: Q must be square and nonempty");
  }
  if (b.size() != Q.rows()) {
    throw std::invalid_argument("make_quadratic: dimension mismatch between Q and b");
  }
  const double scale = std::max(Q.cwiseAbs().maxCoeff(), 1.0);
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("make_quadratic: Q is not symmetric");
  }

  auto data = std::make_shared<QuadraticData>();
  data->Q = 0.5 * (Q + Q.transpose());
  data->b = b;
  Eigen::SelfAdjointEigenSolver<Matrix> es(data->Q);
  data->eigvecs = es.eigenvectors();
  data->eigvals = es.eigenvalues();

  const double lmax = data->eigvals.maxCoeff();
  const double zero_tol = 1e-12 * std::max(std::abs(lmax), 1.0);
  if (data->eigvals.minCoeff() < -zero_tol) {
    throw std::invalid_argument("make_quadratic: Q is not positive semidefinite");
  }
  if (lmax <= 0.0) {
    throw std::invalid_argument("make_quadratic: Q must have a positive eigenvalue");
  }

  // x* = Q^+ b; b must have no component along the null space.
  Vector coeffs = data->eigvecs.transpose() * b;
  Vector xs_coeffs = Vector::Zero(coeffs.size());
  const double b_scale = std::max(b.norm(), 1.0);
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    if (data->eigvals(i) <= zero_tol) {
      data->eigvals(i) = 0.0;
      if (std::abs(coeffs(i)) > 1e-10 * b_scale) {
        throw std::invalid_argument("make_quadratic: b is outside range(Q), no minimizer exists");
      }
      coeffs(i) = 0.0;
    } else {
      xs_coeffs(i) = coeffs(i) / data->eigvals(i);
    }
  }
  data->b_coeffs = coeffs;

  SmoothObjective obj;
  obj.dim = static_cast<std::size_t>(Q.rows());
  obj.value = [data](const Vector& x) { return 0.5 * x.dot(data->Q * x) - data->b.dot(x); };
  obj.gradient = [data](const Vector& x) -> Vector { return data->Q * x - data->b; };
  obj.hessian = [data](const Vector&) -> Matrix { return data->Q; };
  obj.prox = [data](const Vector& y, double s) -> Vector {
    // (I + sQ) z = y + s b in the eigenbasis; b's rounding noise along the
    // null space would otherwise be amplified by s
    const Vector rhs = data->eigvecs.transpose() * y + s * data->b_coeffs;
    const Vector scaled = rhs.cwiseQuotient((Vector::Ones(rhs.size()) + s * data->eigvals));
    return data->eigvecs * scaled;
  };
  obj.lipschitz_L = lmax;
  obj.strong_mu = data->eigvals.minCoeff();
  const Vector xs = data->eigvecs * xs_coeffs;
  obj.min_value = obj.value(xs);
  obj.minimizer = xs;
  return obj;
}

SmoothObjective make_logistic(const Matrix& features, const Vector& labels, double ridge) {
  if (features.rows() != labels.size() || features.rows() == 0) {
    throw std::invalid_argument("make_logistic: one label per feature row required");
  }
  if (!(ridge >= 0.0)) {
    throw std::invalid_argument("make_logistic: ridge must be nonnegative");
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) != 1.0 && labels(i) != -1.0) {
      throw std::invalid_argument("make_logistic: label " + std::to_string(i) +
                                  " is outside {-1, +1}");
    }
  }
  struct Data {
    Matrix A;
    Vector y;
    double ridge;
  };
  auto data = std::make_shared<Data>(Data{features, labels, ridge});
  const double n = static_cast<double>(features.rows());

  SmoothObjective obj;
  obj.dim = static_cast<std::size_t>(features.cols());
  obj.value = [data, n](const Vector& x) {
    const Vector margins = data->y.cwiseProduct(data->A * x);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < margins.size(); ++i) loss += softplus(-margins(i));
    return loss / n + 0.5 * data->ridge * x.squaredNorm();
  };
  obj.gradient = [data, n](const Vector& x) -> Vector {
    const Vector margins = data->y.cwiseProduct(data->A * x);
    Vector weights(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      weights(i) = -data->y(i) * sigmoid(-margins(i));
    }
    return data->A.transpose() * weights / n + data->ridge * x;
  };
  obj.hessian = [data, n](const Vector& x) -> Matrix {
    const Vector margins = data->y.cwiseProduct(data->A * x);
    Vector curv(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i) {
      const double s = sigmoid(margins(i));
      curv(i) = s * (1.0 - s);
    }
    Matrix H = data->A.transpose() * curv.asDiagonal() * data->A / n;
    H.diagonal().array() += data->ridge;
    return H;
  };
  obj.lipschitz_L = max_eigenvalue_gram(features) / (4.0 * n) + ridge;
  obj.strong_mu = ridge;
  return obj;
}

CompositeObjective make_lasso(const Matrix& A, const Vector& b, double weight) {
  if (A.rows() != b.size() || A.rows() == 0 || A.cols() == 0) {
    throw std::invalid_argument("make_lasso: dimension mismatch between A and b");
  }
  if (!(weight > 0.0)) {
    throw std::invalid_argument("make_lasso: weight must be positive");
  }
  struct Data {
    Matrix A;
    Vector b;
    Matrix gram;
    Vector Atb;
  };
  auto data = std::make_shared<Data>(Data{A, b, A.transpose() * A, A.transpose() * b});

  SmoothObjective h;
  h.dim = static_cast<std::size_t>(A.cols());
  h.value = [data](const Vector& x) { return 0.5 * (data->A * x - data->b).squaredNorm(); };
  h.gradient = [data](const Vector& x) -> Vector { return data->gram * x - data->Atb; };
  h.hessian = [data](const Vector&) -> Matrix { return data->gram; };

  Eigen::SelfAdjointEigenSolver<Matrix> es(data->gram, Eigen::EigenvaluesOnly);
  const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin < 1e-12 * std::max(lmax, 1.0)) lmin = 0.0;
  h.lipschitz_L = lmax;
  h.strong_mu = lmin;

  CompositeObjective comp;
  comp.smooth_part = std::move(h);
  comp.nonsmooth_part = l1_norm(weight);
  comp.strong_mu = lmin;
  return comp;
}

SmoothObjective make_zero_function(std::size_t dim) {
  SmoothObjective obj;
  obj.dim = dim;
  obj.value = [](const Vector&) { return 0.0; };
  obj.gradient = [dim](const Vector&) -> Vector { return Vector::Zero(static_cast<Eigen::Index>(dim)); };
  obj.hessian = [dim](const Vector&) -> Matrix {
    return Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  };
  obj.prox = [](const Vector& x, double) -> Vector { return x; };
  obj.lipschitz_L = 0.0;
  obj.strong_mu = 0.0;
  obj.identically_zero = true;
  return obj;
}

CompositeObjective make_l1_problem(std::size_t dim, double weight) {
  if (!(weight > 0.0)) {
    throw std::invalid_argument("make_l1_problem: weight must be positive");
  }
  CompositeObjective comp;
  comp.smooth_part = make_zero_function(dim);
  comp.nonsmooth_part = l1_norm(weight);
  comp.strong_mu = 0.0;
  comp.minimizer = Vector::Zero(static_cast<Eigen::Index>(dim));
  comp.min_value = 0.0;
  return comp;
}

SmoothObjective with_reference(SmoothObjective obj, Vector minimizer) {
  if (static_cast<std::size_t>(minimizer.size()) != obj.dim) {
    throw std::invalid_argument("with_reference: minimizer has the wrong dimension");
  }
  obj.min_value = obj.value(minimizer);
  obj.minimizer = std::move(minimizer);
  return obj;
}

CompositeObjective with_reference(CompositeObjective obj, Vector minimizer) {
  if (static_cast<std::size_t>(minimizer.size()) != obj.dim()) {
    throw std::invalid_argument("with_reference: minimizer has the wrong dimension");
  }
  obj.min_value = obj.value(minimizer);
  obj.minimizer = std::move(minimizer);
  return obj;
}

Vector prox_l1(const Vector& x, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("prox_l1: lambda must be positive");
  }
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double shrunk = std::abs(x(i)) - lambda;
    out(i) = shrunk > 0.0 ? std::copysign(shrunk, x(i)) : 0.0;
  }
  return out;
}

Vector subgradient_from_prox(const Vector& input, const Vector& output, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("subgradient_from_prox: lambda must be positive");
  }
  if (input.size() != output.size()) {
    throw std::invalid_argument("subgradient_from_prox: dimension mismatch");
  }
  return (input - output) / lambda;
}

ProxFunction l1_norm(double weight) {
  if (!(weight > 0.0)) {
    throw std::invalid_argument("l1_norm: weight must be positive");
  }
  ProxFunction g;
  g.value = [weight](const Vector& x) { return weight * x.lpNorm<1>(); };
  g.prox = [weight](const Vector& x, double lambda) { return prox_l1(x, lambda * weight); };
  return g;
}

ProxFunction zero_function() {
  ProxFunction g;
  g.value = [](const Vector&) { return 0.0; };
  g.prox = [](const Vector& x, double) -> Vector { return x; };
  return g;
}

ProxFunction box_indicator(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || (lower.array() > upper.array()).any()) {
    throw std::invalid_argument("box_indicator: need lower <= upper of equal size");
  }
  auto lo = std::make_shared<const Vector>(std::move(lower));
  auto hi = std::make_shared<const Vector>(std::move(upper));
  ProxFunction g;
  g.value = [lo, hi](const Vector& x) {
    return ((x.array() >= lo->array()) && (x.array() <= hi->array())).all() ? 0.0 : kInf;
  };
  g.prox = [lo, hi](const Vector& x, double) -> Vector { return x.cwiseMax(*lo).cwiseMin(*hi); };
  return g;
}

std::optional<ProxFunction> full_prox(const SmoothObjective& obj) {
  if (!obj.prox) return std::nullopt;
  return ProxFunction{obj.value, obj.prox};
}

std::optional<ProxFunction> full_prox(const CompositeObjective& obj) {
  if (!obj.smooth_part.identically_zero) return std::nullopt;
  return obj.nonsmooth_part;
}

ReferenceSolution reference_prox_gradient(const CompositeObjective& obj, double tol,
                                          std::size_t max_iter) {
  const double L = obj.lipschitz_L();
  if (!(L > 0.0)) {
    throw std::invalid_argument("reference_prox_gradient: smooth part needs L > 0");
  }
  const auto& h = obj.smooth_part;
  const auto& g = obj.nonsmooth_part;
  Vector x = Vector::Zero(static_cast<Eigen::Index>(obj.dim()));
  ReferenceSolution sol;
  std::size_t stalled = 0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vector next = g.prox(x - h.gradient(x) / L, 1.0 / L);
    const double mapping = L * (x - next).norm();
    const bool same = (next - x).lpNorm<Eigen::Infinity>() <=
                      4 * std::numeric_limits<double>::epsilon() *
                          std::max(1.0, x.lpNorm<Eigen::Infinity>());
    x = next;
    sol.iterations = it + 1;
    sol.stationarity = mapping;
    // converge to tolerance, then keep going until the iterates stop moving
    if (mapping <= tol && (same || ++stalled > 1000)) break;
  }
  sol.x = x;
  sol.value = obj.value(x);
  return sol;
}

ReferenceSolution reference_newton(const SmoothObjective& obj, double tol, std::size_t max_iter) {
  if (!obj.hessian) {
    throw std::invalid_argument("reference_newton: objective has no Hessian oracle");
  }
  Vector x = Vector::Zero(static_cast<Eigen::Index>(obj.dim));
  ReferenceSolution sol;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const Vector grad = obj.gradient(x);
    sol.stationarity = grad.norm();
    sol.iterations = it;
    if (sol.stationarity <= tol) break;
    const Vector step = obj.hessian(x).ldlt().solve(grad);
    // backtracking on the value keeps Newton globally convergent
    double t = 1.0;
    const double fx = obj.value(x);
    while (t > 1e-10 && obj.value(x - t * step) > fx - 0.25 * t * grad.dot(step)) t *= 0.5;
    const Vector next = x - t * step;
    if (next == x) break;
    x = next;
  }
  sol.x = x;
  sol.value = obj.value(x);
  sol.stationarity = obj.gradient(x).norm();
  return sol;
}

// ---------------------------------------------------------------------------

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string ValidationReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["probes"] = probes;
  doc["tolerance"] = tolerance;
  doc["passed"] = passed();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"worst", c.worst}, {"pass", c.pass}});
  }
  doc["checks"] = arr;
  return doc.dump(2);
}

namespace {

class Prober {
 public:
  Prober(std::uint64_t seed, Vector center, double scale)
      : rng_(seed), center_(std::move(center)), scale_(scale) {}

  Vector point() {
    Vector p(center_.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = center_(i) + scale_ * normal_(rng_);
    return p;
  }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Vector center_;
  double scale_;
};

struct Worst {
  double value = 0.0;
  void update(double v) {
    if (std::isnan(v)) {
      value = kInf;
    } else {
      value = std::max(value, v);
    }
  }
};

Vector fd_gradient(const SmoothObjective& obj, const Vector& x) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x(i)));
    probe(i) = x(i) + h;
    const double fp = obj.value(probe);
    probe(i) = x(i) - h;
    const double fm = obj.value(probe);
    probe(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

void smooth_battery(const SmoothObjective& obj, std::size_t probes, Prober& prober,
                    double tolerance, ValidationReport& report, const std::string& prefix) {
  const double scaleL = obj.lipschitz_L > 0.0 ? obj.lipschitz_L : 1.0;
  Worst fd, lower, upper, lsmooth;
  for (std::size_t i = 0; i < probes; ++i) {
    const Vector x = prober.point();
    const Vector y = prober.point();
    const Vector gx = obj.gradient(x);
    const Vector gy = obj.gradient(y);

    fd.update((fd_gradient(obj, x) - gx).norm() / std::max(gx.norm(), 1.0));

    const Vector d = x - y;
    const double d2 = d.squaredNorm();
    if (d2 == 0.0) continue;
    const double bregman = obj.value(x) - obj.value(y) - gy.dot(d);
    const double denom = 0.5 * scaleL * d2;
    lower.update((0.5 * obj.strong_mu * d2 - bregman) / denom);
    upper.update((bregman - 0.5 * obj.lipschitz_L * d2) / denom);
    lsmooth.update(((gx - gy).norm() - obj.lipschitz_L * std::sqrt(d2)) / (scaleL * std::sqrt(d2)));
  }
  auto add = [&](const std::string& name, const Worst& w) {
    report.checks.push_back({prefix + name, w.value, w.value <= tolerance});
  };
  add("gradient_fd", fd);
  add("mu_convexity", lower);
  add("upper_sandwich", upper);
  add("l_smoothness", lsmooth);
  if (obj.minimizer) {
    const double gnorm = obj.gradient(*obj.minimizer).norm();
    report.checks.push_back({prefix + "minimizer_stationarity", gnorm, gnorm <= 1e-8});
  }
}

Vector probe_center(const std::optional<Vector>& minimizer, std::size_t dim) {
  return minimizer ? *minimizer : Vector::Zero(static_cast<Eigen::Index>(dim));
}

}  // namespace

ValidationReport validate_objective(const SmoothObjective& obj, std::size_t probes,
                                    std::uint64_t seed, double tolerance) {
  if (probes == 0) throw std::invalid_argument("validate_objective: probes must be >= 1");
  ValidationReport report;
  report.probes = probes;
  report.tolerance = tolerance;
  Prober prober(seed, probe_center(obj.minimizer, obj.dim), 1.0);
  smooth_battery(obj, probes, prober, tolerance, report, "");
  return report;
}

ValidationReport validate_composite(const CompositeObjective& obj, std::size_t probes,
                                    std::uint64_t seed, double tolerance) {
  if (probes == 0) throw std::invalid_argument("validate_composite: probes must be >= 1");
  ValidationReport report;
  report.probes = probes;
  report.tolerance = tolerance;
  Prober prober(seed, probe_center(obj.minimizer, obj.dim()), 1.0);

  // h alone: only its own L is declared; its mu is not, so test convexity only.
  SmoothObjective h = obj.smooth_part;
  h.minimizer.reset();
  h.strong_mu = std::min(h.strong_mu, obj.strong_mu);
  smooth_battery(h, probes, prober, tolerance, report, "h.");

  const auto& g = obj.nonsmooth_part;
  const double scaleL = obj.lipschitz_L() > 0.0 ? obj.lipschitz_L() : 1.0;
  Worst optimality, nonexpansive, fconvex, consistency;
  for (std::size_t i = 0; i < probes; ++i) {
    const double lambda = std::exp(prober.uniform(std::log(1e-2), std::log(1e2)));
    const Vector w = prober.point();
    const Vector w2 = prober.point();
    const Vector u = g.prox(w, lambda);
    const Vector u2 = g.prox(w2, lambda);
    const Vector p = subgradient_from_prox(w, u, lambda);
    const double gu = g.value(u);

    nonexpansive.update(((u - u2).norm() - (w - w2).norm()) / std::max((w - w2).norm(), 1e-300));

    const Vector q = obj.smooth_part.gradient(u) + p;
    const double fu = obj.value(u);
    for (int j = 0; j < 4; ++j) {
      const Vector y = prober.point();
      const double gy = g.value(y);
      if (std::isfinite(gy)) {
        optimality.update((gu + p.dot(y - u) - gy) / (1.0 + std::abs(gy)));
      }
      const double fy = obj.value(y);
      if (std::isfinite(fy)) {
        const double d2 = (y - u).squaredNorm();
        if (d2 > 0.0) {
          fconvex.update((fu + q.dot(y - u) + 0.5 * obj.strong_mu * d2 - fy) / (0.5 * scaleL * d2));
        }
      }
    }

    double split = obj.smooth_part.value(w);
    split += g.value(w);
    const double total = obj.value(w);
    if (!(total == split || (std::isinf(total) && std::isinf(split)))) {
      consistency.update(kInf);
    }
  }
  auto add = [&](const std::string& name, const Worst& wst) {
    report.checks.push_back({name, wst.value, wst.value <= tolerance});
  };
  add("prox_optimality", optimality);
  add("prox_nonexpansive", nonexpansive);
  add("composite_mu_convexity", fconvex);
  report.checks.push_back({"value_consistency", consistency.value, consistency.value == 0.0});

  if (obj.minimizer) {
    // 0 in df(x*): the prox-gradient step must leave x* in place.
    const Vector& xs = *obj.minimizer;
    double stationarity = 0.0;
    if (obj.lipschitz_L() > 0.0) {
      const double L = obj.lipschitz_L();
      stationarity = L * (xs - g.prox(xs - obj.smooth_part.gradient(xs) / L, 1.0 / L)).norm();
    } else {
      stationarity = (xs - g.prox(xs, 1.0)).norm();
    }
    report.checks.push_back({"minimizer_stationarity", stationarity, stationarity <= 1e-8});
  }
  return report;
}

}  // namespace hnag
