#include "hnag/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace hnag::flow {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// continuous extension
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

Vector pack(const FlowState& s) {
  const Eigen::Index n = s.x.size();
  Vector y(2 * n + 1);
  y.head(n) = s.x;
  y.segment(n, n) = s.v;
  y(2 * n) = s.gamma;
  return y;
}

FlowState unpack(const Vector& y, Eigen::Index n) {
  return FlowState{y.head(n), y.segment(n, n), y(2 * n)};
}

Vector rhs(const Vector& y, Eigen::Index n, const FlowParams& params, double t) {
  const FlowDerivative d = vector_field(unpack(y, n), params, t);
  Vector out(y.size());
  out.head(n) = d.dx;
  out.segment(n, n) = d.dv;
  out(2 * n) = d.dgamma;
  return out;
}

std::string fmt17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace

BetaSchedule constant_beta(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("constant_beta: beta must be finite and nonnegative");
  }
  return [beta](double) { return beta; };
}

BetaSchedule default_beta(const SmoothObjective& objective, double gamma0) {
  if (!(objective.lipschitz_L > 0.0) || !(gamma0 > 0.0)) {
    throw std::invalid_argument("default_beta: need L > 0 and gamma0 > 0");
  }
  return constant_beta(1.0 / std::sqrt(objective.lipschitz_L * gamma0));
}

FlowDerivative vector_field(const FlowState& state, const FlowParams& params, double t) {
  if (!(state.gamma > 0.0)) {
    throw std::invalid_argument("vector_field: gamma must be positive");
  }
  const double beta = params.beta ? params.beta(t) : 0.0;
  if (!(beta >= 0.0)) {
    throw std::invalid_argument("vector_field: beta(t) must be nonnegative");
  }
  const Vector grad = params.objective.gradient(state.x);
  FlowDerivative d;
  d.dx = state.v - state.x - beta * grad;
  d.dv = (params.mu * (state.x - state.v) - grad) / state.gamma;
  d.dgamma = params.mu - state.gamma;
  return d;
}

Trajectory integrate_flow(const FlowState& initial, const FlowParams& params, double t_end,
                          const IntegratorOptions& options) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("integrate_flow: t_end must be positive");
  }
  if (!(options.tol > 1e-12 && options.tol < 1e-2)) {
    throw std::invalid_argument("integrate_flow: tol must lie in (1e-12, 1e-2)");
  }
  if (initial.x.size() != initial.v.size() ||
      static_cast<std::size_t>(initial.x.size()) != params.objective.dim) {
    throw std::invalid_argument("integrate_flow: state dimension does not match the objective");
  }
  if (!(initial.gamma > 0.0)) {
    throw std::invalid_argument("integrate_flow: gamma0 must be positive");
  }

  const Eigen::Index n = initial.x.size();
  const std::size_t samples = std::max<std::size_t>(options.samples, 100);
  const double tol = options.tol;
  const double h_min = 1e-14 * t_end;

  // PI controller constants
  const double safe = 0.9, beta_pi = 0.04, expo1 = 0.2 - 0.75 * beta_pi;
  const double facc1 = 1.0 / 0.2, facc2 = 1.0 / 10.0;
  double facold = 1e-4;

  Trajectory traj;
  traj.times.reserve(samples);
  traj.states.reserve(samples);
  auto grid = [&](std::size_t i) {
    return i + 1 == samples ? t_end : t_end * static_cast<double>(i) / static_cast<double>(samples - 1);
  };

  Vector y = pack(initial);
  double t = 0.0;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);
  std::size_t next_sample = 1;

  double h = options.initial_step > 0.0 ? options.initial_step : 1e-3 * t_end;
  bool last_rejected = false;
  Vector k1 = rhs(y, n, params, t);

  while (t < t_end) {
    if (traj.accepted_steps + traj.rejected_steps >= options.max_steps) {
      throw IntegrationError("integrate_flow: step budget exhausted", t);
    }
    bool final_step = false;
    if (t + h >= t_end || t + 1.01 * h >= t_end) {
      h = t_end - t;
      final_step = true;
    }
    if (h < h_min) {
      throw IntegrationError("integrate_flow: step size underflow, h = " + fmt17(h), t);
    }

    const Vector k2 = rhs(y + h * a21 * k1, n, params, t + c2 * h);
    const Vector k3 = rhs(y + h * (a31 * k1 + a32 * k2), n, params, t + c3 * h);
    const Vector k4 = rhs(y + h * (a41 * k1 + a42 * k2 + a43 * k3), n, params, t + c4 * h);
    const Vector k5 =
        rhs(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), n, params, t + c5 * h);
    const Vector k6 = rhs(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), n,
                          params, t + h);
    const Vector y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double t1 = final_step ? t_end : t + h;
    const Vector k7 = rhs(y1, n, params, t1);

    const Vector err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const Vector scale =
        (tol + tol * y.cwiseAbs().cwiseMax(y1.cwiseAbs()).array()).matrix();
    const double err =
        std::sqrt(err_vec.cwiseQuotient(scale).squaredNorm() / static_cast<double>(y.size()));
    if (!std::isfinite(err)) {
      throw IntegrationError("integrate_flow: non-finite error estimate", t);
    }

    const double fac11 = std::pow(err, expo1);
    if (err <= 1.0) {
      double fac = fac11 / std::pow(facold, beta_pi);
      fac = std::max(facc2, std::min(facc1, fac / safe));
      double h_new = h / fac;
      facold = std::max(err, 1e-4);
      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
      ++traj.accepted_steps;

      // dense output for every grid point inside (t, t1]
      const Vector r1 = y;
      const Vector r2 = y1 - y;
      const Vector r3 = h * k1 - r2;
      const Vector r4 = r2 - h * k7 - r3;
      const Vector r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      while (next_sample + 1 < samples && grid(next_sample) <= t1) {
        const double ts = grid(next_sample);
        const double theta = (ts - t) / h;
        const double theta1 = 1.0 - theta;
        const Vector ys = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
        traj.times.push_back(ts);
        traj.states.push_back(unpack(ys, n));
        ++next_sample;
      }
      if (final_step) {
        traj.times.push_back(t_end);
        traj.states.push_back(unpack(y1, n));
      }

      y = y1;
      k1 = k7;
      t = t1;
      if (!y.allFinite()) throw IntegrationError("integrate_flow: state became non-finite", t);
      h = h_new;
    } else {
      h /= std::min(facc1, fac11 / safe);
      last_rejected = true;
      ++traj.rejected_steps;
    }
  }
  return traj;
}

double lyapunov_continuous(const FlowState& state, const SmoothObjective& objective) {
  if (!objective.has_reference()) {
    throw std::invalid_argument("lyapunov_continuous: objective has no reference minimizer");
  }
  const Vector& xs = *objective.minimizer;
  return objective.value(state.x) - *objective.min_value +
         0.5 * state.gamma * (state.v - xs).squaredNorm();
}

DecayReport verify_continuous_decay(const Trajectory& trajectory, const FlowParams& params,
                                    double tol) {
  const auto& obj = params.objective;
  DecayReport rep;
  rep.epsilon = 100.0 * tol;
  const std::size_t m = trajectory.states.size();
  if (m == 0) return rep;

  rep.lyapunov.resize(m);
  rep.integral.assign(m, 0.0);
  std::vector<double> weight(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& s = trajectory.states[i];
    rep.lyapunov[i] = lyapunov_continuous(s, obj);
    const double beta = params.beta ? params.beta(trajectory.times[i]) : 0.0;
    weight[i] = beta * obj.gradient(s.x).squaredNorm();
  }
  const double L0 = rep.lyapunov.front();
  rep.initial_lyapunov = L0;
  rep.final_lyapunov = rep.lyapunov.back();
  // evaluating f(x) - f* carries rounding of order eps * |f*|
  const double floor = 1e-14 * (1.0 + std::abs(*obj.min_value));

  for (std::size_t i = 0; i < m; ++i) {
    const double t = trajectory.times[i];
    if (i > 0) {
      const double dt = t - trajectory.times[i - 1];
      const double decay = std::exp(-dt);
      rep.integral[i] = decay * rep.integral[i - 1] + 0.5 * dt * (decay * weight[i - 1] + weight[i]);

      const double excess = rep.lyapunov[i] - decay * rep.lyapunov[i - 1];
      const double rel = L0 > 0.0 ? excess / L0 : excess;
      if (excess > rep.epsilon * L0 + floor) rep.monotone_pass = false;
      if (rel > rep.worst_monotone_excess) {
        rep.worst_monotone_excess = rel;
        rep.worst_monotone_time = t;
      }
    }
    const double bound = std::exp(-t) * L0;
    const double slack = rep.epsilon * bound + floor;
    if (rep.lyapunov[i] > bound + slack) rep.pass = false;
    if (rep.lyapunov[i] + rep.integral[i] > bound + slack) rep.integral_pass = false;
    if (bound > 0.0) {
      const double r = rep.lyapunov[i] / bound;
      const double ri = (rep.lyapunov[i] + rep.integral[i]) / bound;
      if (r > rep.worst_ratio) {
        rep.worst_ratio = r;
        rep.worst_time = t;
      }
      if (ri > rep.worst_integral_ratio) {
        rep.worst_integral_ratio = ri;
        rep.worst_integral_time = t;
      }
    }
  }
  return rep;
}

std::string DecayReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["pass"] = pass;
  doc["integral_pass"] = integral_pass;
  doc["monotone_pass"] = monotone_pass;
  doc["epsilon"] = epsilon;
  doc["initial_lyapunov"] = initial_lyapunov;
  doc["final_lyapunov"] = final_lyapunov;
  doc["worst_ratio"] = worst_ratio;
  doc["worst_time"] = worst_time;
  doc["worst_integral_ratio"] = worst_integral_ratio;
  doc["worst_integral_time"] = worst_integral_time;
  doc["worst_monotone_excess"] = worst_monotone_excess;
  doc["worst_monotone_time"] = worst_monotone_time;
  doc["samples"] = lyapunov.size();
  return doc.dump(2);
}

std::string trajectory_csv(const Trajectory& trajectory, const FlowParams& params) {
  const auto& obj = params.objective;
  const bool have_ref = obj.has_reference();
  std::ostringstream out;
  out << "t,L,grad_norm,gamma\n";
  for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
    const auto& s = trajectory.states[i];
    const double L = have_ref ? lyapunov_continuous(s, obj) : std::numeric_limits<double>::quiet_NaN();
    out << fmt17(trajectory.times[i]) << ',' << fmt17(L) << ','
        << fmt17(obj.gradient(s.x).norm()) << ',' << fmt17(s.gamma) << '\n';
  }
  return out.str();
}

std::string trajectory_json(const Trajectory& trajectory) {
  nlohmann::ordered_json doc;
  auto xs = nlohmann::ordered_json::array();
  auto vs = nlohmann::ordered_json::array();
  std::vector<double> gammas;
  for (const auto& s : trajectory.states) {
    xs.push_back(std::vector<double>(s.x.data(), s.x.data() + s.x.size()));
    vs.push_back(std::vector<double>(s.v.data(), s.v.data() + s.v.size()));
    gammas.push_back(s.gamma);
  }
  doc["t"] = trajectory.times;
  doc["x"] = xs;
  doc["v"] = vs;
  doc["gamma"] = gammas;
  return doc.dump();
}

}  // namespace hnag::flow
