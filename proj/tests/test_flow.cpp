#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "hnag/fixtures.hpp"
#include "hnag/flow.hpp"

using hnag::Matrix;
using hnag::Vector;
using namespace hnag::flow;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

hnag::SmoothObjective half_square() {
  return hnag::make_quadratic(Matrix::Identity(1, 1), Vector::Zero(1));
}

FlowParams params_for(const hnag::SmoothObjective& obj, double mu, double beta) {
  return FlowParams{mu, constant_beta(beta), obj};
}

}  // namespace

TEST_CASE("vector field at the equilibrium vanishes") {
  const auto q = hnag::make_quadratic(Vector::LinSpaced(3, 1.0, 5.0).asDiagonal(),
                                      Vector::Zero(3));
  const FlowState eq{Vector::Zero(3), Vector::Zero(3), 0.7};
  const auto d = vector_field(eq, params_for(q, 0.7, 3.0), 0.0);
  CHECK(d.dx.norm() == 0.0);
  CHECK(d.dv.norm() == 0.0);
  CHECK(d.dgamma == 0.0);
}

TEST_CASE("vector field hand values for f = x^2 / 2") {
  const auto f = half_square();
  // x' = v - x - beta x, gamma v' = mu (x - v) - x, gamma' = mu - gamma
  auto d = vector_field({scalar(1.0), scalar(0.0), 1.0}, params_for(f, 0.0, 0.0), 0.0);
  CHECK(d.dx(0) == -1.0);
  CHECK(d.dv(0) == -1.0);
  CHECK(d.dgamma == -1.0);

  d = vector_field({scalar(1.0), scalar(0.0), 1.0}, params_for(f, 0.0, 1.0), 0.0);
  CHECK(d.dx(0) == -2.0);

  d = vector_field({scalar(1.0), scalar(1.0), 1.0}, params_for(f, 1.0, 1.0), 0.0);
  CHECK(d.dx(0) == -1.0);
  CHECK(d.dv(0) == -1.0);
  CHECK(d.dgamma == 0.0);

  CHECK_THROWS_AS(vector_field({scalar(1.0), scalar(1.0), 0.0}, params_for(f, 1.0, 1.0), 0.0),
                  std::invalid_argument);
}

TEST_CASE("integrator matches the closed-form linear flows") {
  const auto f = half_square();
  const double tol = 1e-8;
  const double x0 = 1.5, v0 = -0.5;
  // mu = gamma = 1 keeps gamma fixed and the system linear:
  //   beta = 0: v = v0 e^{-t}, x = (x0 + v0 t) e^{-t}
  //   beta = 1: v = v0 e^{-t}, x = x0 e^{-2t} + v0 (e^{-t} - e^{-2t})
  for (double beta : {0.0, 1.0}) {
    const auto traj = integrate_flow({scalar(x0), scalar(v0), 1.0}, params_for(f, 1.0, beta), 5.0,
                                     {tol, 201});
    REQUIRE(traj.times.size() == 201);
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const double t = traj.times[i];
      const double x = beta == 0.0 ? (x0 + v0 * t) * std::exp(-t)
                                   : x0 * std::exp(-2 * t) + v0 * (std::exp(-t) - std::exp(-2 * t));
      worst = std::max(worst, std::abs(traj.states[i].x(0) - x));
      worst = std::max(worst, std::abs(traj.states[i].v(0) - v0 * std::exp(-t)));
      CHECK(traj.states[i].gamma == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(worst <= 10 * tol);
  }
}

TEST_CASE("integrator against a series matrix exponential") {
  // f = 1/2 x'Qx, mu = gamma = 1, beta = 0.3: y' = M y with y = (x, v)
  Matrix Q(2, 2);
  Q << 2.0, 0.5, 0.5, 1.0;
  const auto f = hnag::make_quadratic(Q, Vector::Zero(2));
  const double beta = 0.3;
  Matrix M = Matrix::Zero(4, 4);
  M.topLeftCorner(2, 2) = -Matrix::Identity(2, 2) - beta * Q;
  M.topRightCorner(2, 2) = Matrix::Identity(2, 2);
  M.bottomLeftCorner(2, 2) = Matrix::Identity(2, 2) - Q;
  M.bottomRightCorner(2, 2) = -Matrix::Identity(2, 2);

  Vector y0(4);
  y0 << 1.0, -2.0, 0.5, 0.25;
  const auto traj = integrate_flow({y0.head(2), y0.tail(2), 1.0}, params_for(f, 1.0, beta), 3.0,
                                   {1e-9, 101});
  for (std::size_t i = 0; i < traj.times.size(); i += 10) {
    // exp(tM) y0 by scaling and squaring of a truncated Taylor series
    const double t = traj.times[i];
    const int squarings = 6;
    const Matrix A = (t / std::pow(2.0, squarings)) * M;
    Matrix E = Matrix::Identity(4, 4), term = Matrix::Identity(4, 4);
    for (int n = 1; n < 20; ++n) {
      term = term * A / n;
      E += term;
    }
    for (int s = 0; s < squarings; ++s) E = E * E;
    const Vector exact = E * y0;
    Vector got(4);
    got << traj.states[i].x, traj.states[i].v;
    CHECK((got - exact).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("gamma alone decays like e^{-t} when mu = 0") {
  const auto f = half_square();
  const double tol = 1e-8;
  const auto traj = integrate_flow({scalar(0.0), scalar(0.0), 1.0}, params_for(f, 0.0, 0.0), 5.0,
                                   {tol, 150});
  REQUIRE(traj.times.size() == 150);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    CHECK(std::abs(traj.states[i].gamma - std::exp(-traj.times[i])) <= 10 * tol);
    CHECK(traj.states[i].x(0) == 0.0);
  }
}

TEST_CASE("samples are uniform, at least 100, and end at t_end") {
  const auto f = half_square();
  const auto traj =
      integrate_flow({scalar(1.0), scalar(0.0), 1.0}, params_for(f, 0.0, 1.0), 2.0, {1e-6, 10});
  REQUIRE(traj.times.size() == 100);
  CHECK(traj.times.front() == 0.0);
  CHECK(traj.times.back() == 2.0);
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    CHECK(traj.times[i] - traj.times[i - 1] == doctest::Approx(2.0 / 99));
  }
  CHECK(traj.accepted_steps > 0);
}

TEST_CASE("integrator rejects bad arguments and aborts on step underflow") {
  const auto f = half_square();
  const FlowState s{scalar(1.0), scalar(0.0), 1.0};
  CHECK_THROWS_AS(integrate_flow(s, params_for(f, 0.0, 0.0), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(integrate_flow(s, params_for(f, 0.0, 0.0), 1.0, {1e-13}), std::invalid_argument);
  CHECK_THROWS_AS(integrate_flow(s, params_for(f, 0.0, 0.0), 1.0, {1e-1}), std::invalid_argument);

  // a gradient with a jump of 1e30 at x = 0.5 cannot be resolved
  hnag::SmoothObjective jump = f;
  jump.gradient = [](const Vector& x) -> Vector {
    return Vector::Constant(1, x(0) < 0.5 ? 0.0 : 1e30);
  };
  CHECK_THROWS_AS(integrate_flow({scalar(0.0), scalar(1.0), 1.0}, params_for(jump, 0.0, 0.0), 3.0),
                  hnag::IntegrationError);
}

TEST_CASE("continuous Lyapunov function") {
  const auto f = half_square();
  CHECK(lyapunov_continuous({scalar(0.0), scalar(0.0), 3.0}, f) == 0.0);
  // f(x) - f* + gamma/2 |v - x*|^2 with x* = 0, f* = 0
  const double value = lyapunov_continuous({scalar(1.0), scalar(1.0), 2.0}, f);
  CHECK(value == 1.5);
  CHECK(value == doctest::Approx(f.value(scalar(1.0)) + 0.5 * 2.0 * scalar(1.0).squaredNorm()));
  // at v = x* the gamma term vanishes, so scaling gamma changes nothing
  CHECK(lyapunov_continuous({scalar(1.0), scalar(0.0), 2.0}, f) == 0.5);
  CHECK(lyapunov_continuous({scalar(1.0), scalar(0.0), 4.0}, f) == 0.5);

  hnag::SmoothObjective no_ref = f;
  no_ref.minimizer.reset();
  CHECK_THROWS_AS(lyapunov_continuous({scalar(1.0), scalar(0.0), 1.0}, no_ref),
                  std::invalid_argument);
}

TEST_CASE("decay certificate holds on equilibrium and quadratic runs") {
  const auto f = half_square();
  const double tol = 1e-8;
  {
    const auto p = params_for(f, 1.0, 1.0);
    const auto traj = integrate_flow({scalar(0.0), scalar(0.0), 1.0}, p, 5.0, {tol});
    const auto rep = verify_continuous_decay(traj, p, tol);
    CHECK(rep.pass);
    CHECK(rep.initial_lyapunov == 0.0);
    CHECK(rep.final_lyapunov == 0.0);
  }
  const auto fx = hnag::quadratic_fixture(5, 1.0, 10.0, 3);
  const auto q = std::get<hnag::SmoothObjective>(hnag::build_problem(fx));
  const Vector x0 = Vector::Ones(5);
  for (auto [mu, beta] : {std::pair{1.0, 1.0}, std::pair{0.0, 0.0}}) {
    const auto p = params_for(q, mu, beta);
    const auto traj = integrate_flow({x0, -x0, 1.0}, p, 5.0, {tol, 1001});
    const auto rep = verify_continuous_decay(traj, p, tol);
    CHECK(rep.pass);
    CHECK(rep.integral_pass);
    CHECK(rep.monotone_pass);
    CHECK(rep.final_lyapunov <= std::exp(-5.0) * rep.initial_lyapunov * (1 + 100 * tol));
  }
}

TEST_CASE("gamma stays between gamma0 and mu") {
  const auto fx = hnag::quadratic_fixture(3, 0.5, 4.0, 5);
  const auto q = std::get<hnag::SmoothObjective>(hnag::build_problem(fx));
  const double tol = 1e-8;
  for (double gamma0 : {0.2, 3.0}) {
    const auto traj = integrate_flow({Vector::Ones(3), Vector::Zero(3), gamma0},
                                     params_for(q, 0.5, 0.5), 5.0, {tol});
    for (const auto& s : traj.states) {
      CHECK(s.gamma >= std::min(gamma0, 0.5) - 100 * tol);
      CHECK(s.gamma <= std::max(gamma0, 0.5) + 100 * tol);
    }
  }
}

TEST_CASE("trajectory satisfies the second-order form") {
  // gamma (x'' + x' + beta Q x') + mu x' + (1 + mu beta) grad f(x) = 0 for
  // constant beta, checked with central differences on a fine sample grid
  Matrix Q(2, 2);
  Q << 3.0, 1.0, 1.0, 2.0;
  const auto q = hnag::make_quadratic(Q, Vector::Ones(2));
  const double mu = 0.5, beta = 0.4;
  const auto traj = integrate_flow({Vector::Zero(2), Vector::Ones(2), 2.0},
                                   params_for(q, mu, beta), 2.0, {1e-10, 2001});
  const double h = traj.times[1] - traj.times[0];
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < traj.times.size(); ++i) {
    const Vector& xm = traj.states[i - 1].x;
    const Vector& x = traj.states[i].x;
    const Vector& xp = traj.states[i + 1].x;
    const Vector d1 = (xp - xm) / (2 * h);
    const Vector d2 = (xp - 2 * x + xm) / (h * h);
    const double g = traj.states[i].gamma;
    const Vector res = g * (d2 + d1 + beta * Q * d1) + mu * d1 + (1 + mu * beta) * q.gradient(x);
    worst = std::max(worst, res.norm());
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("trajectory exports") {
  const auto f = half_square();
  const auto p = params_for(f, 0.0, 1.0);
  const auto traj = integrate_flow({scalar(1.0), scalar(0.0), 1.0}, p, 1.0, {1e-6});
  const std::string csv = trajectory_csv(traj, p);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,L,grad_norm,gamma");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == traj.times.size());
  CHECK(trajectory_json(traj).find("\"gamma\"") != std::string::npos);
}
