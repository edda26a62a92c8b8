#include "hnag/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

namespace hnag {

namespace {

using json = nlohmann::ordered_json;

Matrix gaussian_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  // fill row by row so the draw order matches the row-major payload
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) M(i, j) = normal(rng);
  }
  return M;
}

Vector gaussian_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal(rng);
  return v;
}

std::vector<double> row_major(const Matrix& M) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(M.size()));
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) out.push_back(M(i, j));
  }
  return out;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix_of(const Fixture& fx) {
  if (fx.dims.size() != 2) {
    throw std::invalid_argument("fixture '" + fx.kind + "' needs dims = [rows, cols]");
  }
  const auto rows = fx.dims[0];
  const auto cols = fx.dims[1];
  if (rows * cols != fx.matrix.size()) {
    throw std::invalid_argument("fixture matrix payload does not match dims");
  }
  Matrix M(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = fx.matrix[i * cols + j];
    }
  }
  return M;
}

}  // namespace

Fixture quadratic_fixture(std::size_t dim, double mu, double L, std::uint64_t seed) {
  if (dim == 0 || dim * dim > kMaxFixtureEntries) {
    throw std::invalid_argument("quadratic_fixture: dim must be in [1, 100]");
  }
  if (!(mu >= 0.0) || !(L > 0.0) || mu > L) {
    throw std::invalid_argument("quadratic_fixture: need 0 <= mu <= L, L > 0");
  }
  std::mt19937_64 rng(seed);
  const Matrix G = gaussian_matrix(rng, dim, dim);
  const Matrix U = Eigen::HouseholderQR<Matrix>(G).householderQ();
  Vector spectrum(static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) {
    spectrum(static_cast<Eigen::Index>(i)) =
        dim == 1 ? L : mu + (L - mu) * static_cast<double>(i) / static_cast<double>(dim - 1);
  }
  Matrix Q = U * spectrum.asDiagonal() * U.transpose();
  Q = (0.5 * (Q + Q.transpose())).eval();
  // b = Q x_plant keeps b in range(Q) even when mu = 0
  const Vector plant = gaussian_vector(rng, dim);
  const Vector b = Q * plant;

  const SmoothObjective obj = make_quadratic(Q, b);
  Fixture fx;
  fx.kind = "quadratic";
  fx.dims = {dim, dim};
  fx.matrix = row_major(Q);
  fx.vector = to_std(b);
  fx.L = obj.lipschitz_L;
  fx.mu = mu == 0.0 ? 0.0 : obj.strong_mu;
  fx.x_star = to_std(*obj.minimizer);
  fx.f_star = *obj.min_value;
  return fx;
}

Fixture diagonal_quadratic_fixture(const std::vector<double>& eigenvalues,
                                   const std::vector<double>& b) {
  const std::size_t n = eigenvalues.size();
  if (n == 0 || b.size() != n) {
    throw std::invalid_argument("diagonal_quadratic_fixture: size mismatch");
  }
  const Matrix Q = to_eigen(eigenvalues).asDiagonal();
  const SmoothObjective obj = make_quadratic(Q, to_eigen(b));
  Fixture fx;
  fx.kind = "quadratic";
  fx.dims = {n, n};
  fx.matrix = row_major(Q);
  fx.vector = b;
  fx.L = obj.lipschitz_L;
  fx.mu = obj.strong_mu;
  fx.x_star = to_std(*obj.minimizer);
  fx.f_star = *obj.min_value;
  return fx;
}

Fixture logistic_fixture(std::size_t dim, std::size_t samples, double ridge, std::uint64_t seed) {
  if (dim == 0 || samples == 0 || dim * samples > kMaxFixtureEntries) {
    throw std::invalid_argument("logistic_fixture: bad shape");
  }
  std::mt19937_64 rng(seed);
  const Matrix A = gaussian_matrix(rng, samples, dim);
  const Vector plant = gaussian_vector(rng, dim);
  const Vector noise = gaussian_vector(rng, samples);
  Vector labels(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    labels(i) = A.row(i).dot(plant) + 0.5 * noise(i) >= 0.0 ? 1.0 : -1.0;
  }
  const SmoothObjective obj = make_logistic(A, labels, ridge);
  const ReferenceSolution ref = reference_newton(obj);
  if (ref.stationarity > 1e-10) {
    throw std::runtime_error("logistic_fixture: reference solve did not converge");
  }

  Fixture fx;
  fx.kind = "logistic";
  fx.dims = {samples, dim};
  fx.matrix = row_major(A);
  fx.vector = to_std(labels);
  fx.weight = ridge;
  fx.L = obj.lipschitz_L;
  fx.mu = obj.strong_mu;
  fx.x_star = to_std(ref.x);
  fx.f_star = ref.value;
  return fx;
}

Fixture lasso_fixture(std::size_t rows, std::size_t cols, double weight, std::uint64_t seed) {
  if (rows == 0 || cols == 0 || rows * cols > kMaxFixtureEntries) {
    throw std::invalid_argument("lasso_fixture: bad shape");
  }
  std::mt19937_64 rng(seed);
  const Matrix A = gaussian_matrix(rng, rows, cols);
  Vector plant = gaussian_vector(rng, cols);
  for (Eigen::Index i = 0; i < plant.size(); i += 2) plant(i) = 0.0;
  const Vector b = A * plant + 0.1 * gaussian_vector(rng, rows);
  if (!(weight > 0.0)) weight = 0.1 * (A.transpose() * b).lpNorm<Eigen::Infinity>();

  const CompositeObjective obj = make_lasso(A, b, weight);
  const ReferenceSolution ref = reference_prox_gradient(obj);
  if (ref.stationarity > 1e-10) {
    throw std::runtime_error("lasso_fixture: reference solve did not converge");
  }

  Fixture fx;
  fx.kind = "lasso";
  fx.dims = {rows, cols};
  fx.matrix = row_major(A);
  fx.vector = to_std(b);
  fx.weight = weight;
  fx.L = obj.lipschitz_L();
  fx.mu = obj.strong_mu;
  fx.x_star = to_std(ref.x);
  fx.f_star = ref.value;
  return fx;
}

Fixture l1_fixture(std::size_t dim, double weight) {
  if (dim == 0 || dim > kMaxFixtureEntries) throw std::invalid_argument("l1_fixture: bad dim");
  Fixture fx;
  fx.kind = "l1";
  fx.dims = {dim};
  fx.weight = weight;
  fx.L = 0.0;
  fx.mu = 0.0;
  fx.x_star = std::vector<double>(dim, 0.0);
  fx.f_star = 0.0;
  return fx;
}

Problem build_problem(const Fixture& fx) {
  if (fx.kind == "quadratic") {
    SmoothObjective obj = make_quadratic(matrix_of(fx), to_eigen(fx.vector));
    obj.lipschitz_L = fx.L;
    obj.strong_mu = fx.mu;
    if (fx.x_star) obj = with_reference(std::move(obj), to_eigen(*fx.x_star));
    return obj;
  }
  if (fx.kind == "logistic") {
    SmoothObjective obj = make_logistic(matrix_of(fx), to_eigen(fx.vector), fx.weight);
    obj.lipschitz_L = fx.L;
    obj.strong_mu = fx.mu;
    if (fx.x_star) obj = with_reference(std::move(obj), to_eigen(*fx.x_star));
    return obj;
  }
  if (fx.kind == "lasso") {
    CompositeObjective obj = make_lasso(matrix_of(fx), to_eigen(fx.vector), fx.weight);
    obj.smooth_part.lipschitz_L = fx.L;
    obj.strong_mu = fx.mu;
    if (fx.x_star) obj = with_reference(std::move(obj), to_eigen(*fx.x_star));
    return obj;
  }
  if (fx.kind == "l1") {
    if (fx.dims.size() != 1) throw std::invalid_argument("fixture 'l1' needs dims = [n]");
    return make_l1_problem(fx.dims[0], fx.weight);
  }
  throw std::invalid_argument("unknown fixture kind '" + fx.kind + "'");
}

std::string fixture_to_json(const Fixture& fx) {
  json doc;
  doc["kind"] = fx.kind;
  doc["dims"] = fx.dims;
  doc["matrix"] = fx.matrix;
  doc["vector"] = fx.vector;
  doc["weight"] = fx.weight;
  doc["L"] = fx.L;
  doc["mu"] = fx.mu;
  if (fx.x_star) doc["x_star"] = *fx.x_star;
  if (fx.f_star) doc["f_star"] = *fx.f_star;
  return doc.dump(2);
}

Fixture fixture_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (!doc.is_object()) throw std::invalid_argument("fixture JSON must be an object");
  static const std::set<std::string> known = {"kind", "dims",  "matrix", "vector", "weight",
                                              "L",    "mu",    "x_star", "f_star"};
  for (const auto& [key, _] : doc.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown fixture key '" + key + "'");
  }
  for (const char* required : {"kind", "dims", "L", "mu"}) {
    if (!doc.contains(required)) {
      throw std::invalid_argument(std::string("fixture key '") + required + "' is required");
    }
  }
  Fixture fx;
  fx.kind = doc.at("kind").get<std::string>();
  fx.dims = doc.at("dims").get<std::vector<std::size_t>>();
  if (doc.contains("matrix")) fx.matrix = doc.at("matrix").get<std::vector<double>>();
  if (doc.contains("vector")) fx.vector = doc.at("vector").get<std::vector<double>>();
  if (doc.contains("weight")) fx.weight = doc.at("weight").get<double>();
  fx.L = doc.at("L").get<double>();
  fx.mu = doc.at("mu").get<double>();
  if (doc.contains("x_star")) fx.x_star = doc.at("x_star").get<std::vector<double>>();
  if (doc.contains("f_star")) fx.f_star = doc.at("f_star").get<double>();
  if (fx.matrix.size() > kMaxFixtureEntries) {
    throw std::invalid_argument("fixture matrix exceeds 10^4 entries");
  }
  return fx;
}

Fixture load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return fixture_from_json(buf.str());
}

void save_fixture(const Fixture& fixture, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fixture file '" + path + "'");
  out << fixture_to_json(fixture) << '\n';
}

}  // namespace hnag
