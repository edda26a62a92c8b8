#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hnag/objectives.hpp"

namespace hnag {

/// Serializable problem description. Matrices are stored row-major; the
/// declared L and mu are taken as given when the problem is rebuilt.
struct Fixture {
  std::string kind;                 // quadratic | logistic | lasso | l1
  std::vector<std::size_t> dims;    // {rows, cols} for matrix kinds, {n} for l1
  std::vector<double> matrix;       // Q, features or A
  std::vector<double> vector;       // b (quadratic, lasso) or labels (logistic)
  double weight = 0.0;              // l1 weight (lasso, l1) or ridge (logistic)
  double L = 0.0;
  double mu = 0.0;
  std::optional<std::vector<double>> x_star;
  std::optional<double> f_star;

  bool operator==(const Fixture&) const = default;
};

inline constexpr std::size_t kMaxFixtureEntries = 10'000;

/// Random rotation of diag(linspace(mu, L)); b chosen inside range(Q).
Fixture quadratic_fixture(std::size_t dim, double mu, double L, std::uint64_t seed);
/// Q = diag(eigenvalues), b given.
Fixture diagonal_quadratic_fixture(const std::vector<double>& eigenvalues,
                                   const std::vector<double>& b);
/// Gaussian features, labels from a planted separator with label noise.
Fixture logistic_fixture(std::size_t dim, std::size_t samples, double ridge, std::uint64_t seed);
/// Gaussian A (rows x cols), sparse planted signal plus noise. When `weight`
/// is not positive it is set to 0.1 * ||A'b||_inf.
Fixture lasso_fixture(std::size_t rows, std::size_t cols, double weight, std::uint64_t seed);
Fixture l1_fixture(std::size_t dim, double weight);

/// Rebuilds the objective with the fixture's declared constants and
/// reference minimizer.
Problem build_problem(const Fixture& fixture);

std::string fixture_to_json(const Fixture& fixture);
/// Strict: unknown keys and oversize payloads are rejected.
Fixture fixture_from_json(const std::string& text);

Fixture load_fixture(const std::string& path);
void save_fixture(const Fixture& fixture, const std::string& path);

}  // namespace hnag
