#include "errors.hpp"
#include "linalg.hpp"
#include "rmt.hpp"

#include <doctest.h>

#include <cmath>

using namespace hdd;

TEST_CASE("sample_matrix: rademacher entries are signs") {
  const Matrix z = sample_matrix(EntryDist::rademacher, 30, 40, 1);
  CHECK((z.array().abs() == 1.0).all());
}

TEST_CASE("sample_matrix: unit variance, zero mean, deterministic") {
  for (EntryDist dist : {EntryDist::gaussian, EntryDist::rademacher, EntryDist::uniform}) {
    const Index m = 20, n = 5000;
    const Matrix z = sample_matrix(dist, m, n, 2);
    const Matrix cov = z * z.transpose() / static_cast<double>(n);
    // E ||cov - I||_F^2 is about (m^2 + m) / n; allow twice its square root.
    const double allowed = 2.0 * std::sqrt(static_cast<double>(m * m + m) / static_cast<double>(n));
    CHECK((cov - Matrix::Identity(m, m)).norm() <= allowed);
    CHECK(std::abs(z.mean()) <= 3.0 / std::sqrt(static_cast<double>(m * n)));
    CHECK((sample_matrix(dist, m, n, 2).array() == z.array()).all());
  }
  CHECK((sample_matrix(EntryDist::gaussian, 3, 3, 1) - sample_matrix(EntryDist::gaussian, 3, 3, 2)).norm() > 0.0);
}

TEST_CASE("edge_check: gaussian gamma 0.25") {
  const EdgeCheck e = edge_check(EntryDist::gaussian, 500, 2000, 10, 3);
  CHECK(e.gamma == doctest::Approx(0.25));
  CHECK(std::abs(e.lambda_min_mean - 0.25) <= 0.1 * 0.25);
  CHECK(std::abs(e.lambda_max_mean - 2.25) <= 0.1 * 2.25);
  CHECK(e.c == doctest::Approx(1.0).epsilon(0.1));
  CHECK(e.lambda_min_mean <= e.lambda_max_mean);
}

TEST_CASE("edge_check: small gamma approaches the identity") {
  const EdgeCheck e = edge_check(EntryDist::gaussian, 2, 10000, 10, 4, 1.0);
  CHECK(std::abs(e.lambda_min_mean - 1.0) <= 0.05);
  CHECK(e.predicted_min == doctest::Approx(std::pow(1 - std::sqrt(2e-4), 2)));
}

TEST_CASE("edge_check: estimates tighten with n") {
  auto deviation = [](Index n) {
    const EdgeCheck e = edge_check(EntryDist::gaussian, n / 4, n, 10, 5, 1.0);
    return std::abs(e.lambda_min_mean - 0.25) + std::abs(e.lambda_max_mean - 2.25);
  };
  CHECK(deviation(4000) <= deviation(500));
}

TEST_CASE("edge_check: input errors") {
  CHECK_THROWS_AS(edge_check(EntryDist::gaussian, 10, 5, 2, 0), InputError);
  CHECK_THROWS_AS(edge_check(EntryDist::gaussian, 2, 5, 0, 0), InputError);
  CHECK_THROWS(entry_dist_from_string("cauchy"));
}

TEST_CASE("adding a column never decreases lambda_max of Z Z^T") {
  const Matrix z = sample_matrix(EntryDist::uniform, 15, 40, 6);
  double prev = 0.0;
  for (Index c = 1; c <= 40; ++c) {
    const Matrix zc = z.leftCols(c);
    const double top = sym_eigenvalues(SymMatrix(zc * zc.transpose()))(0);
    CHECK(top >= prev - 1e-12 * top);
    prev = top;
  }
}

TEST_CASE("smallest eigenvalue collapses as gamma approaches 1") {
  const Index n = 2000;
  double prev = 0.0;
  for (double gamma : {0.2, 0.4, 0.6, 0.8, 0.98, 1.0}) {
    const auto m = static_cast<Index>(std::llround(gamma * n));
    const double inv = 1.0 / sample_cov_extremes(sample_matrix(EntryDist::gaussian, m, n, 7)).first;
    CHECK(inv > prev);
    if (gamma >= 0.98) CHECK(inv > 100.0);
    prev = inv;
  }
}
