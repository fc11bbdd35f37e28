#pragma once

#include "linalg.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hdd {

enum class EntryDist { gaussian, rademacher, uniform };

std::string to_string(EntryDist d);
EntryDist entry_dist_from_string(const std::string& s);

/// m x n matrix of i.i.d. zero-mean, unit-variance entries.
Matrix sample_matrix(EntryDist dist, Index m, Index n, std::uint64_t seed);

/// Extreme eigenvalues of (1/n) Z Z^T for one draw of Z (m x n).
std::pair<double, double> sample_cov_extremes(const Matrix& z);

struct EdgeCheck {
  EntryDist dist = EntryDist::gaussian;
  Index m = 0;
  Index n = 0;
  double gamma = 0.0;
  Index trials = 0;
  double lambda_min_mean = 0.0;
  double lambda_min_sd = 0.0;
  double lambda_max_mean = 0.0;
  double lambda_max_sd = 0.0;
  double c = 1.0;
  double predicted_min = 0.0;  // (1 - c sqrt(gamma))^2
  double predicted_max = 0.0;  // (1 + c sqrt(gamma))^2
};

inline constexpr Index kDefaultEdgeTrials = 10;

/// Least-squares fit of c in (1 -/+ c sqrt(gamma))^2 to the mean edges over
/// gamma in {0.1, ..., 0.9} at sample size n.
double fit_edge_constant(EntryDist dist, Index n, Index trials, std::uint64_t seed);

/// Mean/sd of the edges over `trials` draws, trial t using the stream
/// derived from (seed, t). Predictions use `c` when given, otherwise a fit
/// at sample size min(n, 500).
EdgeCheck edge_check(EntryDist dist, Index m, Index n, Index trials, std::uint64_t seed,
                     std::optional<double> c = std::nullopt);

}  // namespace hdd
