#include "rmt.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <cmath>

namespace hdd {

namespace {

constexpr std::uint64_t kTrialStream = 0x4d50;
constexpr std::uint64_t kFitStream = 0xf17;

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double s = 0.0;
    for (double x : v) s += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(s / static_cast<double>(v.size() - 1));
  }
  return m;
}

struct EdgeSample {
  double gamma;
  double lmin;
  double lmax;
};

double fit_loss(const std::vector<EdgeSample>& pts, double c) {
  double s = 0.0;
  for (const auto& p : pts) {
    const double a = 1.0 - c * std::sqrt(p.gamma);
    const double b = 1.0 + c * std::sqrt(p.gamma);
    s += (p.lmin - a * a) * (p.lmin - a * a) + (p.lmax - b * b) * (p.lmax - b * b);
  }
  return s;
}

}  // namespace

std::string to_string(EntryDist d) {
  switch (d) {
    case EntryDist::gaussian: return "gaussian";
    case EntryDist::rademacher: return "rademacher";
    case EntryDist::uniform: return "uniform";
  }
  return "?";
}

EntryDist entry_dist_from_string(const std::string& s) {
  if (s == "gaussian") return EntryDist::gaussian;
  if (s == "rademacher") return EntryDist::rademacher;
  if (s == "uniform") return EntryDist::uniform;
  throw InputError("unknown distribution '" + s + "' (expected gaussian, rademacher or uniform)");
}

Matrix sample_matrix(EntryDist dist, Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw InputError("sample_matrix: dimensions must be >= 1");
  Rng rng(seed);
  Matrix z(m, n);
  const double root3 = std::sqrt(3.0);
  // Fill row by row so a given (i, j) entry does not depend on storage order.
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < n; ++j) {
      switch (dist) {
        case EntryDist::gaussian: z(i, j) = standard_normal(rng); break;
        case EntryDist::rademacher: z(i, j) = (rng() >> 63) ? 1.0 : -1.0; break;
        case EntryDist::uniform: z(i, j) = uniform(rng, -root3, root3); break;
      }
    }
  }
  return z;
}

std::pair<double, double> sample_cov_extremes(const Matrix& z) {
  Matrix g = Matrix::Zero(z.rows(), z.rows());
  g.selfadjointView<Eigen::Lower>().rankUpdate(z, 1.0 / static_cast<double>(z.cols()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  return {ev(0), ev(ev.size() - 1)};
}

namespace {

EdgeCheck measure(EntryDist dist, Index m, Index n, Index trials, std::uint64_t seed) {
  if (m < 1 || n < 1) throw InputError("edge_check: dimensions must be >= 1");
  if (m > n) throw InputError("edge_check: requires m <= n");
  if (trials < 1) throw InputError("edge_check: trials must be >= 1");
  std::vector<double> lmin;
  std::vector<double> lmax;
  for (Index t = 0; t < trials; ++t) {
    const Matrix z =
        sample_matrix(dist, m, n, derive_seed(seed, kTrialStream, static_cast<std::uint64_t>(t)));
    const auto [lo, hi] = sample_cov_extremes(z);
    lmin.push_back(lo);
    lmax.push_back(hi);
  }
  EdgeCheck e;
  e.dist = dist;
  e.m = m;
  e.n = n;
  e.gamma = static_cast<double>(m) / static_cast<double>(n);
  e.trials = trials;
  const Moments a = moments(lmin);
  const Moments b = moments(lmax);
  e.lambda_min_mean = a.mean;
  e.lambda_min_sd = a.sd;
  e.lambda_max_mean = b.mean;
  e.lambda_max_sd = b.sd;
  return e;
}

}  // namespace

double fit_edge_constant(EntryDist dist, Index n, Index trials, std::uint64_t seed) {
  std::vector<EdgeSample> pts;
  for (int g = 1; g <= 9; ++g) {
    const double gamma = 0.1 * g;
    const Index m = std::max<Index>(1, static_cast<Index>(std::lround(gamma * static_cast<double>(n))));
    const EdgeCheck e = measure(dist, m, n, trials, derive_seed(seed, kFitStream, static_cast<std::uint64_t>(g)));
    pts.push_back({e.gamma, e.lambda_min_mean, e.lambda_max_mean});
  }
  // Golden-section search; the loss is smooth and unimodal near c = 1.
  double lo = 0.0;
  double hi = 2.0;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = fit_loss(pts, x1);
  double f2 = fit_loss(pts, x2);
  for (int it = 0; it < 100; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = fit_loss(pts, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = fit_loss(pts, x2);
    }
  }
  return 0.5 * (lo + hi);
}

EdgeCheck edge_check(EntryDist dist, Index m, Index n, Index trials, std::uint64_t seed,
                     std::optional<double> c) {
  EdgeCheck e = measure(dist, m, n, trials, seed);
  e.c = c ? *c : fit_edge_constant(dist, std::min<Index>(n, 500), trials, seed);
  const double s = e.c * std::sqrt(e.gamma);
  e.predicted_min = (1.0 - s) * (1.0 - s);
  e.predicted_max = (1.0 + s) * (1.0 + s);
  return e;
}

}  // namespace hdd
