#include "data.hpp"
#include "errors.hpp"
#include "helpers.hpp"
#include "risk.hpp"

#include <doctest.h>

#include <cmath>

using namespace hdd;
using namespace hdd::test;

namespace {

Matrix diag(std::initializer_list<double> v) {
  Vector d(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

double dense_complexity(const Matrix& h, const Matrix& c, double lambda) {
  const Matrix reg = h + lambda * Matrix::Identity(h.rows(), h.cols());
  return reg.ldlt().solve(c).trace();
}

BoundInputs inputs(double s2min, double alpha, double cmin, double lr, Index n) {
  BoundInputs in;
  in.sigma2_min = s2min;
  in.sigma2_max = s2min;
  in.alpha = alpha;
  in.lambda_min_cjac = cmin;
  in.lambda_r_hess = lr;
  in.n = n;
  return in;
}

}  // namespace

TEST_CASE("complexity_term: closed forms") {
  CHECK(complexity_term(SymMatrix::identity(3), SymMatrix::identity(3), 0.0) == doctest::Approx(3.0));
  CHECK(complexity_term(SymMatrix(diag({2, 1})), SymMatrix(diag({4, 3})), 1.0) == doctest::Approx(17.0 / 6.0));
}

TEST_CASE("complexity_term: dense-solve oracle and monotone in lambda") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Matrix h = random_psd(25, 25, 10 + s);
    const Matrix c = random_psd(25, 8, 30 + s);
    double prev = INFINITY;
    for (double lambda : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
      const double t = complexity_term(SymMatrix(h), SymMatrix(c), lambda);
      CHECK(std::abs(t - dense_complexity(h, c, lambda)) <= 1e-9 * std::max(1.0, t));
      CHECK(t <= prev);
      prev = t;
    }
  }
}

TEST_CASE("complexity_term: pseudo-inverse at lambda 0 and collapse") {
  const Matrix h = random_psd(10, 4, 50);
  const Matrix c = random_psd(10, 10, 51);
  // Pseudo-inverse oracle from the SVD-free eigen route.
  const EigenDecomposition e = sym_eig(SymMatrix(h));
  Matrix pinv = Matrix::Zero(10, 10);
  for (Index i = 0; i < 4; ++i) pinv += e.vectors.col(i) * e.vectors.col(i).transpose() / e.values(i);
  CHECK(complexity_term(SymMatrix(h), SymMatrix(c), 0.0) == doctest::Approx((pinv * c).trace()).epsilon(1e-9));
  CHECK_THROWS_AS(complexity_term(SymMatrix::zeros(4), SymMatrix::identity(4), 0.0), CollapseError);
}

TEST_CASE("complexity_term: least-squares sanity") {
  const Matrix x = gaussian(40, 5, 60);
  const Vector y = gaussian_vec(40, 61);
  const Vector theta = x.colPivHouseholderQr().solve(y);
  const Vector r = x * theta - y;
  Matrix cl = Matrix::Zero(5, 5);
  for (Index i = 0; i < 40; ++i) cl += r(i) * r(i) * x.row(i).transpose() * x.row(i);
  cl /= 40.0;
  const Matrix h = x.transpose() * x / 40.0;
  const double direct = (h + 0.1 * Matrix::Identity(5, 5)).inverse().cwiseProduct(cl.transpose()).sum();
  CHECK(complexity_term(SymMatrix(h), SymMatrix(cl), 0.1) == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("bound_inputs_from: residual filtering") {
  const SpectrumSummary cjac = summarize_spectrum(std::vector<double>{2.0, 0.5});
  BoundInputs a = bound_inputs_from({0.3, 0.01, 0.2}, cjac, 0.1, 10, 0.05);
  CHECK(a.sigma2_min == doctest::Approx(0.2));
  CHECK(a.sigma2_max == doctest::Approx(0.3));
  CHECK(a.alpha == doctest::Approx(2.0 / 3.0));
  CHECK(a.kept == 2);
  CHECK(a.lambda_min_cjac == 0.5);
  CHECK(a.lambda_max_cjac == 2.0);

  BoundInputs b = bound_inputs_from({0.0, 0.09, 0.0, 0.0}, cjac, 0.1, 10, 0.0);
  CHECK(b.sigma2_min == doctest::Approx(0.09));
  CHECK(b.alpha == doctest::Approx(0.25));

  BoundInputs c = bound_inputs_from({0.0, 0.0}, cjac, 0.1, 10, 1e-3);
  CHECK(c.alpha == 0.0);
  CHECK(lower_bound(c, 0.123).value == doctest::Approx(0.123));
  CHECK_THROWS_AS(bound_inputs_from({0.1}, cjac, 0.1, 10, -1.0), InputError);
}

TEST_CASE("estimate_bound_inputs on a linear model with planted residuals") {
  // Zero network: residual energy equals y^2.
  MlpSpec s;
  s.input_dim = 2;
  s.output_dim = 1;
  const MlpParams zero{s, Vector::Zero(3)};
  const Matrix x = gaussian(3, 2, 70);
  Matrix y(3, 1);
  y << std::sqrt(0.3), 0.1, -std::sqrt(0.2);
  const BoundInputs in = estimate_bound_inputs(zero, make_regression(x, y), LossKind::mse, 0.5, 9, 0.05, 1e-10);
  CHECK(in.sigma2_min == doctest::Approx(0.2));
  CHECK(in.alpha == doctest::Approx(2.0 / 3.0));
  CHECK(in.n == 9);
  // C_f over the kept rows 0 and 2: (1/2) sum [x 1][x 1]^T.
  Matrix cf = Matrix::Zero(3, 3);
  for (Index i : {0, 2}) {
    Vector a(3);
    a << x(i, 0), x(i, 1), 1.0;
    cf += a * a.transpose() / 2.0;
  }
  const SpectrumSummary ref = summarize_spectrum(sym_eigenvalues(SymMatrix(cf)), 1e-10);
  REQUIRE(ref.lambda_min_nonzero);
  CHECK(in.lambda_min_cjac == doctest::Approx(*ref.lambda_min_nonzero).epsilon(1e-10));
  CHECK(in.lambda_max_cjac == doctest::Approx(ref.lambda_max).epsilon(1e-12));
}

TEST_CASE("lower_bound: substitution, alpha 0, divergence and monotonicity") {
  const LowerBound lb = lower_bound(inputs(0.1, 1.0, 0.2, 0.05, 9), 0.5);
  REQUIRE(lb.value);
  CHECK(*lb.value == doctest::Approx(0.54));
  CHECK_FALSE(lb.divergent);
  REQUIRE(lb.inverse_lambda_r);
  CHECK(*lb.inverse_lambda_r == doctest::Approx(20.0));

  CHECK(*lower_bound(inputs(0.1, 0.0, 0.2, 0.05, 9), 0.5).value == 0.5);

  double prev = 0.0;
  for (double lr = 1.0; lr > 1e-8; lr /= 10) {
    const double v = *lower_bound(inputs(0.1, 1.0, 0.2, lr, 9), 0.0).value;
    CHECK(v > prev);
    prev = v;
  }
  const LowerBound div = lower_bound(inputs(0.1, 1.0, 0.2, 0.0, 9), 0.0);
  CHECK(div.divergent);
  CHECK_FALSE(div.value);
  CHECK(lower_bound(inputs(0.1, 1.0, 0.2, 1e-9, 9), 0.0, 1e-8).divergent);
}

TEST_CASE("upper_bound_complexity: closed forms") {
  CHECK(upper_bound_complexity(SymMatrix::identity(2), SymMatrix::identity(2), 1.0, 1.0, 1.0) ==
        doctest::Approx(1.0));
  CHECK(upper_bound_complexity(SymMatrix::identity(2), SymMatrix::identity(2), 1.0, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(upper_bound_complexity(SymMatrix::identity(2), SymMatrix::identity(2), 1.0, 1.0, 0.0),
                  InputError);
}

TEST_CASE("lower <= complexity <= upper on random scalar-output instances") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Index p = 8, m = 30;
    const Matrix z = gaussian(p, m, 100 + s);  // columns are per-sample Jacobians
    const Vector r = gaussian_vec(m, 200 + s);
    Matrix cl = Matrix::Zero(p, p), cf = Matrix::Zero(p, p);
    std::vector<double> energies;
    for (Index i = 0; i < m; ++i) {
      cf += z.col(i) * z.col(i).transpose() / static_cast<double>(m);
      cl += r(i) * r(i) * z.col(i) * z.col(i).transpose() / static_cast<double>(m);
      energies.push_back(r(i) * r(i));
    }
    const SymMatrix h(random_psd(p, p, 300 + s));
    const double lambda = 0.1;
    const SpectrumSummary hs = summarize_spectrum(sym_eigenvalues(h));
    const BoundInputs in =
        bound_inputs_from(energies, summarize_spectrum(sym_eigenvalues(SymMatrix(cf))), *hs.lambda_min_nonzero, m, 0.0);
    const double mid = complexity_term(h, SymMatrix(cl), lambda);
    const double lo = lower_bound_complexity(in, lambda);
    const double hi = upper_bound_complexity(h, SymMatrix(cf), in.sigma2_max, in.alpha, lambda);
    CHECK(lo <= mid + 1e-9);
    CHECK(mid <= hi + 1e-9);
  }
}

TEST_CASE("trace_capture") {
  const SpectrumSummary flat = summarize_spectrum(std::vector<double>(100, 1.0));
  const auto a = trace_capture(flat, {0.05, 1.0});
  CHECK(a[0].second == doctest::Approx(5.0));
  CHECK(a[1].second == doctest::Approx(100.0));
  const auto b = trace_capture(summarize_spectrum(std::vector<double>{1.0, 1e-4}), {0.5});
  CHECK(b[0].second == doctest::Approx(100.0 * 1e4 / (1e4 + 1)));
  CHECK(b[0].second > 99.99);
  CHECK_THROWS_AS(trace_capture(flat, {1.5}), InputError);
}
