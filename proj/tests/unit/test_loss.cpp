#include "errors.hpp"
#include "helpers.hpp"
#include "loss.hpp"

#include <doctest.h>

#include <cmath>

using namespace hdd;
using namespace hdd::test;

namespace {

Target onehot(Index k, Index label) {
  Target t;
  t.y = Vector::Zero(k);
  t.y(label) = 1.0;
  t.label = label;
  return t;
}

Target real_target(const Vector& y) { return {y, -1}; }

// Independent cross-entropy: shift by the max, sum exponentials.
double ce_reference(const Vector& f, Index label) {
  const double m = f.maxCoeff();
  double s = 0.0;
  for (Index i = 0; i < f.size(); ++i) s += std::exp(f(i) - m);
  return m + std::log(s) - f(label);
}

}  // namespace

TEST_CASE("value: basic cases") {
  const Vector y = gaussian_vec(3, 1);
  CHECK(loss_value(LossKind::mse, y, real_target(y)) == 0.0);
  CHECK(loss_value(LossKind::cross_entropy, Vector::Zero(2), onehot(2, 0)) == doctest::Approx(std::log(2.0)));
  const Vector f = gaussian_vec(3, 2);
  CHECK(loss_value(LossKind::mse, f, real_target(y)) == doctest::Approx(0.5 * (f - y).squaredNorm()));
}

TEST_CASE("value: cross-entropy against an independent log-sum-exp") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Vector f = gaussian_vec(6, 10 + s) * 5.0;
    const Index label = static_cast<Index>(s % 6);
    CHECK(std::abs(loss_value(LossKind::cross_entropy, f, onehot(6, label)) - ce_reference(f, label)) <= 1e-12);
  }
  Vector big(3);
  big << 1000, -1000, 0;
  CHECK(std::isfinite(loss_value(LossKind::cross_entropy, big, onehot(3, 1))));
  CHECK(loss_value(LossKind::cross_entropy, big, onehot(3, 1)) == doctest::Approx(2000.0));
}

TEST_CASE("value: class index out of range is an input error") {
  Target t = onehot(3, 0);
  t.label = 3;
  CHECK_THROWS_AS(loss_value(LossKind::cross_entropy, Vector::Zero(3), t), InputError);
}

TEST_CASE("grad_f: closed forms") {
  const Vector y = gaussian_vec(4, 3);
  CHECK(loss_grad_f(LossKind::mse, y, real_target(y)).norm() == 0.0);
  const Vector g = loss_grad_f(LossKind::cross_entropy, Vector::Zero(2), onehot(2, 0));
  CHECK(g(0) == doctest::Approx(-0.5));
  CHECK(g(1) == doctest::Approx(0.5));
}

TEST_CASE("grad_f and hess_f: central differences") {
  for (LossKind kind : {LossKind::mse, LossKind::cross_entropy}) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Index k = 5;
      const Vector f = gaussian_vec(k, 40 + s);
      const Target t = kind == LossKind::mse ? real_target(gaussian_vec(k, 60 + s)) : onehot(k, s % k);
      const Vector g = loss_grad_f(kind, f, t);
      const Matrix h = loss_hess_f(kind, f, t).matrix();
      const double step = 1e-5;
      for (Index i = 0; i < k; ++i) {
        Vector up = f, dn = f;
        up(i) += step;
        dn(i) -= step;
        const double fd = (loss_value(kind, up, t) - loss_value(kind, dn, t)) / (2 * step);
        CHECK(std::abs(fd - g(i)) <= 1e-8);
        const Vector fdg = (loss_grad_f(kind, up, t) - loss_grad_f(kind, dn, t)) / (2 * step);
        CHECK((fdg - h.col(i)).cwiseAbs().maxCoeff() <= 1e-6);
      }
    }
  }
}

TEST_CASE("hess_f: closed forms") {
  const Matrix mse = loss_hess_f(LossKind::mse, gaussian_vec(4, 5), real_target(gaussian_vec(4, 6))).matrix();
  CHECK((mse - Matrix::Identity(4, 4)).norm() == 0.0);

  const Matrix ce = loss_hess_f(LossKind::cross_entropy, Vector::Zero(2), onehot(2, 1)).matrix();
  Matrix expect(2, 2);
  expect << 0.25, -0.25, -0.25, 0.25;
  CHECK((ce - expect).norm() <= 1e-15);

  Vector saturated(3);
  saturated << 1e4, 0, 0;
  CHECK(loss_hess_f(LossKind::cross_entropy, saturated, onehot(3, 0)).frobenius_norm() == 0.0);
}

TEST_CASE("hess_f: cross-entropy is PSD with rank K-1 and zero row sums") {
  for (Index k = 2; k <= 10; ++k) {
    const Vector f = gaussian_vec(k, 70 + static_cast<std::uint64_t>(k));
    const SymMatrix h = loss_hess_f(LossKind::cross_entropy, f, onehot(k, 0));
    const SpectrumSummary s = summarize_spectrum(sym_eigenvalues(h), 1e-10);
    CHECK(s.rank == k - 1);
    CHECK(s.eigenvalues.back() >= -1e-12);
    CHECK(h.matrix().rowwise().sum().cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("hess_f: norm decays with the margin toward the true class") {
  double prev = INFINITY;
  for (double margin = 2.0; margin <= 40.0; margin += 2.0) {
    Vector f = Vector::Zero(4);
    f(2) = margin;
    const double n = loss_hess_f(LossKind::cross_entropy, f, onehot(4, 2)).frobenius_norm();
    CHECK(n <= prev);
    prev = n;
  }
  CHECK(prev <= 1e-15);
}

TEST_CASE("residual_energy") {
  const Vector y = gaussian_vec(3, 7);
  CHECK(residual_energy(LossKind::mse, y, real_target(y)) == 0.0);
  Vector f(1), yy(1);
  f << 2.5;
  yy << 1.0;
  CHECK(residual_energy(LossKind::mse, f, real_target(yy)) == doctest::Approx(2.25));
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Vector logits = gaussian_vec(4, 80 + s);
    const Target t = onehot(4, s % 4);
    CHECK(residual_energy(LossKind::cross_entropy, logits, t) ==
          doctest::Approx(loss_grad_f(LossKind::cross_entropy, logits, t).squaredNorm()).epsilon(1e-14));
  }
}

TEST_CASE("softmax and log_sum_exp") {
  const Vector f = gaussian_vec(5, 9);
  CHECK(softmax(f).sum() == doctest::Approx(1.0));
  CHECK(log_sum_exp(f) == doctest::Approx(std::log(f.array().exp().sum())));
}

TEST_CASE("loss kind names") {
  CHECK(loss_kind_from_string(to_string(LossKind::cross_entropy)) == LossKind::cross_entropy);
  CHECK(loss_kind_from_string("mse") == LossKind::mse);
  CHECK_THROWS(loss_kind_from_string("hinge"));
}
