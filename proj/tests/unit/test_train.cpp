#include "data.hpp"
#include "errors.hpp"
#include "helpers.hpp"
#include "train.hpp"

#include <doctest.h>

#include <cmath>

using namespace hdd;
using namespace hdd::test;

namespace {

MlpSpec spec_of(Index d, std::vector<Index> hidden, Index k) {
  MlpSpec s;
  s.input_dim = d;
  s.hidden_widths = std::move(hidden);
  s.output_dim = k;
  return s;
}

SgdSchedule schedule(Index epochs, double lr, Index batch, std::uint64_t shuffle = 0) {
  SgdSchedule s;
  s.epochs = epochs;
  s.lr0 = lr;
  s.batch_size = batch;
  s.shuffle_seed = shuffle;
  return s;
}

}  // namespace

TEST_CASE("learning rate drops by the decay factor each quarter") {
  SgdSchedule s = schedule(100, 0.4, 1);
  CHECK(s.learning_rate(0) == doctest::Approx(0.4));
  CHECK(s.learning_rate(24) == doctest::Approx(0.4));
  CHECK(s.learning_rate(25) == doctest::Approx(0.3));
  CHECK(s.learning_rate(50) == doctest::Approx(0.225));
  CHECK(s.learning_rate(99) == doctest::Approx(0.4 * std::pow(0.75, 3)));
}

TEST_CASE("schedule validation") {
  SgdSchedule s;
  s.lr0 = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = SgdSchedule{};
  s.decay = 1.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = SgdSchedule{};
  s.batch_size = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("linear model on consistent data recovers the least-squares solution") {
  const Matrix x = gaussian(30, 3, 1);
  Vector beta(4);
  beta << 0.5, -1.0, 2.0, 0.3;
  Matrix aug(30, 4);
  aug << x, Vector::Ones(30);
  const Matrix y = aug * beta;
  const Dataset data = make_regression(x, y);
  const TrainedModel m = sgd_train(spec_of(3, {}, 1), data, LossKind::mse, schedule(3000, 0.2, 30), 7);
  const Vector ols = aug.colPivHouseholderQr().solve(y.col(0));
  // Packing: weights then bias, the same order as [x 1].
  CHECK((m.theta_star - ols).norm() <= 1e-3 * ols.norm());
  CHECK(m.train_loss <= 1e-10);
  CHECK(m.status == TrainStatus::interpolated);
}

TEST_CASE("zero epochs keep the initialization") {
  const Dataset data = gen_classification(20, 4, 3, 0.0, 1);
  const TrainedModel m = sgd_train(spec_of(4, {5}, 3), data, LossKind::cross_entropy, schedule(0, 0.1, 4), 3);
  CHECK((m.theta_star.array() == m.theta0.array()).all());
  CHECK(m.epochs_run == 0);
}

TEST_CASE("training is deterministic in seed and schedule") {
  const Dataset data = gen_classification(24, 4, 3, 0.1, 2);
  const MlpSpec s = spec_of(4, {6}, 3);
  const TrainedModel a = sgd_train(s, data, LossKind::mse, schedule(50, 0.1, 5, 9), 4);
  const TrainedModel b = sgd_train(s, data, LossKind::mse, schedule(50, 0.1, 5, 9), 4);
  const TrainedModel c = sgd_train(s, data, LossKind::mse, schedule(50, 0.1, 5, 10), 4);
  CHECK((a.theta_star.array() == b.theta_star.array()).all());
  CHECK(a.train_loss == b.train_loss);
  CHECK((a.theta_star - c.theta_star).norm() > 0.0);
}

TEST_CASE("full-batch training loss is non-increasing at a small learning rate") {
  const Dataset data = make_regression(gaussian(25, 4, 5), gaussian(25, 2, 6));
  MlpParams p = init(spec_of(4, {}, 2), 8);
  double prev = evaluate(p, data, LossKind::mse).loss;
  for (int e = 0; e < 200; ++e) {
    const TrainedModel step = sgd_train_from(p, data, LossKind::mse, schedule(1, 0.01, 25));
    p.theta = step.theta_star;
    const double now = evaluate(p, data, LossKind::mse).loss;
    CHECK(now <= prev + 1e-15);
    prev = now;
  }
}

TEST_CASE("divergence stops early with diverged_nan") {
  const Dataset data = make_regression(gaussian(20, 3, 9) * 10.0, gaussian(20, 1, 10) * 10.0);
  const TrainedModel m = sgd_train(spec_of(3, {8}, 1), data, LossKind::mse, schedule(500, 50.0, 1), 1);
  CHECK(m.status == TrainStatus::diverged_nan);
  CHECK(m.epochs_run < 500);
}

TEST_CASE("interpolated MSE model is stationary") {
  const Dataset data = gen_classification(16, 6, 2, 0.0, 11, 0, {1.0, 0.4});
  const TrainedModel m = sgd_train(spec_of(6, {20}, 2), data, LossKind::mse, schedule(3000, 0.1, 1), 12);
  CHECK(m.train_accuracy == 1.0);
  REQUIRE(m.status == TrainStatus::interpolated);
  CHECK(m.train_mse <= kInterpolationMse);
  const AssumptionReport r = assumption_report(m, data, LossKind::mse);
  CHECK(r.grad_norm <= 1e-4 * (1.0 + m.theta_star.norm()));
}

TEST_CASE("cross-entropy interpolation means full training accuracy") {
  const Dataset data = gen_classification(16, 6, 3, 0.0, 20, 0, {3.0, 1.0});
  const TrainedModel m =
      sgd_train(spec_of(6, {10}, 3), data, LossKind::cross_entropy, schedule(500, 0.1, 4), 21);
  CHECK(m.train_accuracy == 1.0);
  CHECK(m.status == TrainStatus::interpolated);
}

TEST_CASE("assumption_report: untrained and output-layer-only models") {
  const Dataset data = gen_classification(20, 4, 3, 0.0, 13);
  const TrainedModel untrained = sgd_train(spec_of(4, {6}, 3), data, LossKind::mse, schedule(0, 0.1, 4), 14);
  const AssumptionReport a = assumption_report(untrained, data, LossKind::mse);
  REQUIRE(a.rho);
  CHECK(*a.rho == 1.0);

  MlpSpec s = spec_of(4, {6}, 3);
  s.output_layer_only = true;
  const TrainedModel frozen = sgd_train(s, data, LossKind::mse, schedule(200, 0.1, 4), 15);
  CHECK((frozen.theta_star - frozen.theta0).norm() > 0.0);
  const AssumptionReport b = assumption_report(frozen, data, LossKind::mse);
  REQUIRE(b.rho);
  CHECK(*b.rho == 1.0);
  CHECK(b.hf_ho_ratio == 0.0);
}

TEST_CASE("evaluate: loss, standard error and accuracy") {
  const Dataset data = make_regression(gaussian(4, 2, 16), gaussian(4, 1, 17));
  const MlpParams zero{spec_of(2, {}, 1), Vector::Zero(3)};
  const Evaluation e = evaluate(zero, data, LossKind::mse);
  const Vector per = 0.5 * data.y.col(0).array().square();
  const double mean = per.mean();
  const double sd = std::sqrt((per.array() - mean).square().sum() / 3.0);
  CHECK(e.loss == doctest::Approx(mean));
  CHECK(e.loss_se == doctest::Approx(sd / 2.0));
  CHECK(e.mse == doctest::Approx(2.0 * mean));
}

TEST_CASE("sgd_train input errors") {
  const Dataset reg = make_regression(gaussian(5, 2, 18), gaussian(5, 1, 19));
  CHECK_THROWS_AS(sgd_train(spec_of(2, {3}, 1), reg, LossKind::cross_entropy, schedule(1, 0.1, 1), 0), InputError);
  CHECK_THROWS_AS(sgd_train(spec_of(3, {3}, 1), reg, LossKind::mse, schedule(1, 0.1, 1), 0), InputError);
}
