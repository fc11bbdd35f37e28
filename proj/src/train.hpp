#pragma once

#include "data.hpp"
#include "hessian.hpp"
#include "loss.hpp"
#include "nnet.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace hdd {

/// Minibatch SGD. The learning rate is lr0 * decay^q during quarter q of the
/// run (q = floor(4 e / epochs)).
struct SgdSchedule {
  Index epochs = 1000;
  double lr0 = 0.5;
  double decay = 0.75;
  Index batch_size = 32;
  std::uint64_t shuffle_seed = 0;

  void validate() const;
  double learning_rate(Index epoch) const;
};

enum class TrainStatus { converged, interpolated, diverged_nan };

std::string to_string(TrainStatus s);

struct TrainedModel {
  MlpSpec spec;
  Vector theta0;
  Vector theta_star;
  TrainStatus status = TrainStatus::converged;
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // classification data only
  double train_mse = 0.0;       // mean over samples of ||f - y||^2 / K
  Index epochs_run = 0;

  MlpParams initial() const { return {spec, theta0}; }
  MlpParams optimum() const { return {spec, theta_star}; }
};

struct Evaluation {
  double loss = 0.0;      // mean loss_value
  double loss_se = 0.0;   // standard error of that mean
  double accuracy = 0.0;  // argmax agreement, classification data only
  double mse = 0.0;
};

Evaluation evaluate(const MlpParams& params, const Dataset& data, LossKind kind);

/// Regression/MSE runs count as interpolated when train_mse <= this.
inline constexpr double kInterpolationMse = 1e-8;

/// Deterministic in (spec, data, kind, schedule, seed): seed drives the
/// initialization, schedule.shuffle_seed the per-epoch sample order.
TrainedModel sgd_train(const MlpSpec& spec, const Dataset& data, LossKind kind,
                       const SgdSchedule& schedule, std::uint64_t seed);

/// Same, starting from given parameters.
TrainedModel sgd_train_from(const MlpParams& start, const Dataset& data, LossKind kind,
                            const SgdSchedule& schedule);

struct AssumptionReport {
  double hf_ho_ratio = 0.0;  // ||H_f||_F / ||H_o||_F at the optimum
  // lambda_r(C_f(theta*)) / lambda_r(C_f(theta0)) over the given dataset;
  // empty when either covariance has rank 0.
  std::optional<double> rho;
  double grad_norm = 0.0;  // ||(1/n) sum grad_theta loss_i|| at the optimum
};

/// `parts` may carry an already assembled Hessian at theta_star.
AssumptionReport assumption_report(const TrainedModel& model, const Dataset& data, LossKind kind,
                                   double zero_tol_rel = kDefaultZeroTolRel,
                                   const HessianParts* parts = nullptr);

}  // namespace hdd
