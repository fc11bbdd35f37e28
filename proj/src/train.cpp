#include "train.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <cmath>
#include <numeric>

namespace hdd {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5eed;

Matrix output_grads(LossKind kind, const Matrix& f, const Dataset& data,
                    const std::vector<Index>& rows) {
  Matrix g(f.rows(), f.cols());
  for (Index i = 0; i < f.rows(); ++i) {
    const Target t = data.target(rows[static_cast<std::size_t>(i)]);
    g.row(i) = loss_grad_f(kind, f.row(i).transpose(), t).transpose();
  }
  return g;
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

}  // namespace

void SgdSchedule::validate() const {
  if (epochs < 0) throw ConfigError("schedule: epochs must be >= 0");
  if (!(lr0 > 0.0)) throw ConfigError("schedule: lr0 must be > 0");
  if (!(decay > 0.0 && decay <= 1.0)) throw ConfigError("schedule: decay must lie in (0, 1]");
  if (batch_size < 1) throw ConfigError("schedule: batch_size must be >= 1");
}

double SgdSchedule::learning_rate(Index epoch) const {
  const Index quarter = epochs > 0 ? std::min<Index>(3, 4 * epoch / epochs) : 0;
  return lr0 * std::pow(decay, static_cast<double>(quarter));
}

std::string to_string(TrainStatus s) {
  switch (s) {
    case TrainStatus::converged: return "converged";
    case TrainStatus::interpolated: return "interpolated";
    case TrainStatus::diverged_nan: return "diverged_nan";
  }
  return "?";
}

Evaluation evaluate(const MlpParams& params, const Dataset& data, LossKind kind) {
  data.validate();
  const Index n = data.size();
  const Matrix f = forward_batch(params, data.x);
  Evaluation ev;
  if (!f.allFinite()) {
    ev.loss = ev.loss_se = ev.mse = std::numeric_limits<double>::quiet_NaN();
    return ev;
  }
  std::vector<double> losses(static_cast<std::size_t>(n));
  Index correct = 0;
  double sq = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Vector fi = f.row(i).transpose();
    losses[static_cast<std::size_t>(i)] = loss_value(kind, fi, data.target(i));
    sq += (fi - data.y.row(i).transpose()).squaredNorm();
    if (data.task == TaskKind::classification) {
      Index arg = 0;
      fi.maxCoeff(&arg);
      if (arg == data.labels[static_cast<std::size_t>(i)]) ++correct;
    }
  }
  const double dn = static_cast<double>(n);
  ev.loss = std::accumulate(losses.begin(), losses.end(), 0.0) / dn;
  if (n > 1) {
    double var = 0.0;
    for (double l : losses) var += (l - ev.loss) * (l - ev.loss);
    ev.loss_se = std::sqrt(var / (dn - 1.0) / dn);
  }
  ev.mse = sq / (dn * static_cast<double>(data.k));
  ev.accuracy = data.task == TaskKind::classification ? static_cast<double>(correct) / dn : 0.0;
  return ev;
}

TrainedModel sgd_train(const MlpSpec& spec, const Dataset& data, LossKind kind,
                       const SgdSchedule& schedule, std::uint64_t seed) {
  return sgd_train_from(init(spec, seed), data, kind, schedule);
}

TrainedModel sgd_train_from(const MlpParams& start, const Dataset& data, LossKind kind,
                            const SgdSchedule& schedule) {
  schedule.validate();
  start.spec.validate();
  if (data.size() == 0) throw InputError("sgd_train: empty dataset");
  data.validate();
  if (data.dim() != start.spec.input_dim) throw InputError("sgd_train: input dimension mismatch");
  if (kind == LossKind::cross_entropy && data.task != TaskKind::classification) {
    throw InputError("sgd_train: cross-entropy needs classification data");
  }

  TrainedModel model;
  model.spec = start.spec;
  model.theta0 = start.theta;
  MlpParams params = start;

  const Index n = data.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  bool diverged = !params.theta.allFinite();
  for (Index epoch = 0; epoch < schedule.epochs && !diverged; ++epoch) {
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(derive_seed(schedule.shuffle_seed, kShuffleStream, static_cast<std::uint64_t>(epoch)));
    shuffle(order, rng);
    const double lr = schedule.learning_rate(epoch);
    for (Index start_row = 0; start_row < n; start_row += schedule.batch_size) {
      const Index stop = std::min(n, start_row + schedule.batch_size);
      std::vector<Index> rows(order.begin() + start_row, order.begin() + stop);
      const Matrix xb = gather_rows(data.x, rows);
      const Matrix f = forward_batch(params, xb);
      if (!f.allFinite()) {
        diverged = true;
        break;
      }
      const Matrix g = output_grads(kind, f, data, rows) / static_cast<double>(rows.size());
      const Vector step = backprop_batch(params, xb, g);
      params.set_trainable(params.trainable() - lr * step);
      if (!params.theta.allFinite()) {
        diverged = true;
        break;
      }
    }
    model.epochs_run = epoch + 1;
  }

  model.theta_star = params.theta;
  if (diverged) {
    model.status = TrainStatus::diverged_nan;
    model.train_loss = model.train_mse = std::numeric_limits<double>::quiet_NaN();
    return model;
  }
  const Evaluation ev = evaluate(params, data, kind);
  model.train_loss = ev.loss;
  model.train_accuracy = ev.accuracy;
  model.train_mse = ev.mse;
  if (std::isnan(ev.loss)) {
    model.status = TrainStatus::diverged_nan;
  } else if (kind == LossKind::mse) {
    model.status = ev.mse <= kInterpolationMse ? TrainStatus::interpolated : TrainStatus::converged;
  } else {
    model.status = ev.accuracy == 1.0 ? TrainStatus::interpolated : TrainStatus::converged;
  }
  return model;
}

AssumptionReport assumption_report(const TrainedModel& model, const Dataset& data, LossKind kind,
                                   double zero_tol_rel, const HessianParts* parts) {
  const MlpParams star = model.optimum();
  AssumptionReport rep;
  HessianParts local;
  if (parts == nullptr) {
    local = assemble(star, data, kind);
    parts = &local;
  }
  const double ho = parts->h_outer.frobenius_norm();
  const double hf = parts->h_func.frobenius_norm();
  rep.hf_ho_ratio = ho > 0.0 ? hf / ho : (hf > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);

  const auto lr_star =
      summarize_spectrum(jac_covariance_eigenvalues(star, data), zero_tol_rel).lambda_min_nonzero;
  const auto lr_init =
      summarize_spectrum(jac_covariance_eigenvalues(model.initial(), data), zero_tol_rel)
          .lambda_min_nonzero;
  if (lr_star && lr_init && *lr_init > 0.0) rep.rho = *lr_star / *lr_init;

  const Matrix f = forward_batch(star, data.x);
  std::vector<Index> all(static_cast<std::size_t>(data.size()));
  std::iota(all.begin(), all.end(), Index{0});
  const Matrix g = output_grads(kind, f, data, all) / static_cast<double>(data.size());
  rep.grad_norm = backprop_batch(star, data.x, g).norm();
  return rep;
}

}  // namespace hdd
