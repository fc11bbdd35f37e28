#pragma once

#include "data.hpp"
#include "linalg.hpp"
#include "train.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hdd {

enum class HatSource { ols, ridge_pushthrough, ntk_at_optimum };

std::string to_string(HatSource s);

struct HatMatrix {
  SymMatrix a;  // n x n
  double lambda = 0.0;
  HatSource source = HatSource::ols;
  // Set when lambda == 0 and X^T X is singular, so a is the pseudo-inverse
  // projection onto the column space.
  bool rank_deficient = false;
  Index design_rank = 0;
};

/// lambda == 0: orthogonal projector onto range(X) (via the SVD).
/// lambda > 0: (X X^T + lambda I)^-1 X X^T, equal to X (X^T X + lambda I)^-1 X^T.
HatMatrix hat_matrix(const Matrix& design, double lambda,
                     double zero_tol_rel = kDefaultZeroTolRel);

/// How leave-one-out influence is measured.
/// exact: the downdated Hessian (X^T X - x_i x_i^T) enters, giving
///        h_i = A_ii / (1 - A_ii).
/// asymptotic: the full-data Hessian stands in for it (n ~ n - 1), h_i = A_ii.
enum class LooMode { exact, asymptotic };

std::string to_string(LooMode m);
LooMode loo_mode_from_string(const std::string& s);

struct LooSample {
  double leverage = 0.0;  // A_ii
  double residual = 0.0;
  double term1 = 0.0;  // per-sample first-order estimate
  double term2 = 0.0;  // per-sample second-order estimate
};

struct LooReport {
  double loo1 = 0.0;
  double loo2 = 0.0;
  std::optional<double> exact_ls;
  double train_mse = 0.0;  // (1/n) sum r_i^2
  std::vector<LooSample> per_sample;
};

/// Leverage guard: A_ii must stay below this.
inline constexpr double kMaxLeverage = 1.0 - 1e-12;

/// Squared-error influence-function LOO estimates from residuals at the
/// full-data optimum:
///   first order  (1/n) sum r_i^2 (1 + 2 h_i)
///   second order (1/n) sum r_i^2 (1 + h_i)^2
/// In exact mode the second-order estimate equals (1/n) sum (r_i / (1 - A_ii))^2.
LooReport loo_influence(const HatMatrix& hat, const Vector& residuals,
                        LooMode mode = LooMode::exact);

/// (1/n) sum ((y_i - theta^T x_i) / (1 - A_ii))^2 with the least-squares
/// (minimum-norm) theta.
double loo_ols_exact(const Matrix& design, const Vector& y);

/// Refits on every n-1 subset (ridge when lambda > 0, minimum-norm least
/// squares otherwise) and averages the held-out squared errors.
double brute_force_loo(const Matrix& design, const Vector& y, double lambda);

/// Least-squares fit used by the estimators above; minimum-norm when lambda == 0.
Vector fit_linear(const Matrix& design, const Vector& y, double lambda);

/// Columns are per-sample parameter influences -(X^T X / n)^-1 x_i r_i at the
/// least-squares optimum.
Matrix ols_influence_directions(const Matrix& design, const Vector& y);

/// LOO for a scalar-output MSE network via the Jacobian kernel Z^T Z at the
/// optimum (Z columns are per-sample Jacobians).
LooReport loo_nn(const TrainedModel& model, const Dataset& data, double lambda,
                 LooMode mode = LooMode::exact);

}  // namespace hdd
