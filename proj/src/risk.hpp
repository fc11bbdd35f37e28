#pragma once

#include "data.hpp"
#include "linalg.hpp"
#include "loss.hpp"
#include "nnet.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace hdd {

/// Tr((H + lambda I)^-1 C) evaluated in H's eigenbasis as
/// sum_i v_i^T C v_i / (lambda_i + lambda). With lambda == 0 only the
/// eigenpairs above the relative zero cut enter (pseudo-inverse); a rank-0 H
/// then throws CollapseError.
double complexity_term(const SymMatrix& h, const SymMatrix& c, double lambda_reg,
                       double zero_tol_rel = kDefaultZeroTolRel);
double complexity_term(const EigenDecomposition& h_eig, const SymMatrix& c, double lambda_reg,
                       double zero_tol_rel = kDefaultZeroTolRel);

struct BoundInputs {
  double sigma2_min = 0.0;  // smallest kept residual energy
  double sigma2_max = 0.0;  // largest kept residual energy
  double alpha = 0.0;       // kept / evaluated
  double lambda_min_cjac = 0.0;  // smallest non-zero eigenvalue of C_f over the kept samples
  double lambda_max_cjac = 0.0;
  double lambda_r_hess = 0.0;    // 0 when the training Hessian has no non-zero eigenvalue
  Index n = 0;                   // training-set size
  double tau = 0.0;
  Index kept = 0;
  Index evaluated = 0;
};

inline constexpr double kDefaultTau = 1e-3;

/// Keeps the evaluation samples whose residual energy ||grad_f loss||^2 is at
/// least tau and summarizes the Jacobian covariance over them.
BoundInputs estimate_bound_inputs(const MlpParams& params, const Dataset& eval, LossKind kind,
                                  double lambda_r_hess, Index n_train, double tau = kDefaultTau,
                                  double zero_tol_rel = kDefaultZeroTolRel);

/// Builds BoundInputs from given residual energies and a filtered Jacobian
/// covariance spectrum; the data-free core of estimate_bound_inputs.
BoundInputs bound_inputs_from(const std::vector<double>& residual_energies,
                              const SpectrumSummary& cjac_filtered, double lambda_r_hess,
                              Index n_train, double tau);

struct LowerBound {
  std::optional<double> value;  // empty when divergent
  bool divergent = false;
  std::optional<double> inverse_lambda_r;
};

/// train_term + sigma2_min alpha lambda_min(C_f) / ((n + 1) lambda_r).
/// lambda_r <= lambda_r_floor marks the bound divergent instead of producing
/// an infinity. alpha == 0 gives train_term.
LowerBound lower_bound(const BoundInputs& in, double train_term, double lambda_r_floor = 0.0);

/// sigma2_min alpha lambda_min(C_f) / (lambda_r + lambda): the complexity-term
/// side of the lower bound, before the 1/(n+1) scaling.
double lower_bound_complexity(const BoundInputs& in, double lambda_reg);

/// sigma2_max alpha Tr((H + lambda I)^-1) lambda_max(C_f). Requires lambda > 0.
double upper_bound_complexity(const SymMatrix& h_loss, const SymMatrix& c_jac_filtered,
                              double sigma2_max, double alpha, double lambda_reg);
double upper_bound_complexity(const Vector& h_eigenvalues, double lambda_max_cjac,
                              double sigma2_max, double alpha, double lambda_reg);

/// For each fraction q: percent of the inverse trace (over positive retained
/// eigenvalues) carried by the ceil(q r) smallest of them.
std::vector<std::pair<double, double>> trace_capture(const SpectrumSummary& spectrum,
                                                     const std::vector<double>& fractions);

struct BoundReport {
  std::optional<double> complexity_term;
  double lower_bound_complexity = 0.0;
  std::optional<double> upper_bound_complexity;
  LowerBound lower;
  double measured_test_loss = 0.0;
  double measured_test_loss_se = 0.0;
  double one_sample_train_loss_proxy = 0.0;
};

}  // namespace hdd
