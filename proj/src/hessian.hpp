#pragma once

#include "data.hpp"
#include "linalg.hpp"
#include "loss.hpp"
#include "nnet.hpp"

#include <filesystem>
#include <string>

namespace hdd {

struct HessianOptions {
  // Hessians are p x p and their eigendecomposition is O(p^3).
  Index param_cap = 4000;
};

/// Loss Hessian over a dataset split into its outer-product (Gauss-Newton)
/// and functional parts: h_loss = h_outer + h_func.
struct HessianParts {
  SymMatrix h_outer;
  SymMatrix h_func;
  SymMatrix h_loss;
  Index n_samples = 0;
  LossKind loss_kind = LossKind::mse;
};

/// h_outer = (1/n) sum_i J_i [hess_f loss_i] J_i^T and
/// h_func  = (1/n) sum_i sum_k [grad_f loss_i]_k hess_theta f^k(x_i).
/// Samples are reduced by pairwise summation in sample order. Samples with
/// ||grad_f loss|| <= 1e-14 contribute nothing to h_func.
HessianParts assemble(const MlpParams& params, const Dataset& data, LossKind kind,
                      const HessianOptions& opts = {});

/// Uncentered covariance of per-sample loss gradients, (1/m) sum g_i g_i^T
/// with g_i = J_i grad_f loss_i.
SymMatrix grad_covariance(const MlpParams& params, const Dataset& data, LossKind kind,
                          const HessianOptions& opts = {});

/// Covariance of function Jacobians, (1/|S|) Z_S Z_S^T where Z_S stacks the
/// K Jacobian columns of every sample.
SymMatrix jac_covariance(const MlpParams& params, const Dataset& data,
                         const HessianOptions& opts = {});

/// Eigenvalues of jac_covariance, descending and padded with zeros to length
/// p. Computed from whichever of Z Z^T (p x p) and Z^T Z (K|S| x K|S|) is
/// smaller; the two share their non-zero spectrum.
Vector jac_covariance_eigenvalues(const MlpParams& params, const Dataset& data,
                                  const HessianOptions& opts = {});

struct CovMatrices {
  SymMatrix c_loss;
  SymMatrix c_jac;
  Index z_dim = 0;  // K * |S|
};

CovMatrices covariances(const MlpParams& params, const Dataset& data, LossKind kind,
                        const HessianOptions& opts = {});

/// Central-difference Hessian of the mean loss with respect to the
/// trainable parameters, built from loss values only (four evaluations per
/// off-diagonal pair), then symmetrized. Intended as a test oracle; refuses
/// p > 400.
SymMatrix fd_loss_hessian_oracle(const MlpParams& params, const Dataset& data, LossKind kind,
                                 double h);

/// Measured rank of h_outer against min(p, K n) (mse) or min(p, (K-1) n)
/// (cross-entropy).
struct RankLawReport {
  Index measured_rank = 0;
  Index predicted_rank = 0;
  Index deficit = 0;  // predicted - measured; negative means excess rank
  std::string law;
};

RankLawReport rank_law_check(const HessianParts& parts, LossKind kind, Index n, Index k,
                             Index p, double zero_tol_rel = kDefaultZeroTolRel);

/// Binary matrix dump: 16-byte header (magic "HDD1", u32 dim, u32 element
/// size = 8, u32 reserved = 0) followed by dim*dim little-endian float64
/// values in row-major order.
void write_matrix_binary(const SymMatrix& m, const std::filesystem::path& path);
SymMatrix read_matrix_binary(const std::filesystem::path& path);

}  // namespace hdd
