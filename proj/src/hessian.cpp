#include "hessian.hpp"

#include "errors.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace hdd {

namespace {

constexpr Index kLeafBlock = 8;  // samples per GEMM leaf of the reduction tree
constexpr double kFuncSkip = 1e-14;

void check_inputs(const MlpParams& params, const Dataset& data, const HessianOptions& opts) {
  data.validate();
  if (!params.theta.allFinite()) throw NumericError("network parameters contain NaN/Inf");
  if (data.dim() != params.spec.input_dim) {
    throw InputError("dataset dimension " + std::to_string(data.dim()) +
                     " does not match network input " + std::to_string(params.spec.input_dim));
  }
  const Index p = params.spec.trainable_count();
  if (p > opts.param_cap) {
    throw CapacityError("parameter count " + std::to_string(p) + " exceeds cap " +
                        std::to_string(opts.param_cap));
  }
}

Vector sample_row(const Dataset& data, Index i) { return data.x.row(i).transpose(); }

// Sum over samples of B_i B_i^T, where B_i (p x c_i) comes from `factor`.
// Leaves of kLeafBlock consecutive samples are formed with one GEMM each and
// merged by pairwise summation.
template <typename Factor>
Matrix gram_sum(Index p, Index n, Factor factor) {
  PairwiseAccumulator acc(p, p);
  for (Index start = 0; start < n; start += kLeafBlock) {
    const Index stop = std::min(n, start + kLeafBlock);
    std::vector<Matrix> parts;
    Index cols = 0;
    for (Index i = start; i < stop; ++i) {
      parts.push_back(factor(i));
      cols += parts.back().cols();
    }
    Matrix block(p, cols);
    Index c = 0;
    for (const auto& b : parts) {
      block.middleCols(c, b.cols()) = b;
      c += b.cols();
    }
    Matrix leaf = Matrix::Zero(p, p);
    leaf.selfadjointView<Eigen::Lower>().rankUpdate(block);
    leaf.triangularView<Eigen::StrictlyUpper>() = leaf.transpose();
    acc.add(std::move(leaf));
  }
  return acc.total();
}

// Symmetric square root factor L with L L^T = m, for PSD m (negative
// eigenvalues from rounding are clamped).
Matrix psd_factor(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix());
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

HessianParts assemble(const MlpParams& params, const Dataset& data, LossKind kind,
                      const HessianOptions& opts) {
  check_inputs(params, data, opts);
  const Index n = data.size();
  const Index p = params.spec.trainable_count();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<Vector> outputs(static_cast<std::size_t>(n));
  std::vector<Matrix> jacobians(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Vector x = sample_row(data, i);
    outputs[static_cast<std::size_t>(i)] = forward(params, x);
    jacobians[static_cast<std::size_t>(i)] = jacobian(params, x);
  }

  Matrix outer;
  if (kind == LossKind::mse) {
    outer = gram_sum(p, n, [&](Index i) { return jacobians[static_cast<std::size_t>(i)]; });
  } else {
    outer = gram_sum(p, n, [&](Index i) {
      const auto ui = static_cast<std::size_t>(i);
      return Matrix(jacobians[ui] *
                    psd_factor(loss_hess_f(kind, outputs[ui], data.target(i))));
    });
  }
  outer *= inv_n;

  PairwiseAccumulator func_acc(p, p);
  for (Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Vector g = loss_grad_f(kind, outputs[ui], data.target(i));
    if (g.norm() <= kFuncSkip) continue;
    func_acc.add(contracted_hessian(params, sample_row(data, i), g).matrix());
  }
  Matrix func = func_acc.total() * inv_n;

  HessianParts parts;
  parts.h_outer = SymMatrix(std::move(outer));
  parts.h_func = SymMatrix(std::move(func));
  parts.h_loss = parts.h_outer + parts.h_func;
  parts.n_samples = n;
  parts.loss_kind = kind;
  return parts;
}

SymMatrix grad_covariance(const MlpParams& params, const Dataset& data, LossKind kind,
                          const HessianOptions& opts) {
  check_inputs(params, data, opts);
  const Index p = params.spec.trainable_count();
  Matrix c = gram_sum(p, data.size(), [&](Index i) {
    const Vector x = sample_row(data, i);
    const Vector g = loss_grad_f(kind, forward(params, x), data.target(i));
    return Matrix(jacobian(params, x) * g);
  });
  return SymMatrix(c / static_cast<double>(data.size()));
}

SymMatrix jac_covariance(const MlpParams& params, const Dataset& data,
                         const HessianOptions& opts) {
  check_inputs(params, data, opts);
  const Index p = params.spec.trainable_count();
  Matrix c = gram_sum(p, data.size(), [&](Index i) { return jacobian(params, sample_row(data, i)); });
  return SymMatrix(c / static_cast<double>(data.size()));
}

Vector jac_covariance_eigenvalues(const MlpParams& params, const Dataset& data,
                                  const HessianOptions& opts) {
  check_inputs(params, data, opts);
  const Index p = params.spec.trainable_count();
  const Index k = params.spec.output_dim;
  const Index cols = k * data.size();
  if (cols >= p) return sym_eigenvalues(jac_covariance(params, data, opts));
  Matrix z(p, cols);
  for (Index i = 0; i < data.size(); ++i) z.middleCols(i * k, k) = jacobian(params, sample_row(data, i));
  Matrix g = Matrix::Zero(cols, cols);
  g.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), 1.0 / static_cast<double>(data.size()));
  g.triangularView<Eigen::StrictlyUpper>() = g.transpose();
  const Vector small = sym_eigenvalues(SymMatrix(g));
  Vector out = Vector::Zero(p);
  out.head(cols) = small;
  std::sort(out.data(), out.data() + p, std::greater<double>());
  return out;
}

CovMatrices covariances(const MlpParams& params, const Dataset& data, LossKind kind,
                        const HessianOptions& opts) {
  CovMatrices out{grad_covariance(params, data, kind, opts), jac_covariance(params, data, opts),
                  params.spec.output_dim * data.size()};
  return out;
}

SymMatrix fd_loss_hessian_oracle(const MlpParams& params, const Dataset& data, LossKind kind,
                                 double h) {
  check_inputs(params, data, HessianOptions{400});
  if (!(h > 0.0)) throw InputError("fd_loss_hessian_oracle: step must be > 0");
  const Index p = params.spec.trainable_count();
  const Index off = params.spec.trainable_offset();
  MlpParams work = params;
  auto loss_at = [&]() {
    const Matrix f = forward_batch(work, data.x);
    double s = 0.0;
    for (Index i = 0; i < data.size(); ++i) s += loss_value(kind, f.row(i).transpose(), data.target(i));
    return s / static_cast<double>(data.size());
  };
  const double base = loss_at();
  Matrix out(p, p);
  for (Index a = 0; a < p; ++a) {
    const double ta = params.theta(off + a);
    work.theta(off + a) = ta + h;
    const double up = loss_at();
    work.theta(off + a) = ta - h;
    const double down = loss_at();
    work.theta(off + a) = ta;
    out(a, a) = (up - 2.0 * base + down) / (h * h);
    for (Index b = 0; b < a; ++b) {
      const double tb = params.theta(off + b);
      double acc = 0.0;
      for (int sa : {1, -1}) {
        for (int sb : {1, -1}) {
          work.theta(off + a) = ta + sa * h;
          work.theta(off + b) = tb + sb * h;
          acc += sa * sb * loss_at();
        }
      }
      work.theta(off + a) = ta;
      work.theta(off + b) = tb;
      out(a, b) = out(b, a) = acc / (4.0 * h * h);
    }
  }
  return SymMatrix(out);
}

RankLawReport rank_law_check(const HessianParts& parts, LossKind kind, Index n, Index k,
                             Index p, double zero_tol_rel) {
  RankLawReport r;
  const Index per_sample = kind == LossKind::mse ? k : k - 1;
  r.law = kind == LossKind::mse ? "min(p, K n)" : "min(p, (K-1) n)";
  r.predicted_rank = std::min(p, per_sample * n);
  r.measured_rank = summarize_spectrum(sym_eigenvalues(parts.h_outer), zero_tol_rel).rank;
  r.deficit = r.predicted_rank - r.measured_rank;
  return r;
}

void write_matrix_binary(const SymMatrix& m, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little,
                "binary matrix dump assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write matrix file " + path.string());
  const std::array<char, 4> magic{'H', 'D', 'D', '1'};
  const std::array<std::uint32_t, 3> fields{static_cast<std::uint32_t>(m.dim()), 8u, 0u};
  out.write(magic.data(), magic.size());
  out.write(reinterpret_cast<const char*>(fields.data()), sizeof(fields));
  for (Index i = 0; i < m.dim(); ++i) {
    for (Index j = 0; j < m.dim(); ++j) {
      const double v = m(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
  }
  if (!out) throw IoError("failed writing matrix file " + path.string());
}

SymMatrix read_matrix_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open matrix file " + path.string());
  std::array<char, 4> magic{};
  std::array<std::uint32_t, 3> fields{};
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(fields.data()), sizeof(fields));
  if (!in || std::memcmp(magic.data(), "HDD1", 4) != 0 || fields[1] != 8u) {
    throw IoError(path.string() + " is not an HDD1 matrix file");
  }
  const auto dim = static_cast<Index>(fields[0]);
  Matrix m(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) in.read(reinterpret_cast<char*>(&m(i, j)), sizeof(double));
  }
  if (!in) throw IoError(path.string() + ": truncated matrix data");
  return SymMatrix(std::move(m));
}

}  // namespace hdd
