#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace hdd {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Default relative cut for "non-zero" eigenvalues, relative to the spectral
/// radius.
inline constexpr double kDefaultZeroTolRel = 1e-10;

/// Dense symmetric matrix of 64-bit reals.
///
/// Construction symmetrizes the input as (A + A^T) / 2, so entry (i, j) and
/// (j, i) are bit-identical afterwards, and rejects non-finite entries.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m);

  static SymMatrix zeros(Index dim);
  static SymMatrix identity(Index dim);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

  double frobenius_norm() const { return m_.norm(); }
  double trace() const { return m_.trace(); }

  friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
  friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);

 private:
  struct Trusted {};
  SymMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // column i pairs with values(i)
};

EigenDecomposition sym_eig(const SymMatrix& a);

/// Eigenvalues only, descending.
Vector sym_eigenvalues(const SymMatrix& a);

struct SpectrumSummary {
  std::vector<double> eigenvalues;  // descending
  double zero_tol = 0.0;            // absolute threshold actually applied
  Index rank = 0;                   // count of |lambda| > zero_tol
  double lambda_max = 0.0;
  std::optional<double> lambda_min_nonzero;  // lambda_r
  double trace = 0.0;
  double nuclear_norm = 0.0;
  double spectral_norm = 0.0;
  std::optional<double> condition_number;
  // Sum of 1/lambda over the positive retained eigenvalues.
  double inverse_trace = 0.0;
  Index positive_rank = 0;
};

/// Summarizes a descending spectrum with the cut zero_tol_rel * max(|l1|, |lp|).
///
/// Negative eigenvalues above the cut count toward the rank. lambda_r is the
/// smallest retained positive eigenvalue, or the smallest retained |lambda|
/// when none is positive. A rank-0 result has no lambda_r and no condition
/// number; callers treat that as a collapsed spectrum.
SpectrumSummary summarize_spectrum(const std::vector<double>& eigenvalues,
                                   double zero_tol_rel = kDefaultZeroTolRel);
SpectrumSummary summarize_spectrum(const Vector& eigenvalues,
                                   double zero_tol_rel = kDefaultZeroTolRel);

/// Moore-Penrose pseudo-inverse of a applied to v, eigenvalues below the
/// relative cut treated as zero.
Vector pinv_apply(const SymMatrix& a, const Vector& v,
                  double zero_tol_rel = kDefaultZeroTolRel);

/// Solves (a + lambda_reg I) x = v. Requires lambda_reg > 0.
Vector tikhonov_solve(const SymMatrix& a, const Vector& v, double lambda_reg);

/// Numerical rank of a general matrix via its singular values.
Index matrix_rank(const Matrix& m, double zero_tol_rel = kDefaultZeroTolRel);

/// Deterministic pairwise (tree) summation of a stream of equally shaped
/// matrices. Partial sums are merged like a binary counter, so the result
/// depends only on the order of add() calls.
class PairwiseAccumulator {
 public:
  PairwiseAccumulator(Index rows, Index cols) : rows_(rows), cols_(cols) {}

  void add(Matrix term);
  Matrix total() const;
  std::size_t count() const { return count_; }

 private:
  Index rows_;
  Index cols_;
  std::size_t count_ = 0;
  // levels_[k] holds a partial sum of 2^k terms, if present.
  std::vector<std::optional<Matrix>> levels_;
};

}  // namespace hdd
