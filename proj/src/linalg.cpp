#include "linalg.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hdd {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InputError(std::string(what) + ": non-finite entries");
  }
}

double relative_cut(const Vector& values, double zero_tol_rel) {
  if (values.size() == 0) return 0.0;
  return zero_tol_rel * values.cwiseAbs().maxCoeff();
}

}  // namespace

SymMatrix::SymMatrix(Matrix m) {
  if (m.rows() != m.cols()) {
    throw InputError("SymMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                     std::to_string(m.cols()) + ", expected square");
  }
  require_finite(m, "SymMatrix");
  Matrix t = m.transpose();
  m_ = (m + t) * 0.5;
}

SymMatrix SymMatrix::zeros(Index dim) { return SymMatrix(Matrix::Zero(dim, dim), Trusted{}); }

SymMatrix SymMatrix::identity(Index dim) {
  return SymMatrix(Matrix::Identity(dim, dim), Trusted{});
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw InputError("SymMatrix +: dimension mismatch");
  return SymMatrix(a.m_ + b.m_, SymMatrix::Trusted{});
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw InputError("SymMatrix -: dimension mismatch");
  return SymMatrix(a.m_ - b.m_, SymMatrix::Trusted{});
}

EigenDecomposition sym_eig(const SymMatrix& a) {
  EigenDecomposition out;
  if (a.dim() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericError("sym_eig: solver did not converge");
  // Eigen returns ascending order.
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Vector sym_eigenvalues(const SymMatrix& a) {
  if (a.dim() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("sym_eigenvalues: solver did not converge");
  }
  return solver.eigenvalues().reverse();
}

SpectrumSummary summarize_spectrum(const std::vector<double>& eigenvalues, double zero_tol_rel) {
  if (zero_tol_rel < 0.0 || !std::isfinite(zero_tol_rel)) {
    throw InputError("summarize_spectrum: zero_tol_rel must be finite and >= 0");
  }
  for (std::size_t i = 1; i < eigenvalues.size(); ++i) {
    if (eigenvalues[i] > eigenvalues[i - 1]) {
      throw InputError("summarize_spectrum: eigenvalues must be sorted descending");
    }
  }
  SpectrumSummary s;
  s.eigenvalues = eigenvalues;
  if (eigenvalues.empty()) return s;

  const double radius = std::max(std::abs(eigenvalues.front()), std::abs(eigenvalues.back()));
  s.zero_tol = zero_tol_rel * radius;
  s.lambda_max = eigenvalues.front();
  s.spectral_norm = radius;

  double min_pos = 0.0;
  double min_abs = 0.0;
  bool any_pos = false;
  for (double l : eigenvalues) {
    s.trace += l;
    s.nuclear_norm += std::abs(l);
    if (std::abs(l) <= s.zero_tol) continue;
    ++s.rank;
    if (s.rank == 1 || std::abs(l) < min_abs) min_abs = std::abs(l);
    if (l > 0.0) {
      ++s.positive_rank;
      s.inverse_trace += 1.0 / l;
      if (!any_pos || l < min_pos) min_pos = l;
      any_pos = true;
    }
  }
  if (s.rank > 0) {
    s.lambda_min_nonzero = any_pos ? min_pos : min_abs;
    s.condition_number = radius / *s.lambda_min_nonzero;
  }
  return s;
}

SpectrumSummary summarize_spectrum(const Vector& eigenvalues, double zero_tol_rel) {
  return summarize_spectrum(std::vector<double>(eigenvalues.data(),
                                                eigenvalues.data() + eigenvalues.size()),
                            zero_tol_rel);
}

Vector pinv_apply(const SymMatrix& a, const Vector& v, double zero_tol_rel) {
  if (a.dim() != v.size()) throw InputError("pinv_apply: dimension mismatch");
  if (a.dim() == 0) return {};
  const EigenDecomposition eig = sym_eig(a);
  const double cut = relative_cut(eig.values, zero_tol_rel);
  Vector coeff = eig.vectors.transpose() * v;
  for (Index i = 0; i < coeff.size(); ++i) {
    const double l = eig.values(i);
    coeff(i) = std::abs(l) > cut ? coeff(i) / l : 0.0;
  }
  return eig.vectors * coeff;
}

Vector tikhonov_solve(const SymMatrix& a, const Vector& v, double lambda_reg) {
  if (!(lambda_reg > 0.0) || !std::isfinite(lambda_reg)) {
    throw InputError("tikhonov_solve: lambda_reg must be > 0 (use pinv_apply for the limit)");
  }
  if (a.dim() != v.size()) throw InputError("tikhonov_solve: dimension mismatch");
  Matrix shifted = a.matrix();
  shifted.diagonal().array() += lambda_reg;
  Eigen::LDLT<Matrix> ldlt(shifted);
  Vector x = ldlt.solve(v);
  if (ldlt.info() != Eigen::Success || !x.allFinite() ||
      (shifted * x - v).norm() > 1e-8 * std::max(1.0, v.norm())) {
    // Indefinite shift; fall back to a pivoted QR solve.
    x = shifted.colPivHouseholderQr().solve(v);
  }
  if (!x.allFinite()) throw NumericError("tikhonov_solve: singular shifted system");
  return x;
}

Index matrix_rank(const Matrix& m, double zero_tol_rel) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  const double cut = zero_tol_rel * s(0);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut) ++r;
  }
  return r;
}

void PairwiseAccumulator::add(Matrix term) {
  if (term.rows() != rows_ || term.cols() != cols_) {
    throw InputError("PairwiseAccumulator: shape mismatch");
  }
  ++count_;
  std::size_t level = 0;
  while (true) {
    if (level == levels_.size()) levels_.emplace_back();
    if (!levels_[level]) {
      levels_[level] = std::move(term);
      return;
    }
    // Older partial sum on the left keeps the combination order fixed.
    term = *levels_[level] + term;
    levels_[level].reset();
    ++level;
  }
}

Matrix PairwiseAccumulator::total() const {
  Matrix sum = Matrix::Zero(rows_, cols_);
  bool first = true;
  // Highest level holds the oldest terms.
  for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
    if (!*it) continue;
    if (first) {
      sum = **it;
      first = false;
    } else {
      sum += **it;
    }
  }
  return sum;
}

}  // namespace hdd
