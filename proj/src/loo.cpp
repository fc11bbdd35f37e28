#include "loo.hpp"

#include "errors.hpp"

#include <Eigen/SVD>

namespace hdd {

std::string to_string(HatSource s) {
  switch (s) {
    case HatSource::ols: return "ols";
    case HatSource::ridge_pushthrough: return "ridge_pushthrough";
    case HatSource::ntk_at_optimum: return "ntk_at_optimum";
  }
  return "?";
}

std::string to_string(LooMode m) { return m == LooMode::exact ? "exact" : "asymptotic"; }

LooMode loo_mode_from_string(const std::string& s) {
  if (s == "exact") return LooMode::exact;
  if (s == "asymptotic") return LooMode::asymptotic;
  throw InputError("unknown LOO mode '" + s + "' (expected exact or asymptotic)");
}

HatMatrix hat_matrix(const Matrix& design, double lambda, double zero_tol_rel) {
  if (design.rows() == 0 || design.cols() == 0) throw InputError("hat_matrix: empty design");
  if (!design.allFinite()) throw InputError("hat_matrix: design has non-finite entries");
  if (!(lambda >= 0.0)) throw InputError("hat_matrix: lambda must be >= 0");
  HatMatrix hat;
  hat.lambda = lambda;
  Eigen::BDCSVD<Matrix> svd(design, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double cut = sv.size() > 0 ? zero_tol_rel * sv(0) : 0.0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cut) ++rank;
  }
  hat.design_rank = rank;
  const Matrix& u = svd.matrixU();
  if (lambda == 0.0) {
    hat.source = HatSource::ols;
    hat.rank_deficient = rank < design.cols();
    const Matrix ur = u.leftCols(rank);
    hat.a = SymMatrix(ur * ur.transpose());
  } else {
    hat.source = HatSource::ridge_pushthrough;
    // (K + lambda I)^-1 K shares K's eigenvectors U, with eigenvalues
    // d^2 / (d^2 + lambda).
    const Vector shrink = sv.array().square() / (sv.array().square() + lambda);
    hat.a = SymMatrix(u * shrink.asDiagonal() * u.transpose());
  }
  return hat;
}

LooReport loo_influence(const HatMatrix& hat, const Vector& residuals, LooMode mode) {
  const Index n = hat.a.dim();
  if (residuals.size() != n) {
    throw InputError("loo_influence: " + std::to_string(residuals.size()) + " residuals for a " +
                     std::to_string(n) + "x" + std::to_string(n) + " hat matrix");
  }
  if (n == 0) throw InputError("loo_influence: empty sample");
  LooReport rep;
  const double dn = static_cast<double>(n);
  for (Index i = 0; i < n; ++i) {
    const double a = hat.a(i, i);
    if (!(a < kMaxLeverage)) {
      throw NumericError("loo_influence: leverage of sample " + std::to_string(i) + " is " +
                         std::to_string(a) + " (>= 1 - 1e-12); its LOO term is undefined");
    }
    const double r = residuals(i);
    const double h = mode == LooMode::exact ? a / (1.0 - a) : a;
    LooSample s{a, r, r * r * (1.0 + 2.0 * h), r * r * (1.0 + h) * (1.0 + h)};
    rep.train_mse += r * r / dn;
    rep.loo1 += s.term1 / dn;
    rep.loo2 += s.term2 / dn;
    rep.per_sample.push_back(s);
  }
  return rep;
}

Vector fit_linear(const Matrix& design, const Vector& y, double lambda) {
  if (design.rows() != y.size()) throw InputError("fit_linear: design/target row mismatch");
  if (lambda > 0.0) {
    Matrix g = design.transpose() * design;
    g.diagonal().array() += lambda;
    return g.ldlt().solve(design.transpose() * y);
  }
  return design.completeOrthogonalDecomposition().solve(y);
}

double loo_ols_exact(const Matrix& design, const Vector& y) {
  const Vector theta = fit_linear(design, y, 0.0);
  const Vector r = y - design * theta;
  return loo_influence(hat_matrix(design, 0.0), r, LooMode::exact).loo2;
}

double brute_force_loo(const Matrix& design, const Vector& y, double lambda) {
  const Index n = design.rows();
  if (n < 2) throw InputError("brute_force_loo: need at least 2 samples");
  if (y.size() != n) throw InputError("brute_force_loo: design/target row mismatch");
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    Matrix xi(n - 1, design.cols());
    Vector yi(n - 1);
    for (Index j = 0, k = 0; j < n; ++j) {
      if (j == i) continue;
      xi.row(k) = design.row(j);
      yi(k++) = y(j);
    }
    const Vector theta = fit_linear(xi, yi, lambda);
    const double e = y(i) - design.row(i).dot(theta);
    total += e * e;
  }
  return total / static_cast<double>(n);
}

Matrix ols_influence_directions(const Matrix& design, const Vector& y) {
  const Index n = design.rows();
  const Vector theta = fit_linear(design, y, 0.0);
  const Vector r = design * theta - y;
  const Matrix g = design.transpose() * design / static_cast<double>(n);
  const auto ldlt = g.ldlt();
  Matrix out(design.cols(), n);
  for (Index i = 0; i < n; ++i) {
    out.col(i) = -ldlt.solve(design.row(i).transpose() * r(i));
  }
  return out;
}

LooReport loo_nn(const TrainedModel& model, const Dataset& data, double lambda, LooMode mode) {
  if (model.spec.output_dim != 1) {
    throw InputError("loo_nn: only scalar-output networks are supported (K = 1)");
  }
  if (data.k != 1) throw InputError("loo_nn: dataset must have a single target");
  if (data.task != TaskKind::regression) throw InputError("loo_nn: regression data required");
  const MlpParams star = model.optimum();
  const Index n = data.size();
  Matrix design(n, star.spec.trainable_count());
  Vector r(n);
  for (Index i = 0; i < n; ++i) {
    const Vector x = data.x.row(i).transpose();
    design.row(i) = jacobian(star, x).col(0).transpose();
    r(i) = forward(star, x)(0) - data.y(i, 0);
  }
  HatMatrix hat = hat_matrix(design, lambda);
  hat.source = HatSource::ntk_at_optimum;
  return loo_influence(hat, r, mode);
}

}  // namespace hdd
