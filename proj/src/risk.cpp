#include "risk.hpp"

#include "errors.hpp"
#include "hessian.hpp"

#include <algorithm>
#include <cmath>

namespace hdd {

double complexity_term(const SymMatrix& h, const SymMatrix& c, double lambda_reg,
                       double zero_tol_rel) {
  if (h.dim() != c.dim()) throw InputError("complexity_term: H and C differ in size");
  return complexity_term(sym_eig(h), c, lambda_reg, zero_tol_rel);
}

double complexity_term(const EigenDecomposition& h_eig, const SymMatrix& c, double lambda_reg,
                       double zero_tol_rel) {
  if (h_eig.vectors.rows() != c.dim()) throw InputError("complexity_term: H and C differ in size");
  if (!(lambda_reg >= 0.0)) throw InputError("complexity_term: lambda must be >= 0");
  const Vector& ev = h_eig.values;
  // Diagonal of V^T C V.
  const Matrix cv = c.matrix() * h_eig.vectors;
  const Vector proj = (h_eig.vectors.array() * cv.array()).colwise().sum().transpose();

  double total = 0.0;
  if (lambda_reg == 0.0) {
    const SpectrumSummary s = summarize_spectrum(ev, zero_tol_rel);
    if (s.rank == 0) {
      throw CollapseError("complexity_term: Hessian has rank 0, pseudo-inverse is empty");
    }
    for (Index i = 0; i < ev.size(); ++i) {
      if (std::abs(ev(i)) > s.zero_tol) total += proj(i) / ev(i);
    }
    return total;
  }
  for (Index i = 0; i < ev.size(); ++i) {
    const double d = ev(i) + lambda_reg;
    if (!(d > 0.0)) {
      throw NumericError("complexity_term: H + lambda I is not positive definite (eigenvalue " +
                         std::to_string(ev(i)) + ")");
    }
    total += proj(i) / d;
  }
  return total;
}

BoundInputs bound_inputs_from(const std::vector<double>& residual_energies,
                              const SpectrumSummary& cjac_filtered, double lambda_r_hess,
                              Index n_train, double tau) {
  if (!(tau >= 0.0)) throw InputError("bound inputs: tau must be >= 0");
  BoundInputs in;
  in.tau = tau;
  in.n = n_train;
  in.lambda_r_hess = std::max(0.0, lambda_r_hess);
  in.evaluated = static_cast<Index>(residual_energies.size());
  bool any = false;
  for (double s : residual_energies) {
    // tau == 0 keeps strictly positive residuals only.
    if (tau == 0.0 ? s > 0.0 : s >= tau) {
      in.sigma2_min = any ? std::min(in.sigma2_min, s) : s;
      in.sigma2_max = any ? std::max(in.sigma2_max, s) : s;
      any = true;
      ++in.kept;
    }
  }
  if (in.evaluated > 0) {
    in.alpha = static_cast<double>(in.kept) / static_cast<double>(in.evaluated);
  }
  if (in.kept > 0) {
    in.lambda_min_cjac = cjac_filtered.lambda_min_nonzero.value_or(0.0);
    in.lambda_max_cjac = std::max(0.0, cjac_filtered.lambda_max);
  }
  return in;
}

BoundInputs estimate_bound_inputs(const MlpParams& params, const Dataset& eval, LossKind kind,
                                  double lambda_r_hess, Index n_train, double tau,
                                  double zero_tol_rel) {
  eval.validate();
  const Matrix f = forward_batch(params, eval.x);
  if (!f.allFinite()) throw NumericError("estimate_bound_inputs: non-finite network output");
  std::vector<double> energies;
  std::vector<Index> kept;
  for (Index i = 0; i < eval.size(); ++i) {
    const double s = residual_energy(kind, f.row(i).transpose(), eval.target(i));
    energies.push_back(s);
    if (tau == 0.0 ? s > 0.0 : s >= tau) kept.push_back(i);
  }
  SpectrumSummary cjac;
  if (!kept.empty()) {
    cjac = summarize_spectrum(jac_covariance_eigenvalues(params, subset(eval, kept)),
                              zero_tol_rel);
  }
  return bound_inputs_from(energies, cjac, lambda_r_hess, n_train, tau);
}

LowerBound lower_bound(const BoundInputs& in, double train_term, double lambda_r_floor) {
  LowerBound lb;
  if (in.lambda_r_hess > 0.0) lb.inverse_lambda_r = 1.0 / in.lambda_r_hess;
  if (in.alpha == 0.0) {
    lb.value = train_term;
    return lb;
  }
  if (!(in.lambda_r_hess > lambda_r_floor)) {
    lb.divergent = true;
    return lb;
  }
  const double num = in.sigma2_min * in.alpha * in.lambda_min_cjac;
  lb.value = train_term + num / (static_cast<double>(in.n + 1) * in.lambda_r_hess);
  return lb;
}

double lower_bound_complexity(const BoundInputs& in, double lambda_reg) {
  if (in.alpha == 0.0) return 0.0;
  const double denom = in.lambda_r_hess + lambda_reg;
  if (!(denom > 0.0)) throw CollapseError("lower_bound_complexity: lambda_r + lambda is zero");
  return in.sigma2_min * in.alpha * in.lambda_min_cjac / denom;
}

double upper_bound_complexity(const Vector& h_eigenvalues, double lambda_max_cjac,
                              double sigma2_max, double alpha, double lambda_reg) {
  if (!(lambda_reg > 0.0)) throw InputError("upper_bound_complexity: lambda must be > 0");
  if (alpha == 0.0) return 0.0;
  double inv_trace = 0.0;
  for (Index i = 0; i < h_eigenvalues.size(); ++i) {
    const double d = h_eigenvalues(i) + lambda_reg;
    if (!(d > 0.0)) throw NumericError("upper_bound_complexity: H + lambda I is not positive definite");
    inv_trace += 1.0 / d;
  }
  return sigma2_max * alpha * inv_trace * lambda_max_cjac;
}

double upper_bound_complexity(const SymMatrix& h_loss, const SymMatrix& c_jac_filtered,
                              double sigma2_max, double alpha, double lambda_reg) {
  if (h_loss.dim() != c_jac_filtered.dim()) {
    throw InputError("upper_bound_complexity: H and C_f differ in size");
  }
  const Vector cev = sym_eigenvalues(c_jac_filtered);
  const double cmax = cev.size() > 0 ? std::max(0.0, cev(0)) : 0.0;
  return upper_bound_complexity(sym_eigenvalues(h_loss), cmax, sigma2_max, alpha, lambda_reg);
}

std::vector<std::pair<double, double>> trace_capture(const SpectrumSummary& spectrum,
                                                     const std::vector<double>& fractions) {
  std::vector<double> positive;
  for (double v : spectrum.eigenvalues) {
    if (v > spectrum.zero_tol) positive.push_back(v);
  }
  std::sort(positive.begin(), positive.end());  // ascending: smallest first
  double total = 0.0;
  for (double v : positive) total += 1.0 / v;
  const auto r = static_cast<double>(positive.size());

  std::vector<std::pair<double, double>> out;
  for (double q : fractions) {
    if (!(q >= 0.0 && q <= 1.0)) throw InputError("trace_capture: fraction outside [0, 1]");
    if (positive.empty()) {
      out.emplace_back(q, 0.0);
      continue;
    }
    const auto take = static_cast<std::size_t>(std::ceil(q * r - 1e-9));
    double part = 0.0;
    for (std::size_t i = 0; i < take && i < positive.size(); ++i) part += 1.0 / positive[i];
    out.emplace_back(q, 100.0 * part / total);
  }
  return out;
}

}  // namespace hdd
