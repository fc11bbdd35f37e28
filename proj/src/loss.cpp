#include "loss.hpp"

#include "errors.hpp"

#include <cmath>

namespace hdd {

namespace {

void check(LossKind kind, const Vector& f, const Target& t) {
  if (!f.allFinite()) throw NumericError("loss: non-finite network output");
  if (kind == LossKind::cross_entropy) {
    if (t.label < 0) throw InputError("cross-entropy requires a class-index target");
    if (t.label >= f.size()) {
      throw InputError("cross-entropy: class index " + std::to_string(t.label) +
                       " >= K = " + std::to_string(f.size()));
    }
  } else if (t.y.size() != f.size()) {
    throw InputError("mse: target has length " + std::to_string(t.y.size()) +
                     ", output has " + std::to_string(f.size()));
  }
}

}  // namespace

std::string to_string(LossKind k) { return k == LossKind::mse ? "mse" : "cross_entropy"; }

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "mse") return LossKind::mse;
  if (s == "cross_entropy" || s == "ce") return LossKind::cross_entropy;
  throw InputError("unknown loss '" + s + "' (expected mse or cross_entropy)");
}

double log_sum_exp(const Vector& logits) {
  const double m = logits.maxCoeff();
  return m + std::log((logits.array() - m).exp().sum());
}

Vector softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  Vector e = (logits.array() - m).exp();
  return e / e.sum();
}

double loss_value(LossKind kind, const Vector& f, const Target& t) {
  check(kind, f, t);
  if (kind == LossKind::mse) return 0.5 * (t.y - f).squaredNorm();
  // -log softmax(f)[label]; clamps the tiny negative values rounding can give.
  return std::max(0.0, log_sum_exp(f) - f(t.label));
}

Vector loss_grad_f(LossKind kind, const Vector& f, const Target& t) {
  check(kind, f, t);
  if (kind == LossKind::mse) return f - t.y;
  Vector g = softmax(f);
  g(t.label) -= 1.0;
  return g;
}

SymMatrix loss_hess_f(LossKind kind, const Vector& f, const Target& t) {
  check(kind, f, t);
  if (kind == LossKind::mse) return SymMatrix::identity(f.size());
  const Vector p = softmax(f);
  Matrix h = -p * p.transpose();
  h.diagonal() += p;
  return SymMatrix(std::move(h));
}

double residual_energy(LossKind kind, const Vector& f, const Target& t) {
  return loss_grad_f(kind, f, t).squaredNorm();
}

}  // namespace hdd
