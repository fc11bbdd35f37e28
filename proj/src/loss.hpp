#pragma once

#include "linalg.hpp"

#include <string>

namespace hdd {

/// mse is 1/2 ||y - f||^2, so its output-space Hessian is exactly I.
/// cross_entropy applies a log-sum-exp softmax to the logits f.
enum class LossKind { mse, cross_entropy };

std::string to_string(LossKind k);
LossKind loss_kind_from_string(const std::string& s);

/// Per-sample target. `y` is the real target vector (one-hot for class
/// targets); `label` is the class index, or -1 for pure regression targets.
struct Target {
  Vector y;
  Index label = -1;
};

double loss_value(LossKind kind, const Vector& f, const Target& t);
Vector loss_grad_f(LossKind kind, const Vector& f, const Target& t);
SymMatrix loss_hess_f(LossKind kind, const Vector& f, const Target& t);

/// sigma^2 = ||grad_f loss||^2.
double residual_energy(LossKind kind, const Vector& f, const Target& t);

Vector softmax(const Vector& logits);
double log_sum_exp(const Vector& logits);

}  // namespace hdd
