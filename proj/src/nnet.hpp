#pragma once

#include "linalg.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hdd {

enum class Activation { relu, linear };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// Architecture of a fully-connected network f: R^d -> R^K with 1 to 3 weight
/// layers.
///
/// Flat parameter packing is layer-major: for each layer l = 1..L the weight
/// matrix W_l (out_l x in_l) row-major, then its bias b_l when enabled. Row
/// and column indices of every Hessian in this library follow that order.
struct MlpSpec {
  Index input_dim = 1;
  std::vector<Index> hidden_widths;
  Index output_dim = 1;
  Activation activation = Activation::relu;
  bool bias = true;
  // Only the final affine layer is trainable; hidden layers stay at init.
  bool output_layer_only = false;

  void validate() const;

  Index depth() const { return static_cast<Index>(hidden_widths.size()) + 1; }
  Index layer_in(Index l) const;   // l in [0, depth)
  Index layer_out(Index l) const;
  Index layer_offset(Index l) const;
  Index layer_size(Index l) const;
  Index param_count() const;

  /// Trainable parameters form the contiguous range
  /// [trainable_offset, trainable_offset + trainable_count).
  Index trainable_offset() const;
  Index trainable_count() const;
};

struct LayerParams {
  Matrix weight;  // out x in
  Vector bias;    // out, or empty when bias is disabled
};

struct MlpParams {
  MlpSpec spec;
  Vector theta;  // all parameters, length spec.param_count()

  Vector trainable() const;
  void set_trainable(const Vector& values);
};

std::vector<LayerParams> unflatten(const MlpSpec& spec, const Vector& theta);
Vector flatten(const MlpSpec& spec, const std::vector<LayerParams>& layers);

/// Weights ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)), biases zero.
MlpParams init(const MlpSpec& spec, std::uint64_t seed);

Vector forward(const MlpParams& params, const Vector& x);

/// Row-major batch: x is n x d, result n x K.
Matrix forward_batch(const MlpParams& params, const Matrix& x);

/// Jacobian of the outputs with respect to the trainable parameters, p x K.
Matrix jacobian(const MlpParams& params, const Vector& x);

/// Sum over a batch of J_i g_i, i.e. the gradient of sum_i g_i^T f(x_i) with
/// the g_i held fixed. x is n x d, output_grad n x K. Returns length p.
Vector backprop_batch(const MlpParams& params, const Matrix& x, const Matrix& output_grad);

/// Exact Hessian with respect to the trainable parameters of c^T f(x).
///
/// ReLU' (0) is taken as 0 and ReLU'' as 0 everywhere, so for piecewise
/// linear activations this is the a.e. derivative.
SymMatrix contracted_hessian(const MlpParams& params, const Vector& x, const Vector& c);

/// Hessian of the k-th output coordinate.
SymMatrix second_jacobian(const MlpParams& params, const Vector& x, Index k);

}  // namespace hdd
