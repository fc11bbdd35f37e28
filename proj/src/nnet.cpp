#include "nnet.hpp"

#include "errors.hpp"
#include "rng.hpp"

#include <cmath>

namespace hdd {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstWeightMap = Eigen::Map<const RowMajorMatrix>;

ConstWeightMap weight_map(const MlpParams& params, Index l) {
  const MlpSpec& s = params.spec;
  return {params.theta.data() + s.layer_offset(l), s.layer_out(l), s.layer_in(l)};
}

Eigen::Map<const Vector> bias_map(const MlpParams& params, Index l) {
  const MlpSpec& s = params.spec;
  return {params.theta.data() + s.layer_offset(l) + s.layer_out(l) * s.layer_in(l),
          s.layer_out(l)};
}

void check_params(const MlpParams& params) {
  params.spec.validate();
  if (params.theta.size() != params.spec.param_count()) {
    throw InputError("MlpParams: theta has length " + std::to_string(params.theta.size()) +
                     ", spec requires " + std::to_string(params.spec.param_count()));
  }
}

void check_input(const MlpParams& params, const Vector& x) {
  check_params(params);
  if (x.size() != params.spec.input_dim) {
    throw InputError("network input has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(params.spec.input_dim));
  }
}

// Per-sample forward trace: act[l] is the input to layer l (act[0] == x) and
// act[L] the network output; slope[l] is the activation derivative after
// hidden layer l.
struct Trace {
  std::vector<Vector> act;
  std::vector<Vector> slope;
};

Trace trace_forward(const MlpParams& params, const Vector& x) {
  const MlpSpec& s = params.spec;
  const Index depth = s.depth();
  Trace t;
  t.act.reserve(depth + 1);
  t.act.push_back(x);
  for (Index l = 0; l < depth; ++l) {
    Vector z = weight_map(params, l) * t.act.back();
    if (s.bias) z += bias_map(params, l);
    if (l + 1 < depth) {
      Vector slope(z.size());
      if (s.activation == Activation::relu) {
        for (Index i = 0; i < z.size(); ++i) {
          slope(i) = z(i) > 0.0 ? 1.0 : 0.0;
          z(i) = z(i) > 0.0 ? z(i) : 0.0;
        }
      } else {
        slope.setOnes();
      }
      t.slope.push_back(std::move(slope));
    }
    t.act.push_back(std::move(z));
  }
  return t;
}

// Writes the per-parameter rows of a layer's derivative given the derivative
// with respect to that layer's pre-activation (rows of `delta`, one per unit).
void scatter_layer_rows(const MlpSpec& s, Index l, const Vector& input, const Matrix& delta,
                        Matrix& out) {
  const Index off = s.layer_offset(l);
  const Index n_out = s.layer_out(l);
  const Index n_in = s.layer_in(l);
  for (Index r = 0; r < n_out; ++r) {
    for (Index c = 0; c < n_in; ++c) out.row(off + r * n_in + c) = delta.row(r) * input(c);
  }
  if (s.bias) {
    for (Index r = 0; r < n_out; ++r) out.row(off + n_out * n_in + r) = delta.row(r);
  }
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::relu ? "relu" : "linear"; }

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "linear") return Activation::linear;
  throw InputError("unknown activation '" + s + "' (expected relu or linear)");
}

void MlpSpec::validate() const {
  if (input_dim < 1) throw InputError("MlpSpec: input_dim must be >= 1");
  if (output_dim < 1) throw InputError("MlpSpec: output_dim must be >= 1");
  if (hidden_widths.size() > 2) {
    throw InputError("MlpSpec: at most 2 hidden layers (3 weight layers) are supported");
  }
  for (Index w : hidden_widths) {
    if (w < 1) throw InputError("MlpSpec: hidden widths must be >= 1");
  }
}

Index MlpSpec::layer_in(Index l) const {
  return l == 0 ? input_dim : hidden_widths[static_cast<std::size_t>(l - 1)];
}

Index MlpSpec::layer_out(Index l) const {
  return l + 1 == depth() ? output_dim : hidden_widths[static_cast<std::size_t>(l)];
}

Index MlpSpec::layer_size(Index l) const {
  return layer_out(l) * layer_in(l) + (bias ? layer_out(l) : 0);
}

Index MlpSpec::layer_offset(Index l) const {
  Index off = 0;
  for (Index k = 0; k < l; ++k) off += layer_size(k);
  return off;
}

Index MlpSpec::param_count() const { return layer_offset(depth()); }

Index MlpSpec::trainable_offset() const {
  return output_layer_only ? layer_offset(depth() - 1) : 0;
}

Index MlpSpec::trainable_count() const { return param_count() - trainable_offset(); }

Vector MlpParams::trainable() const {
  return theta.segment(spec.trainable_offset(), spec.trainable_count());
}

void MlpParams::set_trainable(const Vector& values) {
  if (values.size() != spec.trainable_count()) {
    throw InputError("set_trainable: length mismatch");
  }
  theta.segment(spec.trainable_offset(), spec.trainable_count()) = values;
}

std::vector<LayerParams> unflatten(const MlpSpec& spec, const Vector& theta) {
  spec.validate();
  if (theta.size() != spec.param_count()) throw InputError("unflatten: length mismatch");
  std::vector<LayerParams> layers;
  for (Index l = 0; l < spec.depth(); ++l) {
    const Index off = spec.layer_offset(l);
    LayerParams lp;
    lp.weight = ConstWeightMap(theta.data() + off, spec.layer_out(l), spec.layer_in(l));
    if (spec.bias) {
      lp.bias = theta.segment(off + spec.layer_out(l) * spec.layer_in(l), spec.layer_out(l));
    }
    layers.push_back(std::move(lp));
  }
  return layers;
}

Vector flatten(const MlpSpec& spec, const std::vector<LayerParams>& layers) {
  spec.validate();
  if (static_cast<Index>(layers.size()) != spec.depth()) {
    throw InputError("flatten: layer count mismatch");
  }
  Vector theta(spec.param_count());
  for (Index l = 0; l < spec.depth(); ++l) {
    const LayerParams& lp = layers[static_cast<std::size_t>(l)];
    if (lp.weight.rows() != spec.layer_out(l) || lp.weight.cols() != spec.layer_in(l)) {
      throw InputError("flatten: weight shape mismatch at layer " + std::to_string(l));
    }
    const Index off = spec.layer_offset(l);
    Eigen::Map<RowMajorMatrix>(theta.data() + off, lp.weight.rows(), lp.weight.cols()) =
        lp.weight;
    if (spec.bias) {
      if (lp.bias.size() != spec.layer_out(l)) throw InputError("flatten: bias shape mismatch");
      theta.segment(off + lp.weight.size(), lp.bias.size()) = lp.bias;
    }
  }
  return theta;
}

MlpParams init(const MlpSpec& spec, std::uint64_t seed) {
  spec.validate();
  MlpParams params{spec, Vector::Zero(spec.param_count())};
  Rng rng(derive_seed(seed, 0x1417));
  for (Index l = 0; l < spec.depth(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(spec.layer_in(l)));
    const Index off = spec.layer_offset(l);
    const Index n_weights = spec.layer_out(l) * spec.layer_in(l);
    for (Index i = 0; i < n_weights; ++i) params.theta(off + i) = uniform(rng, -limit, limit);
  }
  return params;
}

Vector forward(const MlpParams& params, const Vector& x) {
  check_input(params, x);
  return trace_forward(params, x).act.back();
}

Matrix forward_batch(const MlpParams& params, const Matrix& x) {
  check_params(params);
  const MlpSpec& s = params.spec;
  if (x.cols() != s.input_dim) throw InputError("forward_batch: input width mismatch");
  Matrix a = x;
  for (Index l = 0; l < s.depth(); ++l) {
    Matrix z = a * weight_map(params, l).transpose();
    if (s.bias) z.rowwise() += bias_map(params, l).transpose();
    if (l + 1 < s.depth() && s.activation == Activation::relu) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Matrix jacobian(const MlpParams& params, const Vector& x) {
  check_input(params, x);
  const MlpSpec& s = params.spec;
  const Trace t = trace_forward(params, x);
  Matrix full(s.param_count(), s.output_dim);
  Matrix delta = Matrix::Identity(s.output_dim, s.output_dim);
  for (Index l = s.depth() - 1; l >= 0; --l) {
    scatter_layer_rows(s, l, t.act[static_cast<std::size_t>(l)], delta, full);
    if (l > 0) {
      Matrix prev = weight_map(params, l).transpose() * delta;
      delta = t.slope[static_cast<std::size_t>(l - 1)].asDiagonal() * prev;
    }
  }
  return full.bottomRows(s.trainable_count());
}

Vector backprop_batch(const MlpParams& params, const Matrix& x, const Matrix& output_grad) {
  check_params(params);
  const MlpSpec& s = params.spec;
  if (x.cols() != s.input_dim || output_grad.cols() != s.output_dim ||
      x.rows() != output_grad.rows()) {
    throw InputError("backprop_batch: shape mismatch");
  }
  const Index depth = s.depth();
  std::vector<Matrix> acts;
  std::vector<Matrix> slopes;
  acts.push_back(x);
  for (Index l = 0; l < depth; ++l) {
    Matrix z = acts.back() * weight_map(params, l).transpose();
    if (s.bias) z.rowwise() += bias_map(params, l).transpose();
    if (l + 1 < depth) {
      if (s.activation == Activation::relu) {
        slopes.push_back((z.array() > 0.0).cast<double>().matrix());
        z = z.cwiseMax(0.0);
      } else {
        slopes.push_back(Matrix::Ones(z.rows(), z.cols()));
      }
      acts.push_back(std::move(z));
    }
  }

  Vector grad = Vector::Zero(s.param_count());
  Matrix g = output_grad;
  const Index first = s.output_layer_only ? depth - 1 : 0;
  for (Index l = depth - 1; l >= first; --l) {
    const Index off = s.layer_offset(l);
    const Matrix& a = acts[static_cast<std::size_t>(l)];
    Eigen::Map<RowMajorMatrix>(grad.data() + off, s.layer_out(l), s.layer_in(l)) =
        g.transpose() * a;
    if (s.bias) grad.segment(off + s.layer_out(l) * s.layer_in(l), s.layer_out(l)) =
        g.colwise().sum().transpose();
    if (l > first) {
      Matrix prev = g * weight_map(params, l);
      g = prev.cwiseProduct(slopes[static_cast<std::size_t>(l - 1)]);
    }
  }
  return grad.tail(s.trainable_count());
}

SymMatrix contracted_hessian(const MlpParams& params, const Vector& x, const Vector& c) {
  check_input(params, x);
  const MlpSpec& s = params.spec;
  if (c.size() != s.output_dim) throw InputError("contracted_hessian: c has wrong length");
  const Index p_all = s.param_count();
  const Index depth = s.depth();
  const Trace t = trace_forward(params, x);

  // Forward pass of directional derivatives along every parameter axis:
  // r_act[l] is d(act[l]) / d(theta), one column per parameter.
  std::vector<Matrix> r_act(static_cast<std::size_t>(depth));
  r_act[0] = Matrix::Zero(s.input_dim, p_all);
  for (Index l = 0; l + 1 < depth; ++l) {
    const Index off = s.layer_offset(l);
    const Index n_out = s.layer_out(l);
    const Index n_in = s.layer_in(l);
    const Vector& input = t.act[static_cast<std::size_t>(l)];
    Matrix rz = (l == 0) ? Matrix::Zero(n_out, p_all)
                         : Matrix(weight_map(params, l) * r_act[static_cast<std::size_t>(l)]);
    for (Index r = 0; r < n_out; ++r) {
      for (Index k = 0; k < n_in; ++k) rz(r, off + r * n_in + k) += input(k);
      if (s.bias) rz(r, off + n_out * n_in + r) += 1.0;
    }
    r_act[static_cast<std::size_t>(l + 1)] = t.slope[static_cast<std::size_t>(l)].asDiagonal() * rz;
  }

  // Reverse pass: delta is d(c^T f)/d(pre-activation of layer l), r_delta its
  // derivative with respect to theta. The output delta is constant (c).
  Matrix hess(p_all, p_all);
  Vector delta = c;
  Matrix r_delta = Matrix::Zero(s.output_dim, p_all);
  for (Index l = depth - 1; l >= 0; --l) {
    const Index off = s.layer_offset(l);
    const Index n_out = s.layer_out(l);
    const Index n_in = s.layer_in(l);
    const Vector& input = t.act[static_cast<std::size_t>(l)];
    const Matrix& r_input = r_act[static_cast<std::size_t>(l)];
    for (Index r = 0; r < n_out; ++r) {
      for (Index k = 0; k < n_in; ++k) {
        hess.row(off + r * n_in + k) = r_delta.row(r) * input(k) + delta(r) * r_input.row(k);
      }
      if (s.bias) hess.row(off + n_out * n_in + r) = r_delta.row(r);
    }
    if (l > 0) {
      const auto w = weight_map(params, l);
      Matrix r_prev = w.transpose() * r_delta;
      for (Index r = 0; r < n_out; ++r) {
        for (Index k = 0; k < n_in; ++k) r_prev(k, off + r * n_in + k) += delta(r);
      }
      const Vector& slope = t.slope[static_cast<std::size_t>(l - 1)];
      r_delta = slope.asDiagonal() * r_prev;
      Vector prev = w.transpose() * delta;
      delta = slope.cwiseProduct(prev);
    }
  }
  const Index off = s.trainable_offset();
  const Index p = s.trainable_count();
  return SymMatrix(hess.block(off, off, p, p));
}

SymMatrix second_jacobian(const MlpParams& params, const Vector& x, Index k) {
  if (k < 0 || k >= params.spec.output_dim) {
    throw InputError("second_jacobian: output index " + std::to_string(k) + " out of range");
  }
  return contracted_hessian(params, x, Vector::Unit(params.spec.output_dim, k));
}

}  // namespace hdd
