// Copyright 2026 The KKT-Net Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

// Fully connected tanh network mapping flattened problem parameters to a
// stacked (x̂, λ̂, ν̂) prediction, with hand-written reverse-mode gradients of
// the combined KKT/data loss.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "kktnet/problem.hpp"

namespace kktnet {

template <typename Scalar>
struct BasicDenseLayer {
  MatrixX<Scalar> weight;  // rows = fan_out, cols = fan_in
  VectorX<Scalar> bias;

  bool operator==(const BasicDenseLayer& o) const {
    return identical(weight, o.weight) && identical(bias, o.bias);
  }
};

/// Hidden layers apply tanh; the last layer is affine. A gradient has the
/// same shape as the model, so the same type holds both.
template <typename Scalar>
struct BasicMlp {
  std::vector<BasicDenseLayer<Scalar>> layers;

  Eigen::Index input_dim() const {
    return layers.empty() ? 0 : layers.front().weight.cols();
  }
  Eigen::Index output_dim() const {
    return layers.empty() ? 0 : layers.back().weight.rows();
  }
  std::size_t num_parameters() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weight.size() + l.bias.size();
    return n;
  }

  bool same_shape(const BasicMlp& o) const {
    if (layers.size() != o.layers.size()) return false;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i].weight.rows() != o.layers[i].weight.rows() ||
          layers[i].weight.cols() != o.layers[i].weight.cols() ||
          layers[i].bias.size() != o.layers[i].bias.size()) {
        return false;
      }
    }
    return true;
  }

  /// Throws ShapeMismatch if adjacent layers do not chain.
  void validate() const {
    if (layers.empty()) throw Error(ErrorCode::kShapeMismatch, "no layers");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const auto& l = layers[i];
      if (l.bias.size() != l.weight.rows() ||
          (i > 0 && l.weight.cols() != layers[i - 1].weight.rows())) {
        throw Error(ErrorCode::kShapeMismatch,
                    "layer " + std::to_string(i) + " does not chain");
      }
      if (!l.weight.allFinite() || !l.bias.allFinite()) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite parameter");
      }
    }
  }

  BasicMlp zeros_like() const {
    BasicMlp z;
    for (const auto& l : layers) {
      z.layers.push_back({MatrixX<Scalar>::Zero(l.weight.rows(), l.weight.cols()),
                          VectorX<Scalar>::Zero(l.bias.size())});
    }
    return z;
  }

  /// Visits every parameter in a fixed order (layer, weight column-major,
  /// then bias).
  template <typename Fn>
  void for_each_parameter(Fn&& fn) {
    for (auto& l : layers) {
      for (Eigen::Index i = 0; i < l.weight.size(); ++i) fn(l.weight.data()[i]);
      for (Eigen::Index i = 0; i < l.bias.size(); ++i) fn(l.bias(i));
    }
  }

  template <typename Other>
  BasicMlp<Other> cast() const {
    BasicMlp<Other> out;
    for (const auto& l : layers) {
      out.layers.push_back({l.weight.template cast<Other>(),
                            l.bias.template cast<Other>()});
    }
    return out;
  }

  /// Columns of `inputs` are examples.
  MatrixX<Scalar> forward(const MatrixX<Scalar>& inputs) const {
    MatrixX<Scalar> a = inputs;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      MatrixX<Scalar> z = layers[i].weight * a;
      z.colwise() += layers[i].bias;
      a = i + 1 < layers.size() ? MatrixX<Scalar>(z.array().tanh()) : z;
    }
    return a;
  }

  VectorX<Scalar> forward(const VectorX<Scalar>& input) const {
    return forward(MatrixX<Scalar>(input)).col(0);
  }

  bool operator==(const BasicMlp&) const = default;
};

using DenseLayer = BasicDenseLayer<double>;
using Mlp = BasicMlp<double>;

inline constexpr Eigen::Index kLpInputDim = 8;   // A(4) ‖ b(2) ‖ c(2)
inline constexpr Eigen::Index kLpOutputDim = 4;  // x̂(2) ‖ λ̂(2)

/// Glorot-uniform weights, zero biases.
inline Mlp init_mlp(std::span<const int> hidden_dims, std::uint64_t seed,
                    Eigen::Index input_dim = kLpInputDim,
                    Eigen::Index output_dim = kLpOutputDim) {
  if (hidden_dims.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "hidden_dims must be nonempty");
  }
  std::vector<Eigen::Index> dims{input_dim};
  for (int h : hidden_dims) {
    if (h < 1) throw Error(ErrorCode::kInvalidArgument, "hidden width < 1");
    dims.push_back(h);
  }
  dims.push_back(output_dim);

  std::mt19937_64 rng(seed);
  Mlp model;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    const Eigen::Index fan_in = dims[i];
    const Eigen::Index fan_out = dims[i + 1];
    const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Eigen::MatrixXd(fan_out, fan_in),
                     Eigen::VectorXd::Zero(fan_out)};
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) layer.weight(r, c) = dist(rng);
    }
    model.layers.push_back(std::move(layer));
  }
  return model;
}

/// Slices a stacked prediction into (x̂, λ̂, ν̂) using the instance's
/// dimensions. λ̂ is returned as is, without any sign clamp.
template <typename Scalar>
BasicKktPoint<Scalar> split_output(const VectorX<Scalar>& y,
                                   const BasicProblemInstance<Scalar>& inst) {
  const Eigen::Index n = inst.num_vars();
  const Eigen::Index m = inst.num_inequalities();
  const Eigen::Index p = inst.num_equalities();
  if (y.size() != n + m + p) {
    throw Error(ErrorCode::kDimensionMismatch,
                "network output does not match problem dimensions");
  }
  return {y.head(n), y.segment(n, m), y.tail(p)};
}

/// A batch view: instances plus optional ground truth aligned with them.
template <typename Scalar>
struct BasicBatch {
  std::span<const BasicProblemInstance<Scalar>> instances;
  std::optional<std::span<const BasicKktPoint<Scalar>>> truth;
};

template <typename Scalar>
struct LossAndGrad {
  CombinedLoss<Scalar> loss;
  BasicMlp<Scalar> grad;
};

/// Loss value only; identical arithmetic to loss_and_grad.
template <typename Scalar>
CombinedLoss<Scalar> batch_loss(const BasicMlp<Scalar>& model,
                                const BasicBatch<Scalar>& batch,
                                const BasicLossWeights<Scalar>& w) {
  const std::size_t count = batch.instances.size();
  if (count == 0) throw Error(ErrorCode::kEmptyBatch, "batch_loss");
  MatrixX<Scalar> inputs(model.input_dim(), Eigen::Index(count));
  for (std::size_t k = 0; k < count; ++k) {
    inputs.col(Eigen::Index(k)) = flatten_parameters(batch.instances[k]);
  }
  const MatrixX<Scalar> out = model.forward(inputs);
  std::vector<BasicKktPoint<Scalar>> pred;
  pred.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    pred.push_back(split_output<Scalar>(out.col(Eigen::Index(k)),
                                        batch.instances[k]));
  }
  return combined_loss_terms<Scalar>(batch.instances, pred, batch.truth, w);
}

/// Combined loss over the batch and its exact gradient with respect to
/// every weight and bias.
template <typename Scalar>
LossAndGrad<Scalar> loss_and_grad(const BasicMlp<Scalar>& model,
                                  const BasicBatch<Scalar>& batch,
                                  const BasicLossWeights<Scalar>& w) {
  const std::size_t count = batch.instances.size();
  if (count == 0) throw Error(ErrorCode::kEmptyBatch, "loss_and_grad");
  const Eigen::Index k_count = Eigen::Index(count);
  const std::size_t depth = model.layers.size();

  MatrixX<Scalar> inputs(model.input_dim(), k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const VectorX<Scalar> v = flatten_parameters(batch.instances[k]);
    if (v.size() != model.input_dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "problem parameters do not match the network input");
    }
    inputs.col(k) = v;
  }

  // activations[0] is the input; activations[i] is the output of layer i-1.
  std::vector<MatrixX<Scalar>> activations{inputs};
  activations.reserve(depth + 1);
  for (std::size_t i = 0; i < depth; ++i) {
    MatrixX<Scalar> z = model.layers[i].weight * activations.back();
    z.colwise() += model.layers[i].bias;
    if (i + 1 < depth) z = z.array().tanh().matrix();
    activations.push_back(std::move(z));
  }
  const MatrixX<Scalar>& out = activations.back();

  std::vector<BasicKktPoint<Scalar>> pred;
  pred.reserve(count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    pred.push_back(split_output<Scalar>(out.col(k), batch.instances[k]));
  }

  LossAndGrad<Scalar> result;
  result.loss = combined_loss_terms<Scalar>(batch.instances, pred, batch.truth, w);

  // d(total)/d(output), one column per example.
  MatrixX<Scalar> delta = MatrixX<Scalar>::Zero(out.rows(), k_count);
  const Scalar inv_count = Scalar(1) / Scalar(count);
  if (w.any_kkt()) {
    for (Eigen::Index k = 0; k < k_count; ++k) {
      delta.col(k) =
          inv_count * kkt_loss_gradient(batch.instances[k], pred[k], w).stacked();
    }
  }
  if (w.data > 0) {
    const auto& truth = *batch.truth;  // presence checked by the loss above
    for (Eigen::Index k = 0; k < k_count; ++k) {
      delta.col(k) += (Scalar(2) * w.data * inv_count) *
                      (pred[k].stacked() - truth[std::size_t(k)].stacked());
    }
  }

  result.grad = model.zeros_like();
  for (std::size_t i = depth; i-- > 0;) {
    auto& g = result.grad.layers[i];
    g.weight.noalias() = delta * activations[i].transpose();
    g.bias = delta.rowwise().sum();
    if (i > 0) {
      MatrixX<Scalar> back = model.layers[i].weight.transpose() * delta;
      // tanh' = 1 - tanh².
      delta = back.array() *
              (Scalar(1) - activations[i].array().square());
    }
  }
  return result;
}

}  // namespace kktnet
