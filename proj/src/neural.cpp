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

#include "kktnet/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace kktnet {

using Json = nlohmann::ordered_json;

AdamState AdamState::for_model(const Mlp& model, const AdamConfig& config) {
  return {model.zeros_like(), model.zeros_like(), 0, config};
}

void adam_step(Mlp& model, const Mlp& grad, AdamState& state) {
  if (!model.same_shape(grad) || !model.same_shape(state.first_moment) ||
      !model.same_shape(state.second_moment)) {
    throw Error(ErrorCode::kShapeMismatch, "adam_step");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = double(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);

  auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    param.array() -= c.learning_rate * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + c.epsilon);
  };
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    update(model.layers[i].weight, grad.layers[i].weight,
           state.first_moment.layers[i].weight,
           state.second_moment.layers[i].weight);
    update(model.layers[i].bias, grad.layers[i].bias,
           state.first_moment.layers[i].bias,
           state.second_moment.layers[i].bias);
  }
}

ExampleBatch::ExampleBatch(std::span<const LabeledExample> examples) {
  instances_.reserve(examples.size());
  truth_.reserve(examples.size());
  for (const LabeledExample& ex : examples) {
    instances_.push_back(ex.instance);
    if (ex.truth) {
      truth_.push_back(*ex.truth);
    } else {
      labeled_ = false;
    }
  }
  if (!labeled_) truth_.clear();
}

BasicBatch<double> ExampleBatch::view() const {
  BasicBatch<double> b{instances_, std::nullopt};
  if (labeled_) b.truth = std::span<const KktPoint>(truth_);
  return b;
}

LossAndGrad<double> loss_and_grad(const Mlp& model,
                                  std::span<const LabeledExample> batch,
                                  const LossWeights& w) {
  if (batch.empty()) throw Error(ErrorCode::kEmptyBatch, "loss_and_grad");
  const ExampleBatch owned(batch);
  return loss_and_grad<double>(model, owned.view(), w);
}

KktPoint predict(const Mlp& model, const ProblemInstance& inst) {
  const Eigen::VectorXd input = flatten_parameters(inst);
  if (input.size() != model.input_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "problem parameters do not match the network input");
  }
  return split_output<double>(model.forward(input), inst);
}

std::string model_to_json(const Mlp& model) {
  Json doc;
  doc["input_dim"] = model.input_dim();
  doc["output_dim"] = model.output_dim();
  doc["activation"] = "tanh";
  Json layers = Json::array();
  for (const DenseLayer& l : model.layers) {
    Json w = Json::array();
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    }
    Json b = Json::array();
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) b.push_back(l.bias(i));
    Json layer;
    layer["rows"] = l.weight.rows();
    layer["cols"] = l.weight.cols();
    layer["w"] = std::move(w);
    layer["b"] = std::move(b);
    layers.push_back(std::move(layer));
  }
  doc["layers"] = std::move(layers);
  return doc.dump();
}

Mlp model_from_json(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("model file is not JSON: ") + e.what());
  }
  try {
    if (doc.at("activation").get<std::string>() != "tanh") {
      throw Error(ErrorCode::kInvalidArgument, "unsupported activation");
    }
    Mlp model;
    for (const Json& layer : doc.at("layers")) {
      const auto rows = layer.at("rows").get<Eigen::Index>();
      const auto cols = layer.at("cols").get<Eigen::Index>();
      const auto& w = layer.at("w");
      const auto& b = layer.at("b");
      if (rows < 1 || cols < 1 || Eigen::Index(w.size()) != rows * cols ||
          Eigen::Index(b.size()) != rows) {
        throw Error(ErrorCode::kShapeMismatch, "layer size disagrees with rows/cols");
      }
      DenseLayer l{Eigen::MatrixXd(rows, cols), Eigen::VectorXd(rows)};
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          l.weight(r, c) = w[std::size_t(r * cols + c)].get<double>();
        }
        l.bias(r) = b[std::size_t(r)].get<double>();
      }
      model.layers.push_back(std::move(l));
    }
    model.validate();
    if (model.input_dim() != doc.at("input_dim").get<Eigen::Index>() ||
        model.output_dim() != doc.at("output_dim").get<Eigen::Index>()) {
      throw Error(ErrorCode::kShapeMismatch, "declared dims disagree with layers");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string("malformed model file: ") + e.what());
  }
}

void write_model(const Mlp& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  os << model_to_json(model) << '\n';
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

Mlp read_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return model_from_json(ss.str());
}

double gradcheck(std::uint64_t seed, const LossWeights& w,
                 const GradcheckOptions& options) {
  Mlp model = init_mlp(options.hidden, seed);
  // Nonzero biases so every layer's bias gradient is exercised.
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::uniform_real_distribution<double> bias_dist(-0.5, 0.5);
  for (DenseLayer& l : model.layers) {
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = bias_dist(rng);
  }

  GenConfig gen;
  gen.count = options.batch_size;
  gen.seed = seed;
  gen.threads = 1;
  const std::vector<LabeledExample> examples = generate(gen);
  const ExampleBatch batch(examples);
  const LossAndGrad<double> analytic = loss_and_grad<double>(model, batch.view(), w);

  // The difference quotients are evaluated in extended precision through the
  // forward-only path so rounding in the loss does not swamp small slopes.
  using Wide = long double;
  std::vector<BasicProblemInstance<Wide>> wide_insts;
  std::vector<BasicKktPoint<Wide>> wide_truth;
  for (const LabeledExample& ex : examples) {
    wide_insts.push_back(ex.instance.cast<Wide>());
    wide_truth.push_back({ex.truth->x.cast<Wide>(), ex.truth->lambda.cast<Wide>(),
                          ex.truth->nu.cast<Wide>()});
  }
  const BasicBatch<Wide> wide_batch{wide_insts,
                                    std::span<const BasicKktPoint<Wide>>(wide_truth)};
  const BasicLossWeights<Wide> wide_w = w.cast<Wide>();
  BasicMlp<Wide> probe = model.cast<Wide>();

  std::vector<Wide*> params;
  probe.for_each_parameter([&](Wide& p) { params.push_back(&p); });
  std::vector<double> grads;
  Mlp analytic_grad = analytic.grad;
  analytic_grad.for_each_parameter([&](double& g) { grads.push_back(g); });

  const Wide h = options.step;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (std::abs(grads[i]) <= options.min_magnitude) continue;
    const Wide saved = *params[i];
    *params[i] = saved + h;
    const Wide up = batch_loss(probe, wide_batch, wide_w).total;
    *params[i] = saved - h;
    const Wide down = batch_loss(probe, wide_batch, wide_w).total;
    *params[i] = saved;
    const double numeric = double((up - down) / (2 * h));
    const double rel = std::abs(grads[i] - numeric) /
                       std::max(std::abs(grads[i]), std::abs(numeric));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace kktnet
