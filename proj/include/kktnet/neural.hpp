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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kktnet/dataset.hpp"
#include "kktnet/mlp.hpp"

namespace kktnet {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Mlp first_moment;
  Mlp second_moment;
  std::int64_t step = 0;
  AdamConfig config;

  static AdamState for_model(const Mlp& model, const AdamConfig& config = {});
};

/// One bias-corrected Adam update. Throws ShapeMismatch if the gradient or
/// state do not match the model.
void adam_step(Mlp& model, const Mlp& grad, AdamState& state);

/// Instances and (if every example is labeled) ground truth of a batch of
/// examples, kept alive for the spans handed to loss_and_grad.
class ExampleBatch {
 public:
  explicit ExampleBatch(std::span<const LabeledExample> examples);

  BasicBatch<double> view() const;
  bool labeled() const { return labeled_; }

 private:
  std::vector<ProblemInstance> instances_;
  std::vector<KktPoint> truth_;
  bool labeled_ = true;
};

LossAndGrad<double> loss_and_grad(const Mlp& model,
                                  std::span<const LabeledExample> batch,
                                  const LossWeights& w);

/// Predicted (x̂, λ̂) for one example.
KktPoint predict(const Mlp& model, const ProblemInstance& inst);

std::string model_to_json(const Mlp& model);
Mlp model_from_json(const std::string& text);
void write_model(const Mlp& model, const std::filesystem::path& path);
Mlp read_model(const std::filesystem::path& path);

struct GradcheckOptions {
  std::vector<int> hidden = {8};
  std::size_t batch_size = 4;
  double step = 1e-5;           // central-difference half width
  double min_magnitude = 1e-6;  // coordinates with smaller |g| are skipped
};

/// Largest relative error between loss_and_grad and central differences
/// over every parameter of a small random model on a random LP batch.
double gradcheck(std::uint64_t seed, const LossWeights& w,
                 const GradcheckOptions& options = {});

}  // namespace kktnet
