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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "kktnet/neural.hpp"

namespace kktnet {

enum class LossMode { kKkt, kData, kCombined };

std::string_view to_string(LossMode mode);
std::optional<LossMode> parse_loss_mode(std::string_view text);

struct TrainConfig {
  LossMode mode = LossMode::kKkt;
  LossWeights weights;
  int epochs = 200;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::vector<int> hidden = {64, 64};
  std::uint64_t seed = 0;
  std::filesystem::path model_out;  // empty: not written
  std::filesystem::path curve_out;  // empty: not written

  /// Throws InvalidArgument when the weights contradict the mode.
  void validate() const;
};

struct NamedConfig {
  std::string_view name;
  LossMode mode;
  LossWeights weights;
};

/// The three loss configurations: data-only, KKT-only and combined.
std::array<NamedConfig, 3> preset_configs();

/// Default weights for a mode.
LossWeights preset_weights(LossMode mode);

/// Per-epoch means of the minibatch loss components.
struct CurveRow {
  int epoch = 0;
  LossTerms terms;
  double kkt = 0.0;
  double data = 0.0;  // 0 when the dataset carries no labels
  double total = 0.0;
};

struct TrainResult {
  Mlp model;
  std::vector<CurveRow> curve;
};

/// Minibatch Adam over a seeded per-epoch shuffle. KKT-only training never
/// touches ground truth; the other modes throw MissingGroundTruth on an
/// unlabeled dataset before any step is taken.
TrainResult train(const std::vector<LabeledExample>& dataset,
                  const TrainConfig& cfg);

void write_curve_csv(const std::vector<CurveRow>& curve,
                     const std::filesystem::path& path);
std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path);

}  // namespace kktnet
