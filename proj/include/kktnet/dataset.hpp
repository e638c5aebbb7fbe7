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
#include <optional>
#include <utility>
#include <vector>

#include "kktnet/lp_oracle.hpp"
#include "kktnet/problem.hpp"

namespace kktnet {

/// A normalized LP with its optimal primal/dual pair. `truth` is empty for
/// label-free datasets, which only the KKT loss can train on.
struct LabeledExample {
  ProblemInstance instance;
  std::optional<KktPoint> truth;
  double theta = 1.0;
  std::uint64_t seed_tag = 0;

  bool operator==(const LabeledExample&) const = default;
};

struct GenConfig {
  std::size_t count = 10000;
  std::uint64_t seed = 0;
  double entry_range = 10.0;  // entries drawn uniform on [-range, range]
  int max_attempts_per_example = 1000;
  int threads = 0;  // 0 picks the hardware concurrency
  AcceptanceFilter filter;

  void validate() const;
};

struct GenStats {
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;

  double acceptance_rate() const {
    return attempts == 0 ? 0.0 : double(accepted) / double(attempts);
  }
};

/// Sub-seed of example `index`; the stream behind it is independent of how
/// the examples are distributed over workers.
std::uint64_t example_seed(std::uint64_t seed, std::uint64_t index);

/// Draws a raw 2×2 LP (A row-major, then b, then c) from the example stream.
ProblemInstance sample_raw_lp(std::uint64_t sub_seed, std::uint64_t attempt,
                              double entry_range);

std::vector<LabeledExample> generate(const GenConfig& cfg,
                                     GenStats* stats = nullptr);

void write_jsonl(const std::vector<LabeledExample>& examples,
                 const std::filesystem::path& path);
std::vector<LabeledExample> read_jsonl(const std::filesystem::path& path);

/// Copies of `examples` with every ground-truth field dropped.
std::vector<LabeledExample> strip_labels(std::vector<LabeledExample> examples);

std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> split(
    const std::vector<LabeledExample>& examples, double test_fraction,
    std::uint64_t seed);

}  // namespace kktnet
