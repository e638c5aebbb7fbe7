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

#include <filesystem>
#include <string>
#include <vector>

#include "kktnet/neural.hpp"
#include "kktnet/trainer.hpp"

namespace kktnet {

/// Per-component accuracy of a model on a labeled test set. Components are
/// ordered x1..xn, lambda1..lambdam, nu1..nup.
struct EvalReport {
  std::vector<std::string> components;
  std::vector<double> rmse;
  std::vector<std::vector<double>> sq_errors;  // each sorted ascending
  std::size_t count = 0;
  LossTerms mean_residuals;  // KKT residual losses of the predictions

  double median_sq_error(std::size_t component) const;
};

/// Throws EmptyTestSet, MissingGroundTruth or DimensionMismatch.
EvalReport evaluate(const Mlp& model, const std::vector<LabeledExample>& test);

/// Concatenates shard reports (same components) into one.
EvalReport merge_reports(const std::vector<EvalReport>& shards);

/// Writes cdf_<component>.csv (sq_error,cdf) for every component and
/// rmse.csv (component,rmse). Returns the paths written.
std::vector<std::filesystem::path> emit_cdf_csv(
    const EvalReport& report, const std::filesystem::path& out_dir);

/// Step-function CDF plots per component, plus a loss-curve plot when
/// `curve` is non-null. Data coordinates are written verbatim.
std::vector<std::filesystem::path> emit_svg_plots(
    const EvalReport& report, const std::filesystem::path& out_dir,
    const std::vector<CurveRow>* curve = nullptr);

}  // namespace kktnet
