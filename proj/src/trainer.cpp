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

#include "kktnet/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "kktnet/format.hpp"

namespace kktnet {

namespace {

constexpr LossWeights kKktOnly{0.1, 0.1, 0.2, 0.6, 0.0, 0.0};
constexpr LossWeights kDataOnly{0.0, 0.0, 0.0, 0.0, 1.0, 0.0};
constexpr LossWeights kCombined{0.1, 0.1, 0.2, 0.6, 1.0, 0.0};

}  // namespace

std::string_view to_string(LossMode mode) {
  switch (mode) {
    case LossMode::kKkt: return "kkt";
    case LossMode::kData: return "data";
    case LossMode::kCombined: return "combined";
  }
  return "unknown";
}

std::optional<LossMode> parse_loss_mode(std::string_view text) {
  if (text == "kkt") return LossMode::kKkt;
  if (text == "data") return LossMode::kData;
  if (text == "combined") return LossMode::kCombined;
  return std::nullopt;
}

std::array<NamedConfig, 3> preset_configs() {
  return {{{"data-only", LossMode::kData, kDataOnly},
           {"kkt-only", LossMode::kKkt, kKktOnly},
           {"combined", LossMode::kCombined, kCombined}}};
}

LossWeights preset_weights(LossMode mode) {
  switch (mode) {
    case LossMode::kKkt: return kKktOnly;
    case LossMode::kData: return kDataOnly;
    case LossMode::kCombined: return kCombined;
  }
  return kKktOnly;
}

void TrainConfig::validate() const {
  weights.validate();
  const bool any_alpha = weights.any_kkt();
  const bool has_beta = weights.data > 0;
  switch (mode) {
    case LossMode::kKkt:
      if (has_beta) {
        throw Error(ErrorCode::kInvalidArgument, "kkt mode requires beta = 0");
      }
      if (!any_alpha) {
        throw Error(ErrorCode::kInvalidArgument,
                    "kkt mode needs a positive alpha");
      }
      break;
    case LossMode::kData:
      if (any_alpha || !has_beta) {
        throw Error(ErrorCode::kInvalidArgument,
                    "data mode requires alpha = 0 and beta > 0");
      }
      break;
    case LossMode::kCombined:
      if (!any_alpha || !has_beta) {
        throw Error(ErrorCode::kInvalidArgument,
                    "combined mode requires some alpha > 0 and beta > 0");
      }
      break;
  }
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "batch size must be >= 1");
  }
  if (!(learning_rate > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive");
  }
  if (hidden.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one hidden layer");
  }
}

TrainResult train(const std::vector<LabeledExample>& dataset,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "train");

  // KKT-only training sees no labels at all, even if the file has them.
  std::vector<LabeledExample> unlabeled;
  const std::vector<LabeledExample>* source = &dataset;
  if (cfg.mode == LossMode::kKkt) {
    unlabeled = strip_labels(dataset);
    source = &unlabeled;
  } else {
    const bool all_labeled = std::all_of(
        dataset.begin(), dataset.end(),
        [](const LabeledExample& ex) { return ex.truth.has_value(); });
    if (!all_labeled) {
      throw Error(ErrorCode::kMissingGroundTruth,
                  std::string(to_string(cfg.mode)) +
                      " mode needs ground truth for every example");
    }
  }
  const Eigen::Index in_dim = flatten_parameters(dataset.front().instance).size();
  const Eigen::Index out_dim = dataset.front().instance.num_vars() +
                               dataset.front().instance.num_inequalities() +
                               dataset.front().instance.num_equalities();

  TrainResult result;
  result.model = init_mlp(cfg.hidden, cfg.seed, in_dim, out_dim);
  AdamState adam = AdamState::for_model(result.model, {cfg.learning_rate});

  std::vector<std::size_t> order(source->size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);
  const bool labeled = cfg.mode != LossMode::kKkt;
  std::vector<ProblemInstance> insts;
  std::vector<KktPoint> truth;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    CurveRow row;
    row.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      insts.resize(stop - start);
      truth.resize(labeled ? stop - start : 0);
      for (std::size_t i = start; i < stop; ++i) {
        const LabeledExample& ex = (*source)[order[i]];
        insts[i - start] = ex.instance;
        if (labeled) truth[i - start] = *ex.truth;
      }
      BasicBatch<double> batch{insts, std::nullopt};
      if (labeled) batch.truth = std::span<const KktPoint>(truth);

      const LossAndGrad<double> lg =
          loss_and_grad<double>(result.model, batch, cfg.weights);
      adam_step(result.model, lg.grad, adam);

      // Batch means weighted by batch size: the row is a per-example mean,
      // so a short final batch does not count as much as a full one.
      const double k = double(stop - start);
      LossTerms weighted = lg.loss.terms;
      weighted *= k;
      row.terms += weighted;
      row.kkt += k * lg.loss.kkt;
      row.data += k * lg.loss.data;
      row.total += k * lg.loss.total;
    }
    const double n = double(order.size());
    row.terms /= n;
    row.kkt /= n;
    row.data /= n;
    row.total /= n;
    result.curve.push_back(row);
  }

  if (!cfg.model_out.empty()) write_model(result.model, cfg.model_out);
  if (!cfg.curve_out.empty()) write_curve_csv(result.curve, cfg.curve_out);
  return result;
}

void write_curve_csv(const std::vector<CurveRow>& curve,
                     const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  os << "epoch,L_PF,L_DF,L_CS,L_S,L_KKT,L_Data,L_total\n";
  for (const CurveRow& r : curve) {
    os << r.epoch << ',' << format_real(r.terms.primal_feasibility) << ','
       << format_real(r.terms.dual_feasibility) << ','
       << format_real(r.terms.complementary_slackness) << ','
       << format_real(r.terms.stationarity) << ',' << format_real(r.kkt) << ','
       << format_real(r.data) << ',' << format_real(r.total) << '\n';
  }
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<CurveRow> read_curve_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<CurveRow> curve;
  std::string line;
  std::getline(is, line);  // header
  for (std::size_t lineno = 2; std::getline(is, line); ++lineno) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw MalformedRecordError(lineno, "non-numeric cell '" + cell + "'");
      }
    }
    if (cells.size() != 8) throw MalformedRecordError(lineno, "expected 8 columns");
    CurveRow r;
    r.epoch = static_cast<int>(cells[0]);
    r.terms.primal_feasibility = cells[1];
    r.terms.dual_feasibility = cells[2];
    r.terms.complementary_slackness = cells[3];
    r.terms.stationarity = cells[4];
    r.kkt = cells[5];
    r.data = cells[6];
    r.total = cells[7];
    curve.push_back(r);
  }
  return curve;
}

}  // namespace kktnet
