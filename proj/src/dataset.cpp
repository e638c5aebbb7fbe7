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

#include "kktnet/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <random>
#include <string>
#include <thread>

#include "json.hpp"

namespace kktnet {

namespace {

using Json = nlohmann::ordered_json;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

LabeledExample make_example(const GenConfig& cfg, std::uint64_t index,
                            std::uint64_t* attempts_out) {
  const std::uint64_t sub_seed = example_seed(cfg.seed, index);
  for (int attempt = 0; attempt < cfg.max_attempts_per_example; ++attempt) {
    ++*attempts_out;
    const ProblemInstance raw = sample_raw_lp(sub_seed, attempt, cfg.entry_range);
    const double theta = max_abs_entry(raw);
    if (!(theta > 0)) continue;
    Normalized<double> norm = normalize(raw);
    if (!accept_instance(norm.instance, cfg.filter)) continue;
    SolveOutcome out = solve_lp(norm.instance);
    return {std::move(norm.instance), std::move(out.point), norm.theta,
            splitmix64(sub_seed ^ std::uint64_t(attempt))};
  }
  throw Error(ErrorCode::kGenerationExhausted,
              "example " + std::to_string(index) + " rejected " +
                  std::to_string(cfg.max_attempts_per_example) + " draws");
}

Json to_json_array(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_field(const Json& rec, const char* key,
                             std::size_t line) {
  const auto it = rec.find(key);
  if (it == rec.end() || !it->is_array()) {
    throw MalformedRecordError(line, std::string("missing array '") + key + "'");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(it->size()));
  for (std::size_t i = 0; i < it->size(); ++i) {
    if (!(*it)[i].is_number()) {
      throw MalformedRecordError(line, std::string("non-numeric entry in '") +
                                           key + "'");
    }
    v(static_cast<Eigen::Index>(i)) = (*it)[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_field(const Json& rec, const char* key,
                             std::size_t line) {
  const auto it = rec.find(key);
  if (it == rec.end() || !it->is_array() || it->empty()) {
    throw MalformedRecordError(line, std::string("missing matrix '") + key + "'");
  }
  const std::size_t rows = it->size();
  const std::size_t cols = (*it)[0].is_array() ? (*it)[0].size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const Json& row = (*it)[r];
    if (!row.is_array() || row.size() != cols) {
      throw MalformedRecordError(line, std::string("ragged matrix '") + key + "'");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw MalformedRecordError(line, std::string("non-numeric entry in '") +
                                             key + "'");
      }
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

LabeledExample parse_record(const std::string& text, std::size_t line) {
  Json rec;
  try {
    rec = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedRecordError(line, "invalid JSON");
  }
  if (!rec.is_object()) throw MalformedRecordError(line, "record is not an object");

  LabeledExample ex;
  try {
    ex.instance = ProblemInstance::lp(matrix_field(rec, "A", line),
                                      vector_field(rec, "b", line),
                                      vector_field(rec, "c", line));
  } catch (const MalformedRecordError&) {
    throw;
  } catch (const Error& e) {
    throw MalformedRecordError(line, e.what());
  }
  const auto theta = rec.find("theta");
  if (theta == rec.end() || !theta->is_number() || !(theta->get<double>() > 0)) {
    throw MalformedRecordError(line, "'theta' must be a positive number");
  }
  ex.theta = theta->get<double>();
  const auto tag = rec.find("seed_tag");
  if (tag == rec.end() || !tag->is_number_integer()) {
    throw MalformedRecordError(line, "'seed_tag' must be an integer");
  }
  ex.seed_tag = tag->get<std::uint64_t>();

  const bool has_x = rec.contains("x_star");
  const bool has_lambda = rec.contains("lambda_star");
  if (has_x != has_lambda) {
    throw MalformedRecordError(line, "'x_star' and 'lambda_star' must appear together");
  }
  if (has_x) {
    KktPoint truth{vector_field(rec, "x_star", line),
                   vector_field(rec, "lambda_star", line),
                   Eigen::VectorXd::Zero(0)};
    if (!truth.matches(ex.instance)) {
      throw MalformedRecordError(line, "solution shape does not match problem");
    }
    ex.truth = std::move(truth);
  }
  return ex;
}

}  // namespace

void GenConfig::validate() const {
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "count must be >= 1");
  if (!(entry_range > 0) || !std::isfinite(entry_range)) {
    throw Error(ErrorCode::kInvalidArgument, "entry_range must be positive");
  }
  if (max_attempts_per_example < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_attempts_per_example must be >= 1");
  }
}

std::uint64_t example_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) + index);
}

ProblemInstance sample_raw_lp(std::uint64_t sub_seed, std::uint64_t attempt,
                              double entry_range) {
  std::mt19937_64 rng(splitmix64(sub_seed ^ splitmix64(attempt)));
  std::uniform_real_distribution<double> dist(-entry_range, entry_range);
  Eigen::Matrix2d a;
  Eigen::Vector2d b;
  Eigen::Vector2d c;
  a(0, 0) = dist(rng);
  a(0, 1) = dist(rng);
  a(1, 0) = dist(rng);
  a(1, 1) = dist(rng);
  b(0) = dist(rng);
  b(1) = dist(rng);
  c(0) = dist(rng);
  c(1) = dist(rng);
  return ProblemInstance::lp(a, b, c);
}

std::vector<LabeledExample> generate(const GenConfig& cfg, GenStats* stats) {
  cfg.validate();
  std::vector<LabeledExample> out(cfg.count);
  std::vector<std::uint64_t> attempts(cfg.count, 0);

  unsigned workers = cfg.threads > 0 ? unsigned(cfg.threads)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.count));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < cfg.count;) {
      try {
        out[k] = make_example(cfg, k, &attempts[k]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(cfg.count);
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  if (stats) {
    stats->attempts = std::accumulate(attempts.begin(), attempts.end(),
                                      std::uint64_t{0});
    stats->accepted = cfg.count;
  }
  return out;
}

void write_jsonl(const std::vector<LabeledExample>& examples,
                 const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  for (const LabeledExample& ex : examples) {
    Json rec;
    Json a = Json::array();
    for (Eigen::Index r = 0; r < ex.instance.ineq_matrix.rows(); ++r) {
      a.push_back(to_json_array(ex.instance.ineq_matrix.row(r).transpose()));
    }
    rec["A"] = std::move(a);
    rec["b"] = to_json_array(ex.instance.ineq_rhs);
    rec["c"] = to_json_array(ex.instance.linear);
    rec["theta"] = ex.theta;
    if (ex.truth) {
      rec["x_star"] = to_json_array(ex.truth->x);
      rec["lambda_star"] = to_json_array(ex.truth->lambda);
    }
    rec["seed_tag"] = ex.seed_tag;
    os << rec.dump() << '\n';
  }
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::vector<LabeledExample> read_jsonl(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<LabeledExample> out;
  std::string text;
  for (std::size_t line = 1; std::getline(is, text); ++line) {
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_record(text, line));
  }
  if (is.bad()) throw Error(ErrorCode::kIo, "read failed for " + path.string());
  return out;
}

std::vector<LabeledExample> strip_labels(std::vector<LabeledExample> examples) {
  for (LabeledExample& ex : examples) ex.truth.reset();
  return examples;
}

std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> split(
    const std::vector<LabeledExample>& examples, double test_fraction,
    std::uint64_t seed) {
  if (examples.size() < 2) {
    throw Error(ErrorCode::kTooFewExamples, "split needs at least 2 examples");
  }
  if (!(test_fraction > 0 && test_fraction < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "test_fraction must be in (0, 1)");
  }
  const std::size_t total = examples.size();
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(splitmix64(seed));
  std::shuffle(order.begin(), order.end(), rng);

  // Ceil of the requested share, tolerant of representation error, and never
  // leaving either side empty.
  auto test_size = static_cast<std::size_t>(
      std::ceil(test_fraction * double(total) - 1e-9));
  test_size = std::clamp<std::size_t>(test_size, 1, total - 1);

  std::pair<std::vector<LabeledExample>, std::vector<LabeledExample>> parts;
  for (std::size_t i = 0; i < total; ++i) {
    (i < test_size ? parts.second : parts.first).push_back(examples[order[i]]);
  }
  return parts;
}

}  // namespace kktnet
