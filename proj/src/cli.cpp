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

#include "kktnet/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "kktnet/dataset.hpp"
#include "kktnet/evaluator.hpp"
#include "kktnet/format.hpp"
#include "kktnet/lp_oracle.hpp"
#include "kktnet/neural.hpp"
#include "kktnet/trainer.hpp"

namespace kktnet::cli {

namespace {

struct GenArgs {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::string out;
  double entry_range = 10.0;
  int max_attempts = 1000;
  int threads = 0;
};

struct TrainArgs {
  std::string data;
  std::string loss;
  std::vector<double> alpha;
  std::optional<double> beta;
  int epochs = 200;
  std::size_t batch = 128;
  double lr = 1e-3;
  std::vector<int> hidden = {64, 64};
  std::uint64_t seed = 0;
  std::string model_out;
  std::string curve_out;
};

struct EvalArgs {
  std::string model;
  std::string data;
  std::string out_dir;
  bool svg = false;
  std::string curve;
};

struct SolveArgs {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
};

struct GradcheckArgs {
  std::uint64_t seed = 0;
  std::string loss = "all";
  int draws = 1;
};

std::string json_array(const Eigen::VectorXd& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_real(v(i));
  }
  return s + "]";
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  return v[std::size_t(q * double(v.size() - 1))];
}

int do_gen(const GenArgs& a, std::ostream& out, std::ostream& err) {
  GenConfig cfg;
  cfg.count = a.count;
  cfg.seed = a.seed;
  cfg.entry_range = a.entry_range;
  cfg.max_attempts_per_example = a.max_attempts;
  cfg.threads = a.threads;
  GenStats stats;
  const auto examples = generate(cfg, &stats);
  write_jsonl(examples, a.out);

  std::vector<double> thetas, duals;
  for (const auto& ex : examples) {
    thetas.push_back(ex.theta);
    for (Eigen::Index i = 0; i < ex.truth->lambda.size(); ++i) {
      duals.push_back(ex.truth->lambda(i));
    }
  }
  out << "wrote " << examples.size() << " examples to " << a.out << '\n';
  err << "acceptance rate " << format_real(stats.acceptance_rate()) << " ("
      << stats.accepted << "/" << stats.attempts << ")\n"
      << "theta min/median/max " << format_real(quantile(thetas, 0.0)) << ' '
      << format_real(quantile(thetas, 0.5)) << ' '
      << format_real(quantile(thetas, 1.0)) << '\n'
      << "lambda* min/median/max " << format_real(quantile(duals, 0.0)) << ' '
      << format_real(quantile(duals, 0.5)) << ' '
      << format_real(quantile(duals, 1.0)) << '\n';
  return kExitOk;
}

int do_train(const TrainArgs& a, std::ostream& out, std::ostream&) {
  TrainConfig cfg;
  const auto mode = parse_loss_mode(a.loss);
  if (!mode) throw Error(ErrorCode::kInvalidArgument, "unknown loss " + a.loss);
  cfg.mode = *mode;
  cfg.weights = preset_weights(*mode);
  if (!a.alpha.empty()) {
    if (a.alpha.size() != 4) {
      throw Error(ErrorCode::kInvalidArgument, "--alpha takes four values");
    }
    cfg.weights.primal_feasibility = a.alpha[0];
    cfg.weights.dual_feasibility = a.alpha[1];
    cfg.weights.complementary_slackness = a.alpha[2];
    cfg.weights.stationarity = a.alpha[3];
  }
  if (a.beta) cfg.weights.data = *a.beta;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.hidden = a.hidden;
  cfg.seed = a.seed;
  cfg.model_out = a.model_out;
  cfg.curve_out = a.curve_out;
  cfg.validate();  // reject bad flag combinations before reading data

  const auto dataset = read_jsonl(a.data);
  const TrainResult result = train(dataset, cfg);
  const CurveRow& first = result.curve.front();
  const CurveRow& last = result.curve.back();
  out << "trained " << to_string(cfg.mode) << " on " << dataset.size()
      << " examples for " << cfg.epochs << " epochs; L_total "
      << format_real(first.total) << " -> " << format_real(last.total) << '\n';
  return kExitOk;
}

int do_eval(const EvalArgs& a, std::ostream& out, std::ostream&) {
  const Mlp model = read_model(a.model);
  const auto test = read_jsonl(a.data);
  const EvalReport report = evaluate(model, test);
  emit_cdf_csv(report, a.out_dir);
  if (a.svg) {
    std::vector<CurveRow> curve;
    if (!a.curve.empty()) curve = read_curve_csv(a.curve);
    emit_svg_plots(report, a.out_dir, a.curve.empty() ? nullptr : &curve);
  }
  out << "evaluated " << report.count << " examples\n";
  for (std::size_t j = 0; j < report.components.size(); ++j) {
    out << "rmse " << report.components[j] << ' ' << format_real(report.rmse[j])
        << '\n';
  }
  return kExitOk;
}

int do_solve(const SolveArgs& a, std::ostream& out) {
  if (a.c.size() != 2 || a.b.empty() || a.a.size() != 2 * a.b.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "--c needs 2 values and --a needs 2 values per entry of --b");
  }
  const Eigen::Index m = Eigen::Index(a.b.size());
  Eigen::MatrixXd mat(m, 2);
  for (Eigen::Index i = 0; i < m; ++i) {
    mat(i, 0) = a.a[std::size_t(2 * i)];
    mat(i, 1) = a.a[std::size_t(2 * i + 1)];
  }
  const ProblemInstance inst = ProblemInstance::lp(
      mat, Eigen::Map<const Eigen::VectorXd>(a.b.data(), m),
      Eigen::Map<const Eigen::Vector2d>(a.c.data()));
  const SolveOutcome outcome = solve_lp(inst);
  out << "{\"status\":\"" << to_string(outcome.status) << '"';
  if (outcome.point) {
    out << ",\"x\":" << json_array(outcome.point->x)
        << ",\"lambda\":" << json_array(outcome.point->lambda);
  }
  out << "}\n";
  return kExitOk;
}

int do_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  constexpr double kGate = 1e-5;
  bool ok = true;
  out << '{';
  bool first = true;
  for (const NamedConfig& preset : preset_configs()) {
    if (a.loss != "all" && a.loss != to_string(preset.mode)) continue;
    double worst = 0.0;
    for (int d = 0; d < a.draws; ++d) {
      worst = std::max(worst, gradcheck(a.seed + std::uint64_t(d), preset.weights));
    }
    ok = ok && worst < kGate;
    out << (first ? "" : ",") << '"' << to_string(preset.mode)
        << "\":" << format_real(worst);
    first = false;
  }
  out << "}\n";
  return ok ? kExitOk : kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"KKT-Net: learn LP primal/dual solutions from KKT residuals",
               args.empty() ? "kktnet" : args.front()};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a labeled LP dataset (JSONL)");
  gen_cmd->add_option("--count", gen.count, "Number of examples")
      ->required()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->required();
  gen_cmd->add_option("--out", gen.out, "Output JSONL path")->required();
  gen_cmd->add_option("--entry-range", gen.entry_range,
                      "Half-width of the uniform entry distribution")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--max-attempts", gen.max_attempts,
                      "Rejected draws allowed per example")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gen_cmd->add_option("--threads", gen.threads,
                      "Worker threads (0 = hardware concurrency)")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a network on a dataset");
  train_cmd->add_option("--data", tr.data, "Training JSONL")->required();
  train_cmd->add_option("--loss", tr.loss, "Loss mode")
      ->required()
      ->check(CLI::IsMember({"kkt", "data", "combined"}));
  train_cmd->add_option("--alpha", tr.alpha,
                        "KKT weights a1,a2,a3,a4 (default 0.1,0.1,0.2,0.6; 0 for data)")
      ->delimiter(',')
      ->expected(4);
  train_cmd->add_option("--beta", tr.beta, "Data-loss weight (default 0 for kkt, 1 otherwise)");
  train_cmd->add_option("--epochs", tr.epochs, "Epochs")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch", tr.batch, "Minibatch size")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tr.lr, "Adam learning rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--hidden", tr.hidden, "Hidden widths, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  train_cmd->add_option("--seed", tr.seed, "Initialization and shuffle seed")
      ->required();
  train_cmd->add_option("--model-out", tr.model_out, "Model JSON output")->required();
  train_cmd->add_option("--curve-out", tr.curve_out, "Loss-curve CSV output")
      ->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on a labeled test set");
  eval_cmd->add_option("--model", ev.model, "Model JSON")->required();
  eval_cmd->add_option("--data", ev.data, "Test JSONL")->required();
  eval_cmd->add_option("--out-dir", ev.out_dir, "Directory for CSV/SVG output")
      ->required();
  eval_cmd->add_flag("--svg", ev.svg, "Also write SVG plots");
  eval_cmd->add_option("--curve", ev.curve,
                       "Loss-curve CSV to plot alongside (with --svg)");

  SolveArgs so;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a two-variable LP exactly");
  solve_cmd->add_option("--a", so.a, "Constraint matrix, row-major")
      ->required()
      ->delimiter(',');
  solve_cmd->add_option("--b", so.b, "Constraint right-hand side")
      ->required()
      ->delimiter(',');
  solve_cmd->add_option("--c", so.c, "Cost vector")->required()->delimiter(',');

  GradcheckArgs gc;
  auto* grad_cmd = app.add_subcommand(
      "gradcheck", "Compare analytic gradients with central differences");
  grad_cmd->add_option("--seed", gc.seed, "Seed of the first draw")->capture_default_str();
  grad_cmd->add_option("--loss", gc.loss, "Loss mode to check")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "kkt", "data", "combined"}));
  grad_cmd->add_option("--draws", gc.draws, "Random (model, batch) draws per mode")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("kktnet");
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const CLI::App* scope = &app;
    for (const CLI::App* sub : app.get_subcommands()) scope = sub;
    err << scope->help();
    return kExitValidation;
  }

  try {
    if (*gen_cmd) return do_gen(gen, out, err);
    if (*train_cmd) return do_train(tr, out, err);
    if (*eval_cmd) return do_eval(ev, out, err);
    if (*solve_cmd) return do_solve(so, out);
    if (*grad_cmd) return do_gradcheck(gc, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    const bool validation = e.code() == ErrorCode::kInvalidArgument ||
                            e.code() == ErrorCode::kMissingGroundTruth ||
                            e.code() == ErrorCode::kUnsupportedShape;
    return validation ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace kktnet::cli
