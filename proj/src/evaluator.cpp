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

#include "kktnet/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kktnet/format.hpp"

namespace kktnet {

namespace {

std::vector<std::string> component_names(const ProblemInstance& inst) {
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < inst.num_vars(); ++i) {
    names.push_back("x" + std::to_string(i + 1));
  }
  for (Eigen::Index i = 0; i < inst.num_inequalities(); ++i) {
    names.push_back("lambda" + std::to_string(i + 1));
  }
  for (Eigen::Index i = 0; i < inst.num_equalities(); ++i) {
    names.push_back("nu" + std::to_string(i + 1));
  }
  return names;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string());
}

// Plot area in pixels.
constexpr double kWidth = 480, kHeight = 360, kLeft = 60, kBottom = 310,
                 kPlotW = 400, kPlotH = 280;

struct Series {
  std::string label;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

// Points are emitted in data coordinates inside a transformed group, so the
// numbers in the document are exactly the plotted values.
void write_svg(const std::filesystem::path& path, const std::string& title,
               const std::string& x_label, const std::string& y_label,
               const std::vector<Series>& series) {
  double x_min = 0, x_max = 0, y_max = 0;
  bool first = true;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      if (first) {
        x_min = x_max = x;
        first = false;
      }
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_max = std::max(y_max, y);
    }
  }
  x_min = std::min(x_min, 0.0);
  if (!(x_max > x_min)) x_max = x_min + 1.0;
  if (!(y_max > 0)) y_max = 1.0;
  const double sx = kPlotW / (x_max - x_min);
  const double sy = kPlotH / y_max;

  std::ofstream os = open_out(path);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
     << kHeight << "\">\n"
     << "<title>" << title << "</title>\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\""
     << kLeft + kPlotW << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kLeft
     << "\" y2=\"" << kBottom - kPlotH << "\" stroke=\"black\"/>\n"
     << "<text x=\"" << kLeft + kPlotW / 2 << "\" y=\"" << kHeight - 10
     << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n"
     << "<text x=\"14\" y=\"" << kBottom - kPlotH / 2
     << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 "
     << kBottom - kPlotH / 2 << ")\">" << y_label << "</text>\n"
     << "<text x=\"" << kLeft << "\" y=\"" << kBottom + 14
     << "\" font-size=\"10\">" << format_real(x_min) << "</text>\n"
     << "<text x=\"" << kLeft + kPlotW << "\" y=\"" << kBottom + 14
     << "\" text-anchor=\"end\" font-size=\"10\">" << format_real(x_max)
     << "</text>\n"
     << "<text x=\"" << kLeft - 4 << "\" y=\"" << kBottom - kPlotH + 4
     << "\" text-anchor=\"end\" font-size=\"10\">" << format_real(y_max)
     << "</text>\n"
     << "<text x=\"" << kLeft + kPlotW / 2 << "\" y=\"20\" text-anchor=\"middle\""
     << " font-size=\"14\">" << title << "</text>\n"
     << "<g transform=\"translate(" << kLeft - x_min * sx << ' ' << kBottom
     << ") scale(" << format_real(sx) << ' ' << format_real(-sy) << ")\">\n";
  for (const Series& s : series) {
    os << "<polyline fill=\"none\" stroke=\"" << s.color
       << "\" stroke-width=\"1.5\" vector-effect=\"non-scaling-stroke\""
       << " data-label=\"" << s.label << "\" points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i) os << ' ';
      os << format_real(s.points[i].first) << ',' << format_real(s.points[i].second);
    }
    os << "\"/>\n";
  }
  os << "</g>\n";
  double legend_y = 40;
  for (const Series& s : series) {
    os << "<text x=\"" << kLeft + kPlotW - 4 << "\" y=\"" << legend_y
       << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << s.color << "\">"
       << s.label << "</text>\n";
    legend_y += 14;
  }
  os << "</svg>\n";
  finish(os, path);
}

}  // namespace

double EvalReport::median_sq_error(std::size_t component) const {
  const std::vector<double>& e = sq_errors.at(component);
  if (e.empty()) return 0.0;
  const std::size_t mid = e.size() / 2;
  return e.size() % 2 ? e[mid] : 0.5 * (e[mid - 1] + e[mid]);
}

EvalReport evaluate(const Mlp& model, const std::vector<LabeledExample>& test) {
  if (test.empty()) throw Error(ErrorCode::kEmptyTestSet, "evaluate");
  EvalReport report;
  report.components = component_names(test.front().instance);
  const std::size_t dims = report.components.size();
  if (Eigen::Index(dims) != model.output_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model output does not match the test problems");
  }
  report.sq_errors.assign(dims, {});
  for (auto& e : report.sq_errors) e.reserve(test.size());

  for (std::size_t k = 0; k < test.size(); ++k) {
    const LabeledExample& ex = test[k];
    if (!ex.truth) {
      throw Error(ErrorCode::kMissingGroundTruth,
                  "test example " + std::to_string(k) + " has no labels");
    }
    const KktPoint pred = predict(model, ex.instance);
    const Eigen::VectorXd diff = pred.stacked() - ex.truth->stacked();
    if (std::size_t(diff.size()) != dims) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "test example " + std::to_string(k) + " has a different shape");
    }
    for (std::size_t j = 0; j < dims; ++j) {
      report.sq_errors[j].push_back(diff(Eigen::Index(j)) * diff(Eigen::Index(j)));
    }
    report.mean_residuals += kkt_residual_losses(ex.instance, pred);
  }
  report.count = test.size();
  report.mean_residuals /= double(test.size());

  report.rmse.resize(dims);
  for (std::size_t j = 0; j < dims; ++j) {
    std::vector<double>& e = report.sq_errors[j];
    std::sort(e.begin(), e.end());
    double sum = 0.0;
    for (double v : e) sum += v;
    report.rmse[j] = std::sqrt(sum / double(e.size()));
  }
  return report;
}

EvalReport merge_reports(const std::vector<EvalReport>& shards) {
  if (shards.empty()) throw Error(ErrorCode::kEmptyTestSet, "merge_reports");
  EvalReport out;
  out.components = shards.front().components;
  const std::size_t dims = out.components.size();
  out.sq_errors.assign(dims, {});
  for (const EvalReport& s : shards) {
    if (s.components != out.components) {
      throw Error(ErrorCode::kDimensionMismatch, "shards disagree on components");
    }
    for (std::size_t j = 0; j < dims; ++j) {
      out.sq_errors[j].insert(out.sq_errors[j].end(), s.sq_errors[j].begin(),
                              s.sq_errors[j].end());
    }
    LossTerms weighted = s.mean_residuals;
    weighted.primal_feasibility *= double(s.count);
    weighted.dual_feasibility *= double(s.count);
    weighted.complementary_slackness *= double(s.count);
    weighted.stationarity *= double(s.count);
    weighted.eq *= double(s.count);
    out.mean_residuals += weighted;
    out.count += s.count;
  }
  if (out.count == 0) throw Error(ErrorCode::kEmptyTestSet, "merge_reports");
  out.mean_residuals /= double(out.count);
  out.rmse.resize(dims);
  for (std::size_t j = 0; j < dims; ++j) {
    std::sort(out.sq_errors[j].begin(), out.sq_errors[j].end());
    double sum = 0.0;
    for (double v : out.sq_errors[j]) sum += v;
    out.rmse[j] = std::sqrt(sum / double(out.count));
  }
  return out;
}

std::vector<std::filesystem::path> emit_cdf_csv(
    const EvalReport& report, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  std::vector<std::filesystem::path> written;
  for (std::size_t j = 0; j < report.components.size(); ++j) {
    const auto path = out_dir / ("cdf_" + report.components[j] + ".csv");
    std::ofstream os = open_out(path);
    os << "sq_error,cdf\n";
    const std::vector<double>& e = report.sq_errors[j];
    const double n = double(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
      os << format_real(e[i]) << ',' << format_real(double(i + 1) / n) << '\n';
    }
    finish(os, path);
    written.push_back(path);
  }
  const auto rmse_path = out_dir / "rmse.csv";
  std::ofstream os = open_out(rmse_path);
  os << "component,rmse\n";
  for (std::size_t j = 0; j < report.components.size(); ++j) {
    os << report.components[j] << ',' << format_real(report.rmse[j]) << '\n';
  }
  finish(os, rmse_path);
  written.push_back(rmse_path);
  return written;
}

std::vector<std::filesystem::path> emit_svg_plots(
    const EvalReport& report, const std::filesystem::path& out_dir,
    const std::vector<CurveRow>* curve) {
  ensure_dir(out_dir);
  std::vector<std::filesystem::path> written;
  for (std::size_t j = 0; j < report.components.size(); ++j) {
    const std::vector<double>& e = report.sq_errors[j];
    const double n = double(e.size());
    Series s{"empirical CDF", "#1f77b4", {}};
    // Right-continuous steps: flat at (i-1)/N up to e_(i), then jump to i/N.
    for (std::size_t i = 0; i < e.size(); ++i) {
      s.points.emplace_back(e[i], double(i) / n);
      s.points.emplace_back(e[i], double(i + 1) / n);
    }
    const auto path = out_dir / ("cdf_" + report.components[j] + ".svg");
    write_svg(path, "CDF of squared error, " + report.components[j],
              "squared error", "CDF", {s});
    written.push_back(path);
  }
  if (curve && !curve->empty()) {
    std::vector<Series> series{{"L_PF", "#1f77b4", {}},  {"L_DF", "#ff7f0e", {}},
                               {"L_CS", "#2ca02c", {}},  {"L_S", "#d62728", {}},
                               {"L_KKT", "#9467bd", {}}, {"L_Data", "#8c564b", {}},
                               {"L_total", "#000000", {}}};
    for (const CurveRow& r : *curve) {
      const double x = r.epoch;
      series[0].points.emplace_back(x, r.terms.primal_feasibility);
      series[1].points.emplace_back(x, r.terms.dual_feasibility);
      series[2].points.emplace_back(x, r.terms.complementary_slackness);
      series[3].points.emplace_back(x, r.terms.stationarity);
      series[4].points.emplace_back(x, r.kkt);
      series[5].points.emplace_back(x, r.data);
      series[6].points.emplace_back(x, r.total);
    }
    const auto path = out_dir / "loss_curve.svg";
    write_svg(path, "Training losses", "epoch", "loss", series);
    written.push_back(path);
  }
  return written;
}

}  // namespace kktnet
