#include "dip3d/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/core.h>

#include "dip3d/errors.hpp"
#include "json_util.hpp"

namespace dip3d {

using detail::Json;

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kCorrect: return "correct";
    case Outcome::kWrong: return "wrong";
    case Outcome::kRejected: return "rejected";
  }
  return "unknown";
}

EvalRecord score_frame(const ResolveOutcome& outcome, const GroundTruth& truth) {
  const std::string& id = outcome_frame_id(outcome);
  if (id != truth.frame_id) {
    throw Error(ErrorCode::kIdMismatch, id,
                "result does not match truth " + truth.frame_id);
  }
  EvalRecord record;
  record.frame_id = id;
  record.true_index = truth.true_selection;
  if (const auto* rej = std::get_if<Rejection>(&outcome)) {
    record.outcome = Outcome::kRejected;
    record.reject_reason = std::string(to_string(rej->code));
    return record;
  }
  const PixelPoint& p = std::get<SelectionResult>(outcome).object_2d_left;
  auto dist = [&](const PixelPoint& q) { return std::hypot(p.x - q.x, p.y - q.y); };

  int nearest = -1;
  double nearest_distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < truth.true_left_pixels.size(); ++k) {
    const double d = dist(truth.true_left_pixels[k]);
    if (d < nearest_distance) {
      nearest_distance = d;
      nearest = static_cast<int>(k);
    }
  }
  record.predicted_index = nearest;
  record.pixel_error =
      dist(truth.true_left_pixels.at(static_cast<std::size_t>(truth.true_selection)));
  record.outcome =
      nearest == truth.true_selection ? Outcome::kCorrect : Outcome::kWrong;
  return record;
}

ErrorStats error_stats(std::vector<double> values) {
  if (values.empty()) {
    throw Error(ErrorCode::kEmptyInput, "pixel_error", "no values");
  }
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  ErrorStats stats;
  stats.count = static_cast<int>(values.size());
  stats.mean = sum / n;
  if (values.size() == 1) {
    stats.single_sample = true;
    return stats;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
  stats.std = std::sqrt(ss / (n - 1.0));
  return stats;
}

EvalSummary summarize(const std::vector<EvalRecord>& records) {
  if (records.empty()) {
    throw Error(ErrorCode::kEmptyInput, "records", "nothing to summarize");
  }
  EvalSummary s;
  s.count = static_cast<int>(records.size());
  std::vector<double> all_errors;
  std::vector<double> correct_errors;
  for (const EvalRecord& r : records) {
    switch (r.outcome) {
      case Outcome::kCorrect: ++s.correct; break;
      case Outcome::kWrong: ++s.wrong; break;
      case Outcome::kRejected: ++s.rejected; break;
    }
    ++s.histogram[r.true_index][r.predicted_index.value_or(kRejectedColumn)];
    if (r.outcome != Outcome::kRejected && r.pixel_error) {
      all_errors.push_back(*r.pixel_error);
      if (r.outcome == Outcome::kCorrect) correct_errors.push_back(*r.pixel_error);
    }
  }
  s.accuracy = static_cast<double>(s.correct) / static_cast<double>(s.count);
  if (!all_errors.empty()) s.pixel_error = error_stats(std::move(all_errors));
  if (!correct_errors.empty()) {
    s.correct_pixel_error = error_stats(std::move(correct_errors));
  }
  return s;
}

std::vector<SweepCell> depth_sweep(const SceneSpec& base,
                                   const std::vector<double>& depths,
                                   const std::vector<double>& noise_sigmas,
                                   int n_per_cell, std::uint64_t seed,
                                   const ResolverConfig& cfg,
                                   const BatchOptions& batch) {
  if (n_per_cell < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n_per_cell", "must be >= 1");
  }
  if (depths.empty() || noise_sigmas.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "depths",
                "need at least one depth and one noise level");
  }
  std::vector<SweepCell> cells;
  for (double depth : depths) {
    for (double sigma : noise_sigmas) {
      SceneSpec spec = place_at_depth(base, depth);
      spec.noise.pixel_sigma = sigma;
      std::vector<EvalRecord> records;
      records.reserve(static_cast<std::size_t>(n_per_cell));
      for (const SimulatedScene& scene :
           generate_batch(spec, n_per_cell, seed, batch)) {
        records.push_back(
            score_frame(try_resolve(scene.frame, spec.rig, cfg), scene.truth));
      }
      cells.push_back({depth, sigma, summarize(records)});
    }
  }
  return cells;
}

namespace {

Json stats_to_json(const std::optional<ErrorStats>& stats) {
  if (!stats) return nullptr;
  return {{"mean", stats->mean},
          {"std", stats->std},
          {"count", stats->count},
          {"single_sample", stats->single_sample}};
}

std::optional<ErrorStats> stats_from_json(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  ErrorStats s;
  s.mean = detail::get_number(*it, "mean", key);
  s.std = detail::get_number(*it, "std", key);
  s.count = static_cast<int>(detail::get_integer(*it, "count", key));
  const Json& single = detail::require(*it, "single_sample", key);
  if (!single.is_boolean()) {
    throw Error(ErrorCode::kParse, detail::join_path(key, "single_sample"),
                "expected a boolean");
  }
  s.single_sample = single.get<bool>();
  return s;
}

Json summary_to_json(const EvalSummary& s) {
  Json j;
  j["count"] = s.count;
  j["correct"] = s.correct;
  j["wrong"] = s.wrong;
  j["rejected"] = s.rejected;
  j["accuracy"] = s.accuracy;
  j["pixel_error"] = stats_to_json(s.pixel_error);
  j["correct_pixel_error"] = stats_to_json(s.correct_pixel_error);
  Json hist = Json::array();
  for (const auto& [truth, row] : s.histogram) {
    Json predicted = Json::array();
    for (const auto& [pred, n] : row) predicted.push_back(Json::array({pred, n}));
    hist.push_back({{"true_index", truth}, {"predicted", std::move(predicted)}});
  }
  j["histogram"] = std::move(hist);
  return j;
}

EvalSummary summary_from_json(const Json& doc) {
  EvalSummary s;
  s.count = static_cast<int>(detail::get_integer(doc, "count"));
  s.correct = static_cast<int>(detail::get_integer(doc, "correct"));
  s.wrong = static_cast<int>(detail::get_integer(doc, "wrong"));
  s.rejected = static_cast<int>(detail::get_integer(doc, "rejected"));
  s.accuracy = detail::get_number(doc, "accuracy");
  s.pixel_error = stats_from_json(doc, "pixel_error");
  s.correct_pixel_error = stats_from_json(doc, "correct_pixel_error");
  for (const Json& row : detail::get_array(doc, "histogram")) {
    const int truth = static_cast<int>(detail::get_integer(row, "true_index", "histogram"));
    auto& out = s.histogram[truth];
    for (const Json& cell : detail::get_array(row, "predicted", "histogram")) {
      if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number_integer() ||
          !cell[1].is_number_integer()) {
        throw Error(ErrorCode::kParse, "histogram.predicted",
                    "expected [index, count]");
      }
      out[cell[0].get<int>()] = cell[1].get<int>();
    }
  }
  return s;
}

std::string format_stats(const std::optional<ErrorStats>& stats) {
  if (!stats) return "-";
  return fmt::format("{:.2f}±{:.2f} ({})", stats->mean, stats->std,
                     stats->count);
}

}  // namespace

std::string serialize_summary(const EvalSummary& summary) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["summary"] = summary_to_json(summary);
  return j.dump(2) + "\n";
}

EvalSummary parse_summary(std::string_view document) {
  const Json doc = detail::parse_document(document);
  detail::check_schema_version(doc, kSchemaVersion);
  return summary_from_json(detail::require(doc, "summary"));
}

std::string serialize_sweep(const std::vector<SweepCell>& cells) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  Json arr = Json::array();
  for (const SweepCell& c : cells) {
    arr.push_back({{"depth_m", c.depth_m},
                   {"pixel_sigma", c.pixel_sigma},
                   {"summary", summary_to_json(c.summary)}});
  }
  j["cells"] = std::move(arr);
  return j.dump(2) + "\n";
}

std::vector<SweepCell> parse_sweep(std::string_view document) {
  const Json doc = detail::parse_document(document);
  detail::check_schema_version(doc, kSchemaVersion);
  std::vector<SweepCell> cells;
  for (const Json& c : detail::get_array(doc, "cells")) {
    cells.push_back({detail::get_number(c, "depth_m", "cells"),
                     detail::get_number(c, "pixel_sigma", "cells"),
                     summary_from_json(detail::require(c, "summary", "cells"))});
  }
  return cells;
}

std::string format_summary_table(const EvalSummary& s) {
  std::string out;
  out += fmt::format("frames {}  correct {}  wrong {}  rejected {}  accuracy {:.4f}\n",
                     s.count, s.correct, s.wrong, s.rejected, s.accuracy);
  out += fmt::format("pixel error, correct frames  {}\n",
                     format_stats(s.correct_pixel_error));
  out += fmt::format("pixel error, all resolved    {}\n", format_stats(s.pixel_error));

  std::set<int> columns;
  for (const auto& [truth, row] : s.histogram) {
    columns.insert(truth);
    for (const auto& [pred, n] : row) columns.insert(pred);
  }
  out += "\nrelative frequency (rows: true object, columns: predicted object)\n";
  out += fmt::format("{:>8}", "true");
  for (int c : columns) {
    out += c == kRejectedColumn ? fmt::format(" {:>9}", "rejected")
                                : fmt::format(" {:>9}", c);
  }
  out += "\n";
  for (const auto& [truth, row] : s.histogram) {
    int total = 0;
    for (const auto& [pred, n] : row) total += n;
    out += fmt::format("{:>8}", truth);
    for (int c : columns) {
      auto it = row.find(c);
      const double freq = it == row.end() ? 0.0 : static_cast<double>(it->second) / total;
      out += fmt::format(" {:>9.3f}", freq);
    }
    out += fmt::format("   ({})\n", total);
  }
  return out;
}

std::string format_sweep_table(const std::vector<SweepCell>& cells) {
  std::string out = fmt::format("{:>8} {:>8} {:>6} {:>9}  {:<28} {}\n", "depth_m",
                                "sigma", "n", "accuracy", "error correct",
                                "error all");
  for (const SweepCell& c : cells) {
    out += fmt::format("{:>8.2f} {:>8.2f} {:>6} {:>9.4f}  {:<28} {}\n", c.depth_m,
                       c.pixel_sigma, c.summary.count, c.summary.accuracy,
                       format_stats(c.summary.correct_pixel_error),
                       format_stats(c.summary.pixel_error));
  }
  return out;
}

std::string render_histogram_svg(const EvalSummary& summary,
                                 const std::string& title) {
  std::set<int> columns;
  for (const auto& [truth, row] : summary.histogram) {
    columns.insert(truth);
    for (const auto& [pred, n] : row) columns.insert(pred);
  }
  const int groups = static_cast<int>(summary.histogram.size());
  const int bars = static_cast<int>(columns.size());
  const double bar_w = 18.0;
  const double group_w = bars * bar_w + 30.0;
  const double plot_h = 200.0;
  const double left = 50.0;
  const double top = 40.0;
  const double width = left + groups * group_w + 20.0;
  const double height = top + plot_h + 60.0;

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" "
      "height=\"{:.0f}\" font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height);
  svg += fmt::format("<text x=\"{:.1f}\" y=\"20\" font-size=\"13\">{}</text>\n",
                     left, title);
  svg += fmt::format(
      "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{2:.1f}\" "
      "stroke=\"black\"/>\n",
      left, top, top + plot_h);
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = top + plot_h - plot_h * tick / 4.0;
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.2f}</text>\n",
        left - 4.0, y + 4.0, tick / 4.0);
  }
  int g = 0;
  for (const auto& [truth, row] : summary.histogram) {
    int total = 0;
    for (const auto& [pred, n] : row) total += n;
    const double gx = left + 10.0 + g * group_w;
    int b = 0;
    for (int c : columns) {
      auto it = row.find(c);
      const double freq =
          it == row.end() || total == 0 ? 0.0 : static_cast<double>(it->second) / total;
      const double h = freq * plot_h;
      const char* colour =
          c == truth ? "#7b3fa0" : (c == kRejectedColumn ? "#999999" : "#e6c229");
      svg += fmt::format(
          "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" "
          "fill=\"{}\"/>\n",
          gx + b * bar_w, top + plot_h - h, bar_w - 2.0, h, colour);
      svg += fmt::format(
          "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
          gx + b * bar_w + bar_w / 2.0 - 1.0, top + plot_h + 14.0,
          c == kRejectedColumn ? std::string("r") : std::to_string(c));
      ++b;
    }
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">true {}</text>\n",
        gx + bars * bar_w / 2.0, top + plot_h + 32.0, truth);
    ++g;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace dip3d
