#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dip3d/pointing_resolver.hpp"
#include "dip3d/scene_simulator.hpp"

namespace dip3d {

enum class Outcome { kCorrect, kWrong, kRejected };

std::string_view to_string(Outcome outcome);

struct EvalRecord {
  std::string frame_id;
  // Ground-truth object whose left-image position is nearest to the
  // predicted pixel. Empty for rejected frames.
  std::optional<int> predicted_index;
  int true_index = -1;
  // Pixel distance from the prediction to the true target's projection.
  std::optional<double> pixel_error;
  Outcome outcome = Outcome::kRejected;
  std::string reject_reason;

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

// Mean and sample (n-1) standard deviation. A single sample reports std 0
// and sets single_sample.
struct ErrorStats {
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
  bool single_sample = false;

  friend bool operator==(const ErrorStats&, const ErrorStats&) = default;
};

// Key of the rejected column in EvalSummary::histogram.
inline constexpr int kRejectedColumn = -1;

struct EvalSummary {
  int count = 0;
  int correct = 0;
  int wrong = 0;
  int rejected = 0;
  double accuracy = 0.0;
  // Over correct and wrong frames.
  std::optional<ErrorStats> pixel_error;
  // Over correct frames only.
  std::optional<ErrorStats> correct_pixel_error;
  // true index -> predicted index (kRejectedColumn for rejections) -> count.
  std::map<int, std::map<int, int>> histogram;

  friend bool operator==(const EvalSummary&, const EvalSummary&) = default;
};

/// Throws IdMismatch when the frame ids differ.
EvalRecord score_frame(const ResolveOutcome& outcome, const GroundTruth& truth);

/// Throws EmptyInput for an empty list. Sums are taken in sorted order so
/// the result does not depend on record order.
ErrorStats error_stats(std::vector<double> values);

/// Throws EmptyInput for an empty record list.
EvalSummary summarize(const std::vector<EvalRecord>& records);

struct SweepCell {
  double depth_m = 0.0;
  double pixel_sigma = 0.0;
  EvalSummary summary;

  friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

/// For every (depth, sigma) pair: move `base` so the diver's shoulder sits at
/// that depth, generate `n_per_cell` scenes from `seed`, resolve, score and
/// summarize. Cells are ordered depth-major.
std::vector<SweepCell> depth_sweep(const SceneSpec& base,
                                   const std::vector<double>& depths,
                                   const std::vector<double>& noise_sigmas,
                                   int n_per_cell, std::uint64_t seed,
                                   const ResolverConfig& cfg = {},
                                   const BatchOptions& batch = {});

std::string serialize_summary(const EvalSummary& summary);
EvalSummary parse_summary(std::string_view document);

std::string serialize_sweep(const std::vector<SweepCell>& cells);
std::vector<SweepCell> parse_sweep(std::string_view document);

// "mean±std (count)" tables.
std::string format_summary_table(const EvalSummary& summary);
std::string format_sweep_table(const std::vector<SweepCell>& cells);

// Relative-frequency bar chart of predicted object per true object.
std::string render_histogram_svg(const EvalSummary& summary,
                                 const std::string& title);

}  // namespace dip3d
