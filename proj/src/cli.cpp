#include "dip3d/cli.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "dip3d/evaluation.hpp"
#include "dip3d/frame_model.hpp"
#include "dip3d/scene_simulator.hpp"
#include "json_util.hpp"

namespace fs = std::filesystem;

namespace dip3d::cli {

using detail::Json;

namespace {

const std::map<std::string, MaskSide> kSideRules = {
    {"auto_from_arm", MaskSide::kAutoFromArm},
    {"keep_left_of_wrist", MaskSide::kKeepLeftOfWrist},
    {"keep_right_of_wrist", MaskSide::kKeepRightOfWrist}};

const std::map<std::string, TieBreak> kTieBreaks = {
    {"closest_z", TieBreak::kClosestZ}, {"lowest_index", TieBreak::kLowestIndex}};

template <typename Map, typename Value>
std::string name_of(const Map& names, Value v) {
  for (const auto& [name, value] : names) {
    if (value == v) return name;
  }
  return "?";
}

template <typename Map>
auto value_of(const Map& names, const std::string& name, const char* field) {
  auto it = names.find(name);
  if (it == names.end()) {
    throw Error(ErrorCode::kValidation, field, "unknown value '" + name + "'");
  }
  return it->second;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, path.string(), "cannot read file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, path.string(), "cannot write file");
  out << content;
  if (!out) throw Error(ErrorCode::kIo, path.string(), "write failed");
}

// Creates `dir` if needed. A non-empty directory is only reused with force.
void prepare_output_dir(const fs::path& dir, bool force) {
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) {
      throw Error(ErrorCode::kIo, dir.string(), "not a directory");
    }
    if (!fs::is_empty(dir) && !force) {
      throw Error(ErrorCode::kIo, dir.string(),
                  "output directory is not empty (use --force)");
    }
  }
  fs::create_directories(dir);
}

std::vector<fs::path> list_with_extension(const fs::path& dir,
                                          const std::string& ext) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, dir.string(), "not a directory");
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ext) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<double> parse_list(const std::string& text, const char* field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, field, "bad number '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::kParse, field, "empty list");
  return out;
}

// Overrides collected from flags; only options given on the command line
// are applied.
struct Overrides {
  CLI::Option* config_path = nullptr;
  std::string config_file;
  double mask_offset = 0.0;
  std::string side_rule;
  double ratio = 0.0;
  double epipolar_tol = 0.0;
  double min_disparity = 0.0;
  double scale_factor = 0.0;
  double z_gap_max = 0.0;
  std::string tie_break;
  bool no_shoulder_filter = false;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::map<std::string, CLI::Option*> given;

  void attach(CLI::App* app) {
    config_path = app->add_option("--config", config_file, "pipeline configuration file");
    given["mask-offset"] = app->add_option("--mask-offset", mask_offset, "mask offset from the wrist (px)");
    given["side-rule"] = app->add_option("--side-rule", side_rule, "auto_from_arm|keep_left_of_wrist|keep_right_of_wrist");
    given["ratio"] = app->add_option("--ratio", ratio, "ratio-test threshold");
    given["epipolar-tol"] = app->add_option("--epipolar-tol", epipolar_tol, "epipolar tolerance (px)");
    given["min-disparity"] = app->add_option("--min-disparity", min_disparity, "minimum disparity (px)");
    given["scale-factor"] = app->add_option("--scale-factor", scale_factor, "pointing extension scale factor");
    given["z-gap-max"] = app->add_option("--z-gap-max", z_gap_max, "maximum keypoint z gap (m)");
    given["tie-break"] = app->add_option("--tie-break", tie_break, "closest_z|lowest_index");
    given["no-shoulder-filter"] = app->add_flag("--no-shoulder-filter", no_shoulder_filter, "make the shoulder optional");
    given["seed"] = app->add_option("--seed", seed, "random seed");
    given["jobs"] = app->add_option("--jobs", jobs, "worker threads");
  }

  bool has(const std::string& name) const { return given.at(name)->count() > 0; }

  PipelineConfig resolve_config() const {
    PipelineConfig cfg;
    if (config_path->count() > 0) cfg = parse_config(read_file(config_file), cfg);
    ResolverConfig& r = cfg.resolver;
    if (has("mask-offset")) r.mask.offset_px = mask_offset;
    if (has("side-rule")) r.mask.side_rule = value_of(kSideRules, side_rule, "mask.side_rule");
    if (has("ratio")) r.match.ratio_threshold = ratio;
    if (has("epipolar-tol")) r.match.epipolar_tolerance_px = epipolar_tol;
    if (has("min-disparity")) r.match.min_disparity_px = min_disparity;
    if (has("scale-factor")) r.pointing.scale_factor = scale_factor;
    if (has("z-gap-max")) r.pointing.z_gap_max = z_gap_max;
    if (has("tie-break")) r.pointing.tie_break = value_of(kTieBreaks, tie_break, "pointing.tie_break");
    if (has("no-shoulder-filter")) r.pointing.shoulder_filter = false;
    if (has("seed")) cfg.seed = seed;
    if (has("jobs")) cfg.jobs = jobs;
    cfg.validate();
    return cfg;
  }
};

int cmd_resolve(const std::string& calib_path,
                const std::vector<std::string>& inputs, const PipelineConfig& cfg,
                const std::string& out_dir, bool force, std::ostream& out,
                std::ostream& err) {
  CalibratedStereoRig rig;
  try {
    rig = parse_calibration(read_file(calib_path));
  } catch (const Error& e) {
    err << "[calibration] " << e.what() << "\n";
    return kExitFatal;
  }

  std::vector<fs::path> frames;
  for (const std::string& input : inputs) {
    if (fs::is_directory(input)) {
      auto found = list_with_extension(input, ".frame");
      frames.insert(frames.end(), found.begin(), found.end());
    } else {
      frames.emplace_back(input);
    }
  }
  if (frames.empty()) {
    err << "[input] no frame files given\n";
    return kExitFatal;
  }

  const ParseOptions parse_options{cfg.resolver.pointing.shoulder_filter};
  const FrameMeta meta = FrameMeta::from_rig(rig);
  std::vector<std::optional<ResolveOutcome>> outcomes(frames.size());
  std::vector<std::string> failures(frames.size());
  parallel_for(frames.size(), cfg.jobs, [&](std::size_t i) {
    Frame frame;
    try {
      frame = parse_frame(read_file(frames[i]), meta, parse_options);
    } catch (const Error& e) {
      failures[i] = "[parse " + frames[i].string() + "] " + e.what();
      return;
    }
    ResolveOutcome outcome = try_resolve(frame, rig, cfg.resolver);
    const auto advisories =
        validate_frame(frame, rig, cfg.resolver.match.epipolar_tolerance_px);
    std::visit(
        [&](auto& o) {
          o.warnings.insert(o.warnings.begin(), advisories.begin(), advisories.end());
        },
        outcome);
    outcomes[i] = std::move(outcome);
  });

  bool fatal = false;
  for (const std::string& f : failures) {
    if (!f.empty()) {
      err << f << "\n";
      fatal = true;
    }
  }
  if (fatal) return kExitFatal;

  std::vector<ResolveOutcome> ordered;
  for (auto& o : outcomes) ordered.push_back(std::move(*o));
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ResolveOutcome& a, const ResolveOutcome& b) {
                     return outcome_frame_id(a) < outcome_frame_id(b);
                   });

  if (!out_dir.empty()) prepare_output_dir(out_dir, force);
  bool any_rejected = false;
  for (const ResolveOutcome& o : ordered) {
    if (const auto* rej = std::get_if<Rejection>(&o)) {
      any_rejected = true;
      err << fmt::format("[{}] {} rejected: {}({}) {}\n", rej->stage, rej->frame_id,
                         to_string(rej->code), rej->detail, rej->message);
    }
    const std::string doc = serialize_outcome(o);
    if (out_dir.empty()) {
      out << doc;
    } else {
      write_file(fs::path(out_dir) / (outcome_frame_id(o) + ".result"), doc);
    }
  }
  return any_rejected ? kExitRejected : kExitOk;
}

int cmd_simulate(const std::string& spec_path, int count, std::uint64_t seed,
                 const std::string& out_dir, bool force,
                 const std::string& calib_out) {
  BatchOptions batch;
  const SceneSpec spec = spec_path.empty()
                             ? default_pool_scene()
                             : parse_scene_spec(read_file(spec_path), &batch);
  const auto scenes = generate_batch(spec, count, seed, batch);
  prepare_output_dir(out_dir, force);
  for (const SimulatedScene& s : scenes) {
    write_file(fs::path(out_dir) / (s.frame.frame_id + ".frame"),
               serialize_frame(s.frame));
    write_file(fs::path(out_dir) / (s.truth.frame_id + ".truth"),
               serialize_truth(s.truth));
  }
  if (!calib_out.empty()) write_file(calib_out, serialize_calibration(spec.rig));
  return kExitOk;
}

int cmd_evaluate(const std::string& results_dir, const std::string& truth_dir,
                 const std::string& out_dir, bool force, bool svg,
                 std::ostream& out, std::ostream& err) {
  std::map<std::string, ResolveOutcome> results;
  for (const fs::path& p : list_with_extension(results_dir, ".result")) {
    ResolveOutcome o = parse_outcome(read_file(p));
    results.emplace(outcome_frame_id(o), std::move(o));
  }
  std::map<std::string, GroundTruth> truths;
  for (const fs::path& p : list_with_extension(truth_dir, ".truth")) {
    GroundTruth t = parse_truth(read_file(p));
    truths.emplace(t.frame_id, std::move(t));
  }
  if (results.empty() || truths.empty()) {
    err << "[evaluate] " << to_string(ErrorCode::kEmptyInput)
        << ": no results or no ground truth found\n";
    return kExitFatal;
  }

  std::vector<std::string> mismatched;
  for (const auto& [id, r] : results) {
    if (!truths.contains(id)) mismatched.push_back(id + " (no truth)");
  }
  for (const auto& [id, t] : truths) {
    if (!results.contains(id)) mismatched.push_back(id + " (no result)");
  }
  if (!mismatched.empty()) {
    err << "[evaluate] " << to_string(ErrorCode::kIdMismatch) << ":\n";
    for (const std::string& m : mismatched) err << "  " << m << "\n";
    return kExitFatal;
  }

  std::vector<EvalRecord> records;
  Json record_docs = Json::array();
  for (const auto& [id, r] : results) {
    EvalRecord rec = score_frame(r, truths.at(id));
    Json j;
    j["frame_id"] = rec.frame_id;
    j["outcome"] = std::string(to_string(rec.outcome));
    j["true_index"] = rec.true_index;
    j["predicted_index"] =
        rec.predicted_index ? Json(*rec.predicted_index) : Json(nullptr);
    j["pixel_error"] = rec.pixel_error ? Json(*rec.pixel_error) : Json(nullptr);
    j["reject_reason"] = rec.reject_reason;
    record_docs.push_back(std::move(j));
    records.push_back(std::move(rec));
  }
  const EvalSummary summary = summarize(records);
  const std::string table = format_summary_table(summary);
  out << table;
  if (!out_dir.empty()) {
    prepare_output_dir(out_dir, force);
    Json report = Json::parse(serialize_summary(summary));
    report["records"] = std::move(record_docs);
    write_file(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
    write_file(fs::path(out_dir) / "table.txt", table);
    if (svg) {
      write_file(fs::path(out_dir) / "histogram.svg",
                 render_histogram_svg(summary, "predicted object per true object"));
    }
  }
  return kExitOk;
}

int cmd_sweep(const std::string& spec_path, const PipelineConfig& cfg,
              const std::vector<double>& depths, const std::vector<double>& sigmas,
              int count, const std::string& out_dir, bool force, bool svg,
              std::ostream& out) {
  BatchOptions batch;
  const SceneSpec spec = spec_path.empty()
                             ? default_pool_scene()
                             : parse_scene_spec(read_file(spec_path), &batch);
  if (count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "count", "must be >= 1");
  }
  std::vector<std::pair<double, double>> grid;
  for (double d : depths) {
    for (double s : sigmas) grid.emplace_back(d, s);
  }
  std::vector<SweepCell> cells(grid.size());
  parallel_for(grid.size(), cfg.jobs, [&](std::size_t i) {
    cells[i] = depth_sweep(spec, {grid[i].first}, {grid[i].second}, count,
                           cfg.seed, cfg.resolver, batch)
                   .front();
  });
  const std::string table = format_sweep_table(cells);
  out << table;
  if (!out_dir.empty()) {
    prepare_output_dir(out_dir, force);
    write_file(fs::path(out_dir) / "sweep.json", serialize_sweep(cells));
    write_file(fs::path(out_dir) / "sweep.txt", table);
    if (svg) {
      for (const SweepCell& c : cells) {
        const std::string name =
            fmt::format("histogram_depth{:.2f}_sigma{:.2f}.svg", c.depth_m, c.pixel_sigma);
        write_file(fs::path(out_dir) / name,
                   render_histogram_svg(
                       c.summary, fmt::format("depth {:.2f} m, sigma {:.2f} px",
                                              c.depth_m, c.pixel_sigma)));
      }
    }
  }
  return kExitOk;
}

}  // namespace

void PipelineConfig::validate() const {
  resolver.validate();
  if (jobs < 1) throw Error(ErrorCode::kValidation, "jobs", "must be >= 1");
}

PipelineConfig parse_config(std::string_view document, const PipelineConfig& base) {
  const Json doc = detail::parse_document(document);
  detail::check_schema_version(doc, kSchemaVersion);
  PipelineConfig cfg = base;
  auto number = [](const Json& obj, const char* section, const char* key, double& dst) {
    if (obj.contains(key)) dst = detail::get_number(obj, key, section);
  };
  auto section = [&](const char* name) -> const Json* {
    auto it = doc.find(name);
    if (it == doc.end() || it->is_null()) return nullptr;
    if (!it->is_object()) throw Error(ErrorCode::kParse, name, "expected an object");
    return &*it;
  };
  if (const Json* m = section("mask")) {
    number(*m, "mask", "offset_px", cfg.resolver.mask.offset_px);
    if (m->contains("side_rule")) {
      cfg.resolver.mask.side_rule = value_of(
          kSideRules, detail::get_string(*m, "side_rule", "mask"), "mask.side_rule");
    }
  }
  if (const Json* m = section("match")) {
    number(*m, "match", "ratio_threshold", cfg.resolver.match.ratio_threshold);
    number(*m, "match", "epipolar_tolerance_px", cfg.resolver.match.epipolar_tolerance_px);
    number(*m, "match", "min_disparity_px", cfg.resolver.match.min_disparity_px);
  }
  if (const Json* p = section("pointing")) {
    number(*p, "pointing", "scale_factor", cfg.resolver.pointing.scale_factor);
    number(*p, "pointing", "z_gap_max", cfg.resolver.pointing.z_gap_max);
    if (p->contains("tie_break")) {
      cfg.resolver.pointing.tie_break =
          value_of(kTieBreaks, detail::get_string(*p, "tie_break", "pointing"),
                   "pointing.tie_break");
    }
    if (p->contains("shoulder_filter")) {
      const Json& v = (*p)["shoulder_filter"];
      if (!v.is_boolean()) {
        throw Error(ErrorCode::kParse, "pointing.shoulder_filter", "expected a boolean");
      }
      cfg.resolver.pointing.shoulder_filter = v.get<bool>();
    }
  }
  if (doc.contains("seed")) {
    const Json& v = doc["seed"];
    if (!v.is_number_integer()) throw Error(ErrorCode::kParse, "seed", "expected an integer");
    cfg.seed = v.get<std::uint64_t>();
  }
  if (doc.contains("jobs")) cfg.jobs = static_cast<int>(detail::get_integer(doc, "jobs"));
  cfg.validate();
  return cfg;
}

std::string serialize_config(const PipelineConfig& config) {
  const ResolverConfig& r = config.resolver;
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["mask"] = {{"offset_px", r.mask.offset_px},
               {"side_rule", name_of(kSideRules, r.mask.side_rule)}};
  j["match"] = {{"ratio_threshold", r.match.ratio_threshold},
                {"epipolar_tolerance_px", r.match.epipolar_tolerance_px},
                {"min_disparity_px", r.match.min_disparity_px}};
  j["pointing"] = {{"scale_factor", r.pointing.scale_factor},
                   {"z_gap_max", r.pointing.z_gap_max},
                   {"tie_break", name_of(kTieBreaks, r.pointing.tie_break)},
                   {"shoulder_filter", r.pointing.shoulder_filter}};
  j["seed"] = config.seed;
  j["jobs"] = config.jobs;
  return j.dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Resolve which object a diver points at from stereo keypoints", "dip3d"};
  app.require_subcommand(1);

  auto* resolve_cmd = app.add_subcommand("resolve", "resolve frame documents");
  Overrides resolve_flags;
  resolve_flags.attach(resolve_cmd);
  std::string calib_path;
  std::vector<std::string> frame_inputs;
  std::string resolve_out;
  bool resolve_force = false;
  resolve_cmd->add_option("--calib", calib_path, "calibration file")->required();
  resolve_cmd->add_option("--out", resolve_out, "directory for result documents");
  resolve_cmd->add_flag("--force", resolve_force, "allow a non-empty --out");
  resolve_cmd->add_option("frames", frame_inputs, "frame files or directories")->required();

  auto* simulate_cmd = app.add_subcommand("simulate", "generate synthetic frames");
  std::string sim_spec;
  int sim_count = 0;
  std::uint64_t sim_seed = 42;
  std::string sim_out;
  std::string sim_calib_out;
  bool sim_force = false;
  simulate_cmd->add_option("--spec", sim_spec, "scene spec (default: built-in pool layout)");
  simulate_cmd->add_option("--count", sim_count, "number of scenes")->required();
  simulate_cmd->add_option("--seed", sim_seed, "random seed");
  simulate_cmd->add_option("--out", sim_out, "output directory")->required();
  simulate_cmd->add_option("--calib-out", sim_calib_out, "also write the rig calibration here");
  simulate_cmd->add_flag("--force", sim_force, "allow a non-empty --out");

  auto* evaluate_cmd = app.add_subcommand("evaluate", "score results against ground truth");
  std::string eval_results;
  std::string eval_truth;
  std::string eval_out;
  bool eval_force = false;
  bool eval_svg = false;
  evaluate_cmd->add_option("--results", eval_results, "directory of .result files")->required();
  evaluate_cmd->add_option("--truth", eval_truth, "directory of .truth files")->required();
  evaluate_cmd->add_option("--out", eval_out, "report directory");
  evaluate_cmd->add_flag("--force", eval_force, "allow a non-empty --out");
  evaluate_cmd->add_flag("--svg", eval_svg, "also write a histogram SVG");

  auto* sweep_cmd = app.add_subcommand("sweep", "depth / noise evaluation grid");
  Overrides sweep_flags;
  sweep_flags.attach(sweep_cmd);
  std::string sweep_spec;
  std::string sweep_depths = "2,4,6";
  std::string sweep_sigmas = "0,1";
  int sweep_count = 1000;
  std::string sweep_out;
  bool sweep_force = false;
  bool sweep_svg = false;
  sweep_cmd->add_option("--spec", sweep_spec, "scene spec (default: built-in pool layout)");
  sweep_cmd->add_option("--depths", sweep_depths, "comma-separated diver depths (m)");
  sweep_cmd->add_option("--sigmas", sweep_sigmas, "comma-separated pixel noise levels");
  sweep_cmd->add_option("--count", sweep_count, "scenes per cell");
  sweep_cmd->add_option("--out", sweep_out, "report directory");
  sweep_cmd->add_flag("--force", sweep_force, "allow a non-empty --out");
  sweep_cmd->add_flag("--svg", sweep_svg, "write one histogram SVG per cell");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "[arguments] " << e.what() << "\n";
    return kExitFatal;
  }

  std::string stage = "config";
  try {
    if (resolve_cmd->parsed()) {
      const PipelineConfig cfg = resolve_flags.resolve_config();
      stage = "resolve";
      return cmd_resolve(calib_path, frame_inputs, cfg, resolve_out, resolve_force,
                         out, err);
    }
    if (simulate_cmd->parsed()) {
      stage = "simulate";
      return cmd_simulate(sim_spec, sim_count, sim_seed, sim_out, sim_force,
                          sim_calib_out);
    }
    if (evaluate_cmd->parsed()) {
      stage = "evaluate";
      return cmd_evaluate(eval_results, eval_truth, eval_out, eval_force, eval_svg,
                          out, err);
    }
    if (sweep_cmd->parsed()) {
      const PipelineConfig cfg = sweep_flags.resolve_config();
      stage = "sweep";
      return cmd_sweep(sweep_spec, cfg, parse_list(sweep_depths, "depths"),
                       parse_list(sweep_sigmas, "sigmas"), sweep_count, sweep_out,
                       sweep_force, sweep_svg, out);
    }
  } catch (const Error& e) {
    err << "[" << stage << "] " << e.what() << "\n";
    return kExitFatal;
  } catch (const std::exception& e) {
    err << "[" << stage << "] " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}

}  // namespace dip3d::cli
