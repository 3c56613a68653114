#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "anoma/config.hpp"
#include "anoma/rng.hpp"

namespace anoma {

/// Sets `value` at a dot path, creating objects as needed. When both the
/// existing value and `value` are objects they are merge-patched, so an axis can
/// override a whole section (e.g. "dataset") with a partial object.
void set_path(Json& root, const std::string& path, const Json& value);

/// True when every segment of `path` names an existing key.
bool has_path(const Json& root, const std::string& path);

struct GridAxis {
  std::string path;
  std::vector<Json> values;
};

struct GridSpec {
  Json base;
  std::vector<GridAxis> axes;  // declaration order
  std::vector<std::uint64_t> seeds;
};

/// Expects {"base": {...}, "axes": {"path": [values...], ...}, "seeds": [...]}.
/// Axis order is taken from the document text.
GridSpec parse_grid(const std::string& text);

/// Cartesian product in lexicographic order of axis indices, last axis fastest.
std::vector<std::vector<std::size_t>> grid_cells(const GridSpec& grid);

inline constexpr const char* kBenchmarkHeader =
    "model,category,seed,image_auroc,pixel_auroc,image_f1,aupro,train_time_s,"
    "infer_ms_per_image,error,params";

struct BenchmarkSummary {
  std::size_t runs = 0;
  std::size_t failures = 0;
};

/// Train and test every cell x seed; one CSV row per run, written in order.
/// Per-run artifacts go under work_dir/runs/.
BenchmarkSummary run_benchmark(const GridSpec& grid, const std::filesystem::path& out_csv,
                               const std::filesystem::path& work_dir);

struct SweepParameter {
  std::string path;
  std::vector<Json> choices;  // non-empty for list parameters
  bool is_range = false;
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;
  bool integer = false;  // both bounds integral on a linear scale
};

struct SweepSpec {
  Json base;
  std::vector<SweepParameter> parameters;  // declaration order
  std::string metric = "image_auroc";
  std::size_t max_trials = 10;
  std::uint64_t seed = 0;
};

SweepSpec parse_sweep(const std::string& text);

Json draw_parameter(const SweepParameter& parameter, Rng& rng);

/// Parameter values of trial `index`; each trial owns an independent stream.
std::vector<Json> draw_trial(const SweepSpec& sweep, std::size_t index);

struct HpoResult {
  std::optional<std::size_t> best_trial;
  double best_metric = 0.0;
  Json best_config;
  std::size_t failures = 0;
};

/// Random search; trial log to out_csv, best resolved config to
/// out_csv's directory as best.config.json. Trial artifacts go under work_dir/trials/.
HpoResult run_hpo(const SweepSpec& sweep, const std::filesystem::path& out_csv,
                  const std::filesystem::path& work_dir);

/// RFC-4180 quoting when the field contains a comma, quote or newline.
std::string csv_field(const std::string& text);

/// %.6g
std::string format_metric(double v);

}  // namespace anoma
