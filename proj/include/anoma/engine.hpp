#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "anoma/config.hpp"
#include "anoma/metrics.hpp"
#include "anoma/pipeline.hpp"

namespace anoma {

/// Scans or generates the dataset and applies the validation split.
std::vector<Sample> load_dataset(const DatasetConfig& config, std::uint64_t seed);

/// Ground-truth mask resized to size x size and binarized (1 = defective).
Tensor load_mask(const Sample& sample, std::size_t source_h, std::size_t source_w, std::size_t size);

struct TrainResult {
  TrainedPipeline pipeline;
  double train_time_s = 0.0;
};

/// Fits the pipeline, calibrates normalization and thresholds on the validation
/// split, and writes output_dir/{model.anomdl, config.resolved.json}.
TrainResult run_train(const ExperimentConfig& config);

/// Scores the test split of config.dataset with a saved model; writes
/// output_dir/metrics.json and output_dir/visualizations/.
MetricsReport run_test(const std::filesystem::path& model_file, const ExperimentConfig& config);

Json to_json(const MetricsReport& report);

struct InferSummary {
  std::size_t succeeded = 0;
  std::size_t failed = 0;
};

/// One JSON line per input on `out`: a prediction record or an error record.
InferSummary run_infer(const std::filesystem::path& model_file,
                       const std::vector<std::filesystem::path>& images,
                       const std::filesystem::path& out_dir, std::ostream& out);

inline constexpr const char* kModelFileName = "model.anomdl";
inline constexpr const char* kResolvedConfigName = "config.resolved.json";
inline constexpr const char* kMetricsFileName = "metrics.json";

}  // namespace anoma
