#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "anoma/datasets.hpp"
#include "anoma/features.hpp"
#include "anoma/postprocess.hpp"
#include "anoma/preprocess.hpp"

namespace anoma {

using Json = nlohmann::json;

enum class DatasetKind { folder, synthetic };
enum class ModelKind { gaussian, coreset_knn, pca_fre };

const char* to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

struct DatasetConfig {
  DatasetKind kind = DatasetKind::synthetic;
  std::filesystem::path path;
  std::string category = "synthetic";
  SyntheticSpec synthetic;
  ValidationSpec validation;
};

struct ModelConfig {
  ModelKind kind = ModelKind::coreset_knn;
  double epsilon = 0.01;
  double coreset_fraction = 0.1;
  double variance_retained = 0.97;
  double smooth_sigma = 4.0;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  TransformSpec transform;
  TilingSpec tiling;
  ExtractorSpec features;
  ModelConfig model;
  ThresholdSpec threshold;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "output";

  void validate() const;
};

/// Strict parse: unknown keys and wrong types are config errors; absent keys
/// take defaults. Runs validate().
ExperimentConfig parse_config(const Json& j);

/// Every field materialized, including defaults.
Json to_json(const ExperimentConfig& config);

SyntheticSpec parse_synthetic_spec(const Json& j);
Json to_json(const SyntheticSpec& spec);

// Section codecs shared with the model file header.
TransformSpec parse_transform(const Json& j);
Json to_json(const TransformSpec& spec);
TilingSpec parse_tiling(const Json& j);
Json to_json(const TilingSpec& spec);
/// `seed` supplies the random_conv filter seed when the section omits one.
ExtractorSpec parse_extractor(const Json& j, std::uint64_t seed);
Json to_json(const ExtractorSpec& spec);

Json load_json_file(const std::filesystem::path& path);

/// Canonical text form: 2-space indent, sorted keys, trailing newline.
std::string dump_json(const Json& j);

}  // namespace anoma
