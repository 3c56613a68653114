#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "anoma/codec.hpp"
#include "anoma/config.hpp"
#include "anoma/models.hpp"
#include "anoma/postprocess.hpp"

namespace anoma {

using FittedModel = std::variant<GaussianModel, MemoryBankModel, PcaModel>;

/// Everything inference needs; no config file required.
struct TrainedPipeline {
  TransformSpec transform;
  TilingSpec tiling;
  ExtractorSpec extractor;
  ModelConfig model_config;
  FittedModel model;
  MinMaxStats image_stats;
  MinMaxStats pixel_stats;
  ThresholdMode threshold_mode = ThresholdMode::adaptive;
  double image_threshold = 0.5;
  double pixel_threshold = 0.5;
  std::uint64_t seed = 0;

  ModelKind kind() const;
};

/// Image after the pipeline transform plus its raw anomaly map at that size.
struct Prediction {
  Tensor image;  // [S, S, C]
  AnomalyMapResult result;
};

/// One feature map per tile of an already transformed image (a single map
/// without tiling).
std::vector<FeatureMap> image_features(const Tensor& transformed, const TilingSpec& tiling,
                                       const ExtractorSpec& extractor, const std::string& stem);

FittedModel fit_model(const ModelConfig& config, const std::vector<FeatureMap>& features,
                      std::uint64_t seed);

Tensor score_grid(const FittedModel& model, const FeatureMap& f);

Prediction predict(const TrainedPipeline& pipeline, const ImageBuffer& image,
                   const std::string& stem);

// ANOMDL01 container:
//   "ANOMDL01" | u32 version (1) | u32 len | JSON header | u32 tensor count |
//   per tensor: u32 len | name | ANOTEN01 record
inline constexpr char kModelMagic[] = "ANOMDL01";
inline constexpr std::uint32_t kModelVersion = 1;

Bytes save_model(const TrainedPipeline& pipeline);
TrainedPipeline load_model(std::span<const std::uint8_t> bytes);

}  // namespace anoma
