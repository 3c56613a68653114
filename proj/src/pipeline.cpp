#include "anoma/pipeline.hpp"

#include <algorithm>
#include <cstring>
#include <map>

#include "anoma/error.hpp"
#include "anoma/preprocess.hpp"

namespace anoma {

ModelKind TrainedPipeline::kind() const {
  switch (model.index()) {
    case 0: return ModelKind::gaussian;
    case 1: return ModelKind::coreset_knn;
    default: return ModelKind::pca_fre;
  }
}

std::vector<FeatureMap> image_features(const Tensor& transformed, const TilingSpec& tiling,
                                       const ExtractorSpec& extractor, const std::string& stem) {
  std::vector<FeatureMap> maps;
  if (!tiling.enabled) {
    maps.push_back(extract(transformed, extractor, stem));
    return maps;
  }
  auto [tiles, layout] = tile(transformed, tiling.tile_size, tiling.stride);
  maps.reserve(tiles.size());
  for (const auto& piece : tiles) maps.push_back(extract(piece, extractor, stem));
  return maps;
}

FittedModel fit_model(const ModelConfig& config, const std::vector<FeatureMap>& features,
                      std::uint64_t seed) {
  switch (config.kind) {
    case ModelKind::gaussian:
      return fit_gaussian(features, config.epsilon);
    case ModelKind::coreset_knn:
      return fit_coreset_knn(features, config.coreset_fraction, seed);
    case ModelKind::pca_fre:
      return fit_pca(features, config.variance_retained);
  }
  fail(ErrorKind::config, "unknown model kind");
}

Tensor score_grid(const FittedModel& model, const FeatureMap& f) {
  return std::visit(
      [&](const auto& m) -> Tensor {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, GaussianModel>) {
          return score_gaussian(m, f);
        } else if constexpr (std::is_same_v<M, MemoryBankModel>) {
          return score_knn(m, f);
        } else {
          return score_fre(m, f);
        }
      },
      model);
}

Prediction predict(const TrainedPipeline& pipeline, const ImageBuffer& image,
                   const std::string& stem) {
  Prediction out;
  out.image = apply_transform(image_to_tensor(image), pipeline.transform);
  const std::size_t h = out.image.dim(0);
  const std::size_t w = out.image.dim(1);
  const double sigma = pipeline.model_config.smooth_sigma;
  if (!pipeline.tiling.enabled) {
    const FeatureMap f = extract(out.image, pipeline.extractor, stem);
    out.result = assemble_anomaly_map(score_grid(pipeline.model, f), {h, w}, sigma);
    return out;
  }
  auto [tiles, layout] = tile(out.image, pipeline.tiling.tile_size, pipeline.tiling.stride);
  std::vector<Tensor> tile_maps;
  tile_maps.reserve(tiles.size());
  for (const auto& piece : tiles) {
    const FeatureMap f = extract(piece, pipeline.extractor, stem);
    tile_maps.push_back(assemble_anomaly_map(score_grid(pipeline.model, f),
                                             {layout.tile_size, layout.tile_size}, 0.0)
                            .pixel_map);
  }
  Tensor raw = untile(tile_maps, layout);
  out.result.image_score = *std::max_element(raw.values().begin(), raw.values().end());
  out.result.pixel_map = gaussian_blur(raw, sigma);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

using NamedTensors = std::vector<std::pair<std::string, const Tensor*>>;

Json stats_json(const MinMaxStats& s) { return Json{{"min", s.min}, {"max", s.max}}; }

MinMaxStats stats_from(const Json& j) {
  return MinMaxStats{j.at("min").get<double>(), j.at("max").get<double>()};
}

const Tensor& require(const std::map<std::string, Tensor>& tensors, const std::string& name) {
  auto it = tensors.find(name);
  if (it == tensors.end()) fail(ErrorKind::format, "missing tensor '" + name + "'");
  return it->second;
}

}  // namespace

Bytes save_model(const TrainedPipeline& p) {
  Json model{{"kind", to_string(p.kind())},
             {"epsilon", p.model_config.epsilon},
             {"coreset_fraction", p.model_config.coreset_fraction},
             {"variance_retained", p.model_config.variance_retained},
             {"smooth_sigma", p.model_config.smooth_sigma}};
  NamedTensors tensors;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, GaussianModel>) {
          tensors = {{"mean", &m.mean}, {"covariance", &m.covariance}};
        } else if constexpr (std::is_same_v<M, MemoryBankModel>) {
          model["init_index"] = m.init_index;
          model["neighbor_count"] = m.neighbor_count;
          tensors = {{"bank", &m.bank}};
        } else {
          model["rank"] = m.rank();
          tensors = {{"mean", &m.mean}, {"components", &m.components}, {"eigenvalues", &m.eigenvalues}};
        }
      },
      p.model);
  const Json header{
      {"model", model},
      {"extractor", to_json(p.extractor)},
      {"transform", to_json(p.transform)},
      {"tiling", to_json(p.tiling)},
      {"normalization", {{"image", stats_json(p.image_stats)}, {"pixel", stats_json(p.pixel_stats)}}},
      {"threshold",
       {{"mode", p.threshold_mode == ThresholdMode::adaptive ? "adaptive" : "manual"},
        {"image", p.image_threshold},
        {"pixel", p.pixel_threshold}}},
      {"seed", p.seed}};
  const std::string text = header.dump();

  Bytes out(kModelMagic, kModelMagic + 8);
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, tensor] : tensors) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    const Bytes body = tensor_write(*tensor);
    out.insert(out.end(), body.begin(), body.end());
  }
  return out;
}

TrainedPipeline load_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kModelMagic, 8) != 0) {
    fail(ErrorKind::format, "not an ANOMDL01 file");
  }
  std::size_t offset = 8;
  const std::uint32_t version = get_u32(bytes, offset, "version");
  if (version != kModelVersion) {
    fail(ErrorKind::format, "unsupported ANOMDL01 version " + std::to_string(version));
  }
  const std::uint32_t header_len = get_u32(bytes, offset, "header length");
  if (bytes.size() - offset < header_len) fail(ErrorKind::format, "truncated header");
  Json header;
  try {
    header = Json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                         bytes.begin() + static_cast<std::ptrdiff_t>(offset + header_len));
  } catch (const Json::parse_error&) {
    fail(ErrorKind::format, "model header is not valid JSON");
  }
  offset += header_len;
  const std::uint32_t count = get_u32(bytes, offset, "tensor count");
  std::map<std::string, Tensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = get_u32(bytes, offset, "tensor name length");
    if (bytes.size() - offset < name_len) fail(ErrorKind::format, "truncated tensor name");
    std::string name(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                     bytes.begin() + static_cast<std::ptrdiff_t>(offset + name_len));
    offset += name_len;
    tensors[name] = tensor_read_at(bytes, offset);
  }
  if (offset != bytes.size()) fail(ErrorKind::format, "trailing bytes after model tensors");

  TrainedPipeline p;
  try {
    const Json& model = header.at("model");
    p.seed = header.at("seed").get<std::uint64_t>();
    p.transform = parse_transform(header.at("transform"));
    p.tiling = parse_tiling(header.at("tiling"));
    p.extractor = parse_extractor(header.at("extractor"), p.seed);
    p.model_config.kind = parse_model_kind(model.at("kind").get<std::string>());
    p.model_config.epsilon = model.at("epsilon").get<double>();
    p.model_config.coreset_fraction = model.at("coreset_fraction").get<double>();
    p.model_config.variance_retained = model.at("variance_retained").get<double>();
    p.model_config.smooth_sigma = model.at("smooth_sigma").get<double>();
    p.image_stats = stats_from(header.at("normalization").at("image"));
    p.pixel_stats = stats_from(header.at("normalization").at("pixel"));
    const Json& threshold = header.at("threshold");
    p.threshold_mode = threshold.at("mode").get<std::string>() == "manual" ? ThresholdMode::manual
                                                                          : ThresholdMode::adaptive;
    p.image_threshold = threshold.at("image").get<double>();
    p.pixel_threshold = threshold.at("pixel").get<double>();

    switch (p.model_config.kind) {
      case ModelKind::gaussian: {
        GaussianModel m;
        m.epsilon = p.model_config.epsilon;
        m.mean = require(tensors, "mean");
        m.covariance = require(tensors, "covariance");
        const auto& md = m.mean.dims();
        const auto& cd = m.covariance.dims();
        if (md.size() != 3 || cd.size() != 4 || cd[0] != md[0] || cd[1] != md[1] || cd[2] != md[2] ||
            cd[3] != md[2]) {
          fail(ErrorKind::format, "gaussian tensors have inconsistent extents");
        }
        m.factorize();
        p.model = std::move(m);
        break;
      }
      case ModelKind::coreset_knn: {
        MemoryBankModel m;
        m.coreset_fraction = p.model_config.coreset_fraction;
        m.init_index = model.at("init_index").get<std::size_t>();
        m.neighbor_count = model.at("neighbor_count").get<std::size_t>();
        m.bank = require(tensors, "bank");
        if (m.bank.rank() != 2) fail(ErrorKind::format, "memory bank must be rank 2");
        p.model = std::move(m);
        break;
      }
      case ModelKind::pca_fre: {
        PcaModel m;
        m.variance_retained = p.model_config.variance_retained;
        m.mean = require(tensors, "mean");
        m.components = require(tensors, "components");
        m.eigenvalues = require(tensors, "eigenvalues");
        if (m.components.rank() != 2 || m.mean.rank() != 1 || m.mean.dim(0) != m.components.dim(1)) {
          fail(ErrorKind::format, "PCA tensors have inconsistent extents");
        }
        p.model = std::move(m);
        break;
      }
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::format, std::string("model header field missing or mistyped: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::format) throw;
    fail(ErrorKind::format, std::string("model header invalid: ") + e.what());
  }
  return p;
}

}  // namespace anoma
