#include "anoma/engine.hpp"

#include <algorithm>
#include <chrono>
#include <ostream>

#include "anoma/codec.hpp"
#include "anoma/error.hpp"
#include "anoma/preprocess.hpp"
#include "anoma/rng.hpp"

namespace fs = std::filesystem;

namespace anoma {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Prefixes module errors with the pipeline stage that raised them.
template <class F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create " + dir.string() + ": " + ec.message());
}

struct Scored {
  std::vector<float> image_scores;
  std::vector<int> labels;
  std::vector<Tensor> maps;
  std::vector<std::optional<Tensor>> masks;
  std::vector<Tensor> images;
};

Scored score_samples(const TrainedPipeline& pipeline, const std::vector<const Sample*>& samples) {
  Scored s;
  for (const Sample* sample : samples) {
    const ImageBuffer image = stage("dataset", [&] { return sample->image.load(); });
    Prediction pred = stage("predict", [&] { return predict(pipeline, image, sample->stem); });
    s.image_scores.push_back(pred.result.image_score);
    s.labels.push_back(sample->label == Label::anomalous ? 1 : 0);
    if (sample->mask) {
      s.masks.push_back(stage("dataset", [&] {
        return load_mask(*sample, image.height, image.width, pipeline.transform.target_size);
      }));
    } else {
      s.masks.emplace_back();
    }
    s.maps.push_back(std::move(pred.result.pixel_map));
    s.images.push_back(std::move(pred.image));
  }
  return s;
}

std::vector<const Sample*> select(const std::vector<Sample>& samples, Split split) {
  std::vector<const Sample*> out;
  for (const auto& s : samples) {
    if (s.split == split) out.push_back(&s);
  }
  return out;
}

// Pooled pixels with their ground-truth labels; samples without a mask count as
// all-normal when they are normal and are skipped otherwise.
void pooled_pixels(const Scored& s, const MinMaxStats* stats, std::vector<float>& values,
                   std::vector<int>& labels) {
  for (std::size_t i = 0; i < s.maps.size(); ++i) {
    if (!s.masks[i] && s.labels[i] == 1) continue;
    const Tensor& map = s.maps[i];
    for (std::size_t p = 0; p < map.size(); ++p) {
      values.push_back(stats ? static_cast<float>(normalize(map[p], *stats)) : map[p]);
      labels.push_back(s.masks[i] && (*s.masks[i])[p] != 0.0f ? 1 : 0);
    }
  }
}

}  // namespace

std::vector<Sample> load_dataset(const DatasetConfig& config, std::uint64_t seed) {
  return stage("dataset", [&] {
    std::vector<Sample> samples;
    if (config.kind == DatasetKind::folder) {
      samples = scan_folder_dataset(config.path, config.category);
    } else {
      samples = generate_synthetic(config.synthetic, config.category);
    }
    return make_validation_split(samples, config.validation, seed);
  });
}

Tensor load_mask(const Sample& sample, std::size_t source_h, std::size_t source_w, std::size_t size) {
  const ImageBuffer mask = sample.mask->load();
  if (mask.height != source_h || mask.width != source_w) {
    fail(ErrorKind::pairing, "mask extents differ from image for " + sample.stem);
  }
  Tensor t = image_to_tensor(mask);
  if (mask.channels == 3) t = to_grayscale(t);
  t = t.reshaped({mask.height, mask.width});
  if (t.dim(0) != size || t.dim(1) != size) t = resize_bilinear(t, size, size);
  for (auto& v : t.data()) v = v >= 0.5f ? 1.0f : 0.0f;
  return t;
}

TrainResult run_train(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const std::vector<Sample> samples =
      load_dataset(config.dataset, derive_seed(config.seed, "dataset.validation"));

  std::vector<FeatureMap> train_features;
  for (const Sample* s : select(samples, Split::train)) {
    const ImageBuffer image = stage("dataset", [&] { return s->image.load(); });
    stage("features", [&] {
      const Tensor transformed = apply_transform(image_to_tensor(image), config.transform);
      for (auto& f : image_features(transformed, config.tiling, config.features, s->stem)) {
        train_features.push_back(std::move(f));
      }
      return 0;
    });
  }

  TrainedPipeline pipeline;
  pipeline.transform = config.transform;
  pipeline.tiling = config.tiling;
  pipeline.extractor = config.features;
  pipeline.model_config = config.model;
  pipeline.seed = config.seed;
  pipeline.threshold_mode = config.threshold.mode;
  pipeline.model = stage("model", [&] {
    return fit_model(config.model, train_features, derive_seed(config.seed, "model.coreset"));
  });
  train_features.clear();

  const auto validation = select(samples, Split::validation);
  if (validation.empty()) fail(ErrorKind::config, "postprocess: validation split is empty");
  const Scored val = score_samples(pipeline, validation);

  stage("postprocess", [&] {
    pipeline.image_stats = fit_minmax(val.image_scores);
    std::vector<float> pixels;
    for (const auto& m : val.maps) pixels.insert(pixels.end(), m.values().begin(), m.values().end());
    pipeline.pixel_stats = fit_minmax(pixels);
    pixels.clear();

    if (config.threshold.mode == ThresholdMode::manual) {
      pipeline.image_threshold = config.threshold.value;
      pipeline.pixel_threshold = config.threshold.value;
      return 0;
    }
    std::vector<float> normalized(val.image_scores.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
      normalized[i] = static_cast<float>(normalize(val.image_scores[i], pipeline.image_stats));
    }
    pipeline.image_threshold = adaptive_threshold(normalized, val.labels);

    std::vector<float> norm_pixels;
    std::vector<int> pixel_labels;
    pooled_pixels(val, &pipeline.pixel_stats, norm_pixels, pixel_labels);
    const bool has_defect_pixels =
        std::find(pixel_labels.begin(), pixel_labels.end(), 1) != pixel_labels.end();
    pipeline.pixel_threshold =
        has_defect_pixels ? adaptive_threshold(norm_pixels, pixel_labels) : pipeline.image_threshold;
    return 0;
  });

  TrainResult result{std::move(pipeline), 0.0};
  stage("output", [&] {
    ensure_dir(config.output_dir);
    write_file(config.output_dir / kModelFileName, save_model(result.pipeline));
    write_text(config.output_dir / kResolvedConfigName, dump_json(to_json(config)));
    return 0;
  });
  result.train_time_s = seconds_since(start);
  return result;
}

Json to_json(const MetricsReport& report) {
  Json j = Json::object();
  auto put = [&](const char* key, const std::optional<double>& v) {
    if (v) j[key] = *v;
  };
  put("image_auroc", report.image_auroc);
  put("pixel_auroc", report.pixel_auroc);
  put("image_f1_at_threshold", report.image_f1_at_threshold);
  put("aupro", report.aupro);
  put("train_time_s", report.train_time_s);
  put("infer_ms_per_image", report.infer_ms_per_image);
  j["warnings"] = report.warnings;
  return j;
}

MetricsReport run_test(const fs::path& model_file, const ExperimentConfig& config) {
  const TrainedPipeline pipeline = stage("model", [&] { return load_model(read_file(model_file)); });
  const std::vector<Sample> samples =
      load_dataset(config.dataset, derive_seed(pipeline.seed, "dataset.validation"));
  const auto test = select(samples, Split::test);
  if (test.empty()) fail(ErrorKind::config, "dataset: test split is empty");

  const auto start = Clock::now();
  const Scored scored = score_samples(pipeline, test);
  const double infer_ms = seconds_since(start) * 1000.0 / static_cast<double>(test.size());

  MetricsReport report;
  report.infer_ms_per_image = infer_ms;
  const bool has_pos = std::find(scored.labels.begin(), scored.labels.end(), 1) != scored.labels.end();
  const bool has_neg = std::find(scored.labels.begin(), scored.labels.end(), 0) != scored.labels.end();
  stage("metrics", [&] {
    if (has_pos && has_neg) {
      report.image_auroc = roc_auc(scored.image_scores, scored.labels);
    } else {
      report.warnings.push_back("image_auroc omitted: test set is single-class");
    }
    std::vector<float> normalized(scored.image_scores.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
      normalized[i] = static_cast<float>(normalize(scored.image_scores[i], pipeline.image_stats));
    }
    report.image_f1_at_threshold = pr_f1(normalized, scored.labels, pipeline.image_threshold).f1;

    bool masks_complete = has_pos;
    for (std::size_t i = 0; i < scored.labels.size(); ++i) {
      if (scored.labels[i] == 1 && !scored.masks[i]) masks_complete = false;
    }
    std::vector<float> pixels;
    std::vector<int> pixel_labels;
    if (masks_complete) pooled_pixels(scored, nullptr, pixels, pixel_labels);
    const bool has_defect_pixels =
        std::find(pixel_labels.begin(), pixel_labels.end(), 1) != pixel_labels.end();
    const bool has_normal_pixels =
        std::find(pixel_labels.begin(), pixel_labels.end(), 0) != pixel_labels.end();
    if (masks_complete && has_defect_pixels && has_normal_pixels) {
      report.pixel_auroc = roc_auc(pixels, pixel_labels);
      std::vector<Tensor> masks;
      for (std::size_t i = 0; i < scored.maps.size(); ++i) {
        masks.push_back(scored.masks[i] ? *scored.masks[i] : Tensor(scored.maps[i].dims(), 0.0f));
      }
      report.aupro = aupro(scored.maps, masks);
    } else {
      report.warnings.push_back("pixel metrics omitted: test set lacks ground-truth masks");
    }
    return 0;
  });

  stage("output", [&] {
    const fs::path vis = config.output_dir / "visualizations";
    for (std::size_t i = 0; i < test.size(); ++i) {
      const fs::path dir = vis / test[i]->defect_type;
      ensure_dir(dir);
      const Tensor map01 = normalize_map(scored.maps[i], pipeline.pixel_stats);
      const std::string& stem = test[i]->stem;
      write_image(dir / (stem + "_heatmap.ppm"), render_heatmap(map01));
      write_image(dir / (stem + "_overlay.ppm"), render_overlay(tensor_to_image(scored.images[i]), map01));
      write_image(dir / (stem + "_mask.pgm"), render_mask(map01, pipeline.pixel_threshold));
    }
    write_text(config.output_dir / kMetricsFileName, dump_json(to_json(report)));
    return 0;
  });
  return report;
}

InferSummary run_infer(const fs::path& model_file, const std::vector<fs::path>& images,
                       const fs::path& out_dir, std::ostream& out) {
  const TrainedPipeline pipeline = stage("model", [&] { return load_model(read_file(model_file)); });
  ensure_dir(out_dir);
  InferSummary summary;
  for (const auto& path : images) {
    try {
      const ImageBuffer image = read_image(path);
      const std::string stem = path.stem().string();
      const Prediction pred = predict(pipeline, image, stem);
      const double normalized = normalize(pred.result.image_score, pipeline.image_stats);
      const Tensor map01 = normalize_map(pred.result.pixel_map, pipeline.pixel_stats);
      const fs::path map_path = out_dir / (stem + "_anomaly_map.anoten");
      const fs::path heatmap_path = out_dir / (stem + "_heatmap.ppm");
      const fs::path overlay_path = out_dir / (stem + "_overlay.ppm");
      const fs::path mask_path = out_dir / (stem + "_mask.pgm");
      write_file(map_path, tensor_write(pred.result.pixel_map));
      write_image(heatmap_path, render_heatmap(map01));
      write_image(overlay_path, render_overlay(tensor_to_image(pred.image), map01));
      write_image(mask_path, render_mask(map01, pipeline.pixel_threshold));
      const Json record{{"path", path.string()},
                        {"raw_score", pred.result.image_score},
                        {"normalized_score", normalized},
                        {"label", normalized >= pipeline.image_threshold ? "anomalous" : "normal"},
                        {"anomaly_map", map_path.string()},
                        {"heatmap", heatmap_path.string()},
                        {"overlay", overlay_path.string()},
                        {"mask", mask_path.string()}};
      out << record.dump() << '\n';
      ++summary.succeeded;
    } catch (const Error& e) {
      out << Json{{"path", path.string()}, {"error", e.what()}}.dump() << '\n';
      ++summary.failed;
    }
  }
  out.flush();
  return summary;
}

}  // namespace anoma
