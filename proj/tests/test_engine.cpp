#include "doctest.h"

#include <sstream>

#include "anoma/codec.hpp"
#include "anoma/engine.hpp"
#include "anoma/error.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace anoma;
namespace fs = std::filesystem;

TEST_CASE("config: defaults, strictness, round trip") {
  const ExperimentConfig d = parse_config(Json::object());
  CHECK(d.model.kind == ModelKind::coreset_knn);
  CHECK(d.model.epsilon == 0.01);
  CHECK(d.model.smooth_sigma == 4.0);
  CHECK(d.dataset.validation.mode == ValidationMode::reuse_test);
  CHECK_THROWS_AS(parse_config(Json{{"modle", Json::object()}}), Error);
  CHECK_THROWS_AS(parse_config(Json{{"model", {{"kind", "bogus"}}}}), Error);
  CHECK_THROWS_AS(parse_config(Json{{"seed", -1}}), Error);
  const Json full = to_json(parse_config(fixture::small_config("x")));
  CHECK(to_json(parse_config(full)) == full);
}

TEST_CASE("train/test on a small synthetic set") {
  const auto dir = oracle::temp_dir("engine_train");
  const ExperimentConfig cfg = parse_config(fixture::small_config(dir / "out"));
  const TrainResult tr = run_train(cfg);
  CHECK(fs::exists(dir / "out" / kModelFileName));
  CHECK(fs::exists(dir / "out" / kResolvedConfigName));
  CHECK(tr.train_time_s >= 0.0);
  const MetricsReport r = run_test(dir / "out" / kModelFileName, cfg);
  CHECK(r.image_auroc.has_value());
  CHECK(r.pixel_auroc.has_value());
  CHECK(r.image_f1_at_threshold.has_value());
  CHECK(r.aupro.has_value());
  CHECK(fs::exists(dir / "out" / kMetricsFileName));
  CHECK(fs::exists(dir / "out/visualizations/defect"));
  CHECK(fs::exists(dir / "out/visualizations/good"));
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "out/visualizations")) files += e.is_regular_file();
  CHECK(files == 3 * 8);
}

TEST_CASE("train is byte-deterministic; resolved config reproduces the model") {
  const auto dir = oracle::temp_dir("engine_det");
  for (const char* model : {"gaussian", "coreset_knn", "pca_fre"}) {
    const ExperimentConfig a = parse_config(fixture::small_config(dir / "a", model));
    const ExperimentConfig b = parse_config(fixture::small_config(dir / "b", model));
    run_train(a);
    run_train(b);
    CHECK(read_file(dir / "a" / kModelFileName) == read_file(dir / "b" / kModelFileName));
    run_test(dir / "a" / kModelFileName, a);
    run_test(dir / "b" / kModelFileName, b);
    CHECK(fixture::without_timing(dir / "a" / kMetricsFileName) == fixture::without_timing(dir / "b" / kMetricsFileName));

    Json resolved = load_json_file(dir / "a" / kResolvedConfigName);
    resolved["output_dir"] = (dir / "c").string();
    run_train(parse_config(resolved));
    CHECK(read_file(dir / "a" / kModelFileName) == read_file(dir / "c" / kModelFileName));
  }
}

TEST_CASE("metrics.json layout") {
  const auto dir = oracle::temp_dir("engine_metrics");
  const ExperimentConfig cfg = parse_config(fixture::small_config(dir));
  run_train(cfg);
  run_test(dir / kModelFileName, cfg);
  const Json m = load_json_file(dir / kMetricsFileName);
  CHECK_FALSE(m.contains("train_time_s"));
  CHECK(m.contains("infer_ms_per_image"));
  CHECK(m["warnings"].is_array());
}

TEST_CASE("manual threshold is echoed") {
  const auto dir = oracle::temp_dir("engine_manual");
  Json j = fixture::small_config(dir);
  j["postprocess"] = {{"threshold", {{"mode", "manual"}, {"value", 0.42}}}};
  const TrainResult tr = run_train(parse_config(j));
  CHECK(tr.pipeline.image_threshold == 0.42);
  CHECK(tr.pipeline.pixel_threshold == 0.42);
}

TEST_CASE("gaussian with a single training image fails in the model stage") {
  const auto dir = oracle::temp_dir("engine_one");
  Json j = fixture::small_config(dir, "gaussian");
  j["dataset"]["synthetic"]["n_train"] = 1;
  try {
    run_train(parse_config(j));
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("model: need ≥ 2 training maps") != std::string::npos);
  }
}

TEST_CASE("folder dataset without masks: pixel metrics absent") {
  const auto dir = oracle::temp_dir("engine_nomask");
  SyntheticSpec spec;
  spec.n_train = 8;
  spec.n_test_normal = 3;
  spec.n_test_anomalous = 3;
  spec.image_size = 32;
  write_synthetic_dataset(generate_synthetic(spec, "c"), dir / "data/c");
  fs::remove_all(dir / "data/c/ground_truth");
  Json j = fixture::small_config(dir / "out");
  j["dataset"] = {{"kind", "folder"}, {"path", (dir / "data").string()}, {"category", "c"}};
  const ExperimentConfig cfg = parse_config(j);
  run_train(cfg);
  const MetricsReport r = run_test(dir / "out" / kModelFileName, cfg);
  CHECK(r.image_auroc.has_value());
  CHECK(r.image_f1_at_threshold.has_value());
  CHECK_FALSE(r.pixel_auroc.has_value());
  CHECK_FALSE(r.aupro.has_value());
}

TEST_CASE("single-class test set: image_auroc omitted with a warning") {
  const auto dir = oracle::temp_dir("engine_oneclass");
  SyntheticSpec spec;
  spec.n_train = 8;
  spec.n_test_normal = 3;
  spec.n_test_anomalous = 3;
  spec.image_size = 32;
  write_synthetic_dataset(generate_synthetic(spec, "c"), dir / "data/c");
  fs::remove_all(dir / "data/c/test/defect");
  fs::remove_all(dir / "data/c/ground_truth");
  Json j = fixture::small_config(dir / "out");
  j["dataset"] = {{"kind", "folder"}, {"path", (dir / "data").string()}, {"category", "c"}};
  j["postprocess"] = {{"threshold", {{"mode", "manual"}, {"value", 0.5}}}};
  const ExperimentConfig cfg = parse_config(j);
  run_train(cfg);
  const MetricsReport r = run_test(dir / "out" / kModelFileName, cfg);
  CHECK_FALSE(r.image_auroc.has_value());
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("run_infer: records, error record, determinism") {
  const auto dir = oracle::temp_dir("engine_infer");
  const ExperimentConfig cfg = parse_config(fixture::small_config(dir / "model"));
  run_train(cfg);
  ImageBuffer img(32, 32, 1, 120);
  write_image(dir / "a.pgm", img);
  write_image(dir / "b.pgm", img);
  std::ostringstream out1, out2;
  const auto s1 = run_infer(dir / "model" / kModelFileName, {dir / "a.pgm", dir / "missing.pgm", dir / "b.pgm"},
                            dir / "o1", out1);
  CHECK(s1.succeeded == 2);
  CHECK(s1.failed == 1);
  std::istringstream lines(out1.str());
  std::string line;
  int records = 0, errors = 0;
  while (std::getline(lines, line)) {
    const Json j = Json::parse(line);
    if (j.contains("error")) {
      ++errors;
    } else {
      ++records;
      CHECK(j.contains("raw_score"));
      CHECK(j.contains("normalized_score"));
      CHECK(j.contains("label"));
      CHECK(fs::exists(j["anomaly_map"].get<std::string>()));
    }
  }
  CHECK(records == 2);
  CHECK(errors == 1);
  run_infer(dir / "model" / kModelFileName, {dir / "a.pgm"}, dir / "o2", out2);
  CHECK(read_file(dir / "o1/a_anomaly_map.anoten") == read_file(dir / "o2/a_anomaly_map.anoten"));
  CHECK(read_file(dir / "o1/a_heatmap.ppm") == read_file(dir / "o2/a_heatmap.ppm"));
}

TEST_CASE("held-out normals mostly fall below the threshold") {
  const auto dir = oracle::temp_dir("engine_heldout");
  Json j = fixture::small_config(dir / "model");
  j["dataset"]["synthetic"] = {{"n_train", 30}, {"n_test_normal", 10}, {"n_test_anomalous", 10},
                               {"image_size", 64}, {"seed", 42}};
  j["transform"]["target_size"] = 64;
  j["features"]["patch_stats"]["cell"] = 8;
  const ExperimentConfig cfg = parse_config(j);
  const TrainResult tr = run_train(cfg);
  SyntheticSpec held = cfg.dataset.synthetic;
  held.seed = 4242;
  held.n_train = 1;
  held.n_test_normal = 30;
  held.n_test_anomalous = 1;
  std::size_t below = 0, total = 0;
  for (const auto& s : generate_synthetic(held)) {
    if (s.label != Label::normal || s.split != Split::test) continue;
    const Prediction p = predict(tr.pipeline, s.image.load(), s.stem);
    below += normalize(p.result.image_score, tr.pipeline.image_stats) < tr.pipeline.image_threshold;
    ++total;
  }
  CHECK(static_cast<double>(below) >= 0.9 * static_cast<double>(total));
}

TEST_CASE("patch scores separate normal and defect patches for every model") {
  const auto dir = oracle::temp_dir("engine_median");
  for (const char* model : {"gaussian", "coreset_knn", "pca_fre"}) {
    Json j = fixture::small_config(dir, model);
    j["dataset"]["synthetic"]["n_train"] = 20;
    const ExperimentConfig cfg = parse_config(j);
    const TrainResult tr = run_train(cfg);
    std::vector<float> normal, defect;
    for (const auto& s : load_dataset(cfg.dataset, cfg.seed)) {
      if (s.split != Split::test) continue;
      const Prediction p = predict(tr.pipeline, s.image.load(), s.stem);
      const Tensor mask = s.mask ? load_mask(s, 32, 32, 32) : Tensor({32, 32}, 0.0f);
      for (std::size_t i = 0; i < mask.size(); ++i) {
        (mask[i] > 0.5f ? defect : normal).push_back(p.result.pixel_map[i]);
      }
    }
    auto median = [](std::vector<float> v) {
      std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
      return v[v.size() / 2];
    };
    CHECK_MESSAGE(median(normal) < median(defect), model);
  }
}

TEST_CASE("tiling and random_conv run end to end") {
  const auto dir = oracle::temp_dir("engine_tiling");
  Json j = fixture::small_config(dir / "out", "gaussian");
  j["tiling"] = {{"enabled", true}, {"tile_size", 16}, {"stride", 8}};
  j["features"] = {{"kind", "random_conv"}, {"random_conv", {{"n_filters", 4}, {"pool_cell", 4}}}};
  const ExperimentConfig cfg = parse_config(j);
  const TrainResult tr = run_train(cfg);
  const MetricsReport r = run_test(dir / "out" / kModelFileName, cfg);
  CHECK(r.image_auroc.has_value());
  CHECK(r.aupro.has_value());
  const TrainedPipeline loaded = load_model(read_file(dir / "out" / kModelFileName));
  CHECK(loaded.tiling.enabled);
  CHECK(loaded.extractor.kind == ExtractorKind::random_conv);
  const ImageBuffer img(32, 32, 1, 100);
  CHECK(predict(loaded, img, "x").result.pixel_map == predict(tr.pipeline, img, "x").result.pixel_map);
  CHECK(predict(loaded, img, "x").result.pixel_map.dims() == std::vector<std::size_t>{32, 32});

  j["features"] = {{"kind", "precomputed"}};
  CHECK_THROWS_AS(parse_config(j), Error);
}
