#include "anoma/config.hpp"

#include <fstream>
#include <set>

#include "anoma/error.hpp"
#include "anoma/rng.hpp"

namespace anoma {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gaussian: return "gaussian";
    case ModelKind::coreset_knn: return "coreset_knn";
    case ModelKind::pca_fre: return "pca_fre";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "gaussian") return ModelKind::gaussian;
  if (name == "coreset_knn") return ModelKind::coreset_knn;
  if (name == "pca_fre") return ModelKind::pca_fre;
  fail(ErrorKind::config, "unknown model kind '" + name + "'");
}

namespace {

// Reads one JSON object strictly: every key must be consumed by a getter.
class Section {
 public:
  Section(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorKind::config, where_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const Json* raw(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void get(const char* key, std::size_t& out) {
    if (const Json* v = raw(key)) out = static_cast<std::size_t>(non_negative(*v, key));
  }

  void get(const char* key, std::uint64_t& out, bool) {
    if (const Json* v = raw(key)) out = non_negative(*v, key);
  }

  void get(const char* key, double& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_number()) fail(ErrorKind::config, path(key) + ": expected a number");
      out = v->get<double>();
    }
  }

  void get(const char* key, bool& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_boolean()) fail(ErrorKind::config, path(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }

  void get(const char* key, std::string& out) {
    if (const Json* v = raw(key)) {
      if (!v->is_string()) fail(ErrorKind::config, path(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }

  std::uint64_t non_negative(const Json& v, const char* key) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(ErrorKind::config, path(key) + ": expected a non-negative integer");
  }

  std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) fail(ErrorKind::config, "unknown field '" + path(key.c_str()) + "'");
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

const Json& empty_object() {
  static const Json e = Json::object();
  return e;
}

const Json& sub(Section& s, const char* key) {
  const Json* v = s.raw(key);
  return v ? *v : empty_object();
}

ValidationSpec parse_validation(const Json& j) {
  Section s(j, "dataset.validation");
  ValidationSpec v;
  std::string mode = "reuse_test";
  s.get("mode", mode);
  if (mode == "reuse_test") {
    v.mode = ValidationMode::reuse_test;
  } else if (mode == "fraction") {
    v.mode = ValidationMode::fraction;
  } else {
    fail(ErrorKind::config, "dataset.validation.mode: unknown mode '" + mode + "'");
  }
  s.get("fraction", v.fraction);
  s.finish();
  return v;
}

}  // namespace

SyntheticSpec parse_synthetic_spec(const Json& j) {
  Section s(j, "synthetic");
  SyntheticSpec spec;
  s.get("n_train", spec.n_train);
  s.get("n_test_normal", spec.n_test_normal);
  s.get("n_test_anomalous", spec.n_test_anomalous);
  s.get("image_size", spec.image_size);
  s.get("texture_grid", spec.texture_grid);
  s.get("noise_amplitude", spec.noise_amplitude);
  if (const Json* range = s.raw("defect_side_range")) {
    if (!range->is_array() || range->size() != 2 || !(*range)[0].is_number() || !(*range)[1].is_number()) {
      fail(ErrorKind::config, "synthetic.defect_side_range: expected [min, max]");
    }
    spec.defect_side_min = (*range)[0].get<double>();
    spec.defect_side_max = (*range)[1].get<double>();
  }
  s.get("defect_delta", spec.defect_delta);
  s.get("seed", spec.seed, true);
  s.finish();
  spec.validate();
  return spec;
}

Json to_json(const SyntheticSpec& spec) {
  return Json{{"n_train", spec.n_train},
              {"n_test_normal", spec.n_test_normal},
              {"n_test_anomalous", spec.n_test_anomalous},
              {"image_size", spec.image_size},
              {"texture_grid", spec.texture_grid},
              {"noise_amplitude", spec.noise_amplitude},
              {"defect_side_range", Json::array({spec.defect_side_min, spec.defect_side_max})},
              {"defect_delta", spec.defect_delta},
              {"seed", spec.seed}};
}

TransformSpec parse_transform(const Json& j) {
  Section s(j, "transform");
  TransformSpec t;
  s.get("target_size", t.target_size);
  s.get("grayscale", t.grayscale);
  s.finish();
  t.validate();
  return t;
}

Json to_json(const TransformSpec& spec) {
  return Json{{"target_size", spec.target_size}, {"grayscale", spec.grayscale}};
}

TilingSpec parse_tiling(const Json& j) {
  Section s(j, "tiling");
  TilingSpec t;
  s.get("enabled", t.enabled);
  s.get("tile_size", t.tile_size);
  s.get("stride", t.stride);
  s.finish();
  if (t.tile_size < 1 || t.stride < 1) fail(ErrorKind::config, "tiling.tile_size and stride must be >= 1");
  if (t.stride > t.tile_size) {
    fail(ErrorKind::config, "tiling.stride exceeds tiling.tile_size (gaps would drop pixels)");
  }
  return t;
}

Json to_json(const TilingSpec& spec) {
  return Json{{"enabled", spec.enabled}, {"tile_size", spec.tile_size}, {"stride", spec.stride}};
}

ExtractorSpec parse_extractor(const Json& j, std::uint64_t seed) {
  Section s(j, "features");
  ExtractorSpec e;
  std::string kind = "patch_stats";
  s.get("kind", kind);
  if (kind == "patch_stats") {
    e.kind = ExtractorKind::patch_stats;
  } else if (kind == "random_conv") {
    e.kind = ExtractorKind::random_conv;
  } else if (kind == "precomputed") {
    e.kind = ExtractorKind::precomputed;
  } else {
    fail(ErrorKind::config, "features.kind: unknown extractor '" + kind + "'");
  }
  {
    Section p(sub(s, "patch_stats"), "features.patch_stats");
    p.get("cell", e.cell);
    p.finish();
  }
  {
    Section r(sub(s, "random_conv"), "features.random_conv");
    r.get("n_filters", e.n_filters);
    r.get("pool_cell", e.pool_cell);
    e.conv_seed = derive_seed(seed, "features.random_conv");
    r.get("seed", e.conv_seed, true);
    r.finish();
  }
  {
    Section p(sub(s, "precomputed"), "features.precomputed");
    p.get("pattern", e.pattern);
    p.get("cell_px", e.precomputed_cell_px);
    p.finish();
  }
  s.finish();
  e.validate();
  return e;
}

Json to_json(const ExtractorSpec& spec) {
  return Json{{"kind", to_string(spec.kind)},
              {"patch_stats", {{"cell", spec.cell}}},
              {"random_conv",
               {{"n_filters", spec.n_filters}, {"pool_cell", spec.pool_cell}, {"seed", spec.conv_seed}}},
              {"precomputed", {{"pattern", spec.pattern}, {"cell_px", spec.precomputed_cell_px}}}};
}

void ExperimentConfig::validate() const {
  transform.validate();
  features.validate();
  if (dataset.kind == DatasetKind::folder && dataset.path.empty()) {
    fail(ErrorKind::config, "dataset.path is required for folder datasets");
  }
  if (dataset.category.empty()) fail(ErrorKind::config, "dataset.category must not be empty");
  if (dataset.validation.mode == ValidationMode::fraction &&
      !(dataset.validation.fraction > 0.0 && dataset.validation.fraction < 1.0)) {
    fail(ErrorKind::config, "dataset.validation.fraction must lie in (0, 1)");
  }
  if (tiling.enabled && features.kind == ExtractorKind::precomputed) {
    fail(ErrorKind::config, "tiling cannot be combined with precomputed features");
  }
  const std::size_t extent = tiling.enabled ? tiling.tile_size : transform.target_size;
  if (features.kind == ExtractorKind::patch_stats && features.cell > extent) {
    fail(ErrorKind::config, "features.patch_stats.cell exceeds the image/tile size");
  }
  if (features.kind == ExtractorKind::random_conv && extent < 3) {
    fail(ErrorKind::config, "random_conv needs images/tiles of at least 3 pixels");
  }
  if (!(model.epsilon >= 0.0)) fail(ErrorKind::config, "model.params.epsilon must be >= 0");
  if (!(model.coreset_fraction > 0.0 && model.coreset_fraction <= 1.0)) {
    fail(ErrorKind::config, "model.params.coreset_fraction must lie in (0, 1]");
  }
  if (!(model.variance_retained > 0.0 && model.variance_retained <= 1.0)) {
    fail(ErrorKind::config, "model.params.variance_retained must lie in (0, 1]");
  }
  if (!(model.smooth_sigma >= 0.0)) fail(ErrorKind::config, "model.smooth_sigma must be >= 0");
  if (threshold.mode == ThresholdMode::manual && !(threshold.value >= 0.0 && threshold.value <= 1.0)) {
    fail(ErrorKind::config, "postprocess.threshold.value must lie in [0, 1]");
  }
  if (output_dir.empty()) fail(ErrorKind::config, "output_dir must not be empty");
}

ExperimentConfig parse_config(const Json& j) {
  Section root(j, "");
  ExperimentConfig c;
  root.get("seed", c.seed, true);
  std::string out = c.output_dir.string();
  root.get("output_dir", out);
  c.output_dir = out;

  {
    Section d(sub(root, "dataset"), "dataset");
    std::string kind = "synthetic";
    d.get("kind", kind);
    if (kind == "synthetic") {
      c.dataset.kind = DatasetKind::synthetic;
    } else if (kind == "folder") {
      c.dataset.kind = DatasetKind::folder;
    } else {
      fail(ErrorKind::config, "dataset.kind: unknown kind '" + kind + "'");
    }
    std::string path;
    d.get("path", path);
    c.dataset.path = path;
    d.get("category", c.dataset.category);
    if (d.has("synthetic")) {
      c.dataset.synthetic = parse_synthetic_spec(sub(d, "synthetic"));
    } else {
      d.raw("synthetic");
    }
    c.dataset.validation = parse_validation(sub(d, "validation"));
    d.finish();
  }
  c.transform = parse_transform(sub(root, "transform"));
  c.tiling = parse_tiling(sub(root, "tiling"));
  c.features = parse_extractor(sub(root, "features"), c.seed);
  {
    Section m(sub(root, "model"), "model");
    std::string kind = to_string(c.model.kind);
    m.get("kind", kind);
    c.model.kind = parse_model_kind(kind);
    Section p(sub(m, "params"), "model.params");
    p.get("epsilon", c.model.epsilon);
    p.get("coreset_fraction", c.model.coreset_fraction);
    p.get("variance_retained", c.model.variance_retained);
    p.finish();
    m.get("smooth_sigma", c.model.smooth_sigma);
    m.finish();
  }
  {
    Section pp(sub(root, "postprocess"), "postprocess");
    Section t(sub(pp, "threshold"), "postprocess.threshold");
    std::string mode = "adaptive";
    t.get("mode", mode);
    if (mode == "adaptive") {
      c.threshold.mode = ThresholdMode::adaptive;
    } else if (mode == "manual") {
      c.threshold.mode = ThresholdMode::manual;
    } else {
      fail(ErrorKind::config, "postprocess.threshold.mode: unknown mode '" + mode + "'");
    }
    t.get("value", c.threshold.value);
    t.finish();
    pp.finish();
  }
  root.finish();
  c.validate();
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json dataset{{"kind", c.dataset.kind == DatasetKind::folder ? "folder" : "synthetic"},
               {"path", c.dataset.path.string()},
               {"category", c.dataset.category},
               {"synthetic", to_json(c.dataset.synthetic)},
               {"validation",
                {{"mode", c.dataset.validation.mode == ValidationMode::reuse_test ? "reuse_test" : "fraction"},
                 {"fraction", c.dataset.validation.fraction}}}};
  Json model{{"kind", to_string(c.model.kind)},
             {"params",
              {{"epsilon", c.model.epsilon},
               {"coreset_fraction", c.model.coreset_fraction},
               {"variance_retained", c.model.variance_retained}}},
             {"smooth_sigma", c.model.smooth_sigma}};
  Json threshold{{"mode", c.threshold.mode == ThresholdMode::adaptive ? "adaptive" : "manual"},
                 {"value", c.threshold.value}};
  return Json{{"dataset", dataset},
              {"transform", to_json(c.transform)},
              {"tiling", to_json(c.tiling)},
              {"features", to_json(c.features)},
              {"model", model},
              {"postprocess", {{"threshold", threshold}}},
              {"seed", c.seed},
              {"output_dir", c.output_dir.string()}};
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot read " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::config, path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace anoma
