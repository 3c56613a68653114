#include "anoma/bench.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "anoma/engine.hpp"
#include "anoma/error.hpp"

namespace fs = std::filesystem;

namespace anoma {

namespace {

using OrderedJson = nlohmann::ordered_json;

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    parts.push_back(path.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (const auto& p : parts) {
    if (p.empty()) fail(ErrorKind::config, "malformed config path '" + path + "'");
  }
  return parts;
}

OrderedJson parse_ordered(const std::string& text, const char* what) {
  try {
    return OrderedJson::parse(text);
  } catch (const OrderedJson::parse_error& e) {
    fail(ErrorKind::config, std::string(what) + ": invalid JSON (" + e.what() + ")");
  }
}

Json plain(const OrderedJson& j) { return Json::parse(j.dump()); }

void check_keys(const OrderedJson& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) fail(ErrorKind::config, std::string(what) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(ErrorKind::config, std::string(what) + ": unknown field '" + key + "'");
  }
}

// Validates an axis/parameter path against the fully materialized base config.
void check_config_path(const Json& base, const std::string& path) {
  const Json resolved = to_json(parse_config(base));
  if (!has_path(resolved, path)) {
    fail(ErrorKind::config, "'" + path + "' does not name a config field");
  }
}

std::string string_at(const Json& j, const std::string& path, const std::string& fallback) {
  const Json* cur = &j;
  for (const auto& part : split_path(path)) {
    if (!cur->is_object() || !cur->contains(part)) return fallback;
    cur = &(*cur)[part];
  }
  return cur->is_string() ? cur->get<std::string>() : fallback;
}

std::string value_text(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

struct RunOutcome {
  std::optional<MetricsReport> report;
  std::string error;
  Json resolved;
};

RunOutcome train_and_test(const Json& config_json) {
  RunOutcome out;
  try {
    const ExperimentConfig config = parse_config(config_json);
    out.resolved = to_json(config);
    const TrainResult trained = run_train(config);
    MetricsReport report = run_test(config.output_dir / kModelFileName, config);
    report.train_time_s = trained.train_time_s;
    out.report = std::move(report);
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

std::ofstream open_csv(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream csv(path, std::ios::binary | std::ios::trunc);
  if (!csv) fail(ErrorKind::io, "cannot write " + path.string());
  return csv;
}

std::string optional_metric(const std::optional<double>& v) { return v ? format_metric(*v) : ""; }

}  // namespace

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void set_path(Json& root, const std::string& path, const Json& value) {
  Json* cur = &root;
  for (const auto& part : split_path(path)) {
    if (!cur->is_object()) *cur = Json::object();
    cur = &(*cur)[part];
  }
  if (cur->is_object() && value.is_object()) {
    cur->merge_patch(value);
  } else {
    *cur = value;
  }
}

bool has_path(const Json& root, const std::string& path) {
  const Json* cur = &root;
  for (const auto& part : split_path(path)) {
    if (!cur->is_object() || !cur->contains(part)) return false;
    cur = &(*cur)[part];
  }
  return true;
}

GridSpec parse_grid(const std::string& text) {
  const OrderedJson doc = parse_ordered(text, "grid");
  check_keys(doc, {"base", "axes", "seeds"}, "grid");
  GridSpec grid;
  grid.base = doc.contains("base") ? plain(doc["base"]) : Json::object();
  if (doc.contains("axes")) {
    const OrderedJson& axes = doc["axes"];
    if (!axes.is_object()) fail(ErrorKind::config, "grid.axes: expected an object of path -> values");
    for (const auto& [path, values] : axes.items()) {
      if (!values.is_array() || values.empty()) {
        fail(ErrorKind::config, "grid.axes." + path + ": expected a non-empty list");
      }
      check_config_path(grid.base, path);
      GridAxis axis{path, {}};
      for (const auto& v : values) axis.values.push_back(plain(v));
      grid.axes.push_back(std::move(axis));
    }
  }
  if (doc.contains("seeds")) {
    const OrderedJson& seeds = doc["seeds"];
    if (!seeds.is_array() || seeds.empty()) fail(ErrorKind::config, "grid.seeds: expected a non-empty list");
    for (const auto& s : seeds) {
      if (!s.is_number_unsigned()) fail(ErrorKind::config, "grid.seeds: expected non-negative integers");
      grid.seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    grid.seeds.push_back(parse_config(grid.base).seed);
  }
  return grid;
}

std::vector<std::vector<std::size_t>> grid_cells(const GridSpec& grid) {
  std::vector<std::vector<std::size_t>> cells;
  std::vector<std::size_t> idx(grid.axes.size(), 0);
  while (true) {
    cells.push_back(idx);
    std::size_t axis = grid.axes.size();
    while (axis > 0) {
      --axis;
      if (++idx[axis] < grid.axes[axis].values.size()) break;
      idx[axis] = 0;
      if (axis == 0) return cells;
    }
    if (grid.axes.empty()) return cells;
  }
}

BenchmarkSummary run_benchmark(const GridSpec& grid, const fs::path& out_csv, const fs::path& work_dir) {
  std::ofstream csv = open_csv(out_csv);
  csv << kBenchmarkHeader << '\n';
  csv.flush();

  const ExperimentConfig defaults;
  BenchmarkSummary summary;
  const auto cells = grid_cells(grid);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    Json cell_json = grid.base;
    std::string params;
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      const Json& value = grid.axes[a].values[cells[c][a]];
      set_path(cell_json, grid.axes[a].path, value);
      if (!params.empty()) params += ';';
      params += grid.axes[a].path + "=" + value.dump();
    }
    for (std::uint64_t seed : grid.seeds) {
      Json run_json = cell_json;
      run_json["seed"] = seed;
      run_json["output_dir"] = (work_dir / "runs" / ("cell" + std::to_string(c) + "_seed" + std::to_string(seed))).string();
      const RunOutcome outcome = train_and_test(run_json);

      const std::string model = string_at(run_json, "model.kind", to_string(defaults.model.kind));
      const std::string category = string_at(run_json, "dataset.category", defaults.dataset.category);
      std::vector<std::string> row{model, category, std::to_string(seed)};
      if (outcome.report) {
        const MetricsReport& r = *outcome.report;
        row.insert(row.end(), {optional_metric(r.image_auroc), optional_metric(r.pixel_auroc),
                               optional_metric(r.image_f1_at_threshold), optional_metric(r.aupro),
                               optional_metric(r.train_time_s), optional_metric(r.infer_ms_per_image), ""});
      } else {
        row.insert(row.end(), {"", "", "", "", "", "", outcome.error});
        ++summary.failures;
      }
      row.push_back(params);
      for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << csv_field(row[i]);
      csv << '\n';
      csv.flush();
      ++summary.runs;
    }
  }
  if (!csv) fail(ErrorKind::io, "write failed for " + out_csv.string());
  return summary;
}

SweepSpec parse_sweep(const std::string& text) {
  const OrderedJson doc = parse_ordered(text, "sweep");
  check_keys(doc, {"base", "parameters", "metric", "goal", "max_trials", "seed"}, "sweep");
  SweepSpec sweep;
  sweep.base = doc.contains("base") ? plain(doc["base"]) : Json::object();
  if (doc.contains("metric")) {
    if (!doc["metric"].is_string()) fail(ErrorKind::config, "sweep.metric: expected a string");
    sweep.metric = doc["metric"].get<std::string>();
  }
  if (!MetricsReport::is_metric_name(sweep.metric)) {
    fail(ErrorKind::config, "sweep.metric: unknown metric '" + sweep.metric + "'");
  }
  if (doc.contains("goal") && doc["goal"] != "maximize") {
    fail(ErrorKind::config, "sweep.goal: only 'maximize' is supported");
  }
  if (doc.contains("max_trials")) {
    if (!doc["max_trials"].is_number_unsigned() || doc["max_trials"].get<std::size_t>() < 1) {
      fail(ErrorKind::config, "sweep.max_trials must be an integer >= 1");
    }
    sweep.max_trials = doc["max_trials"].get<std::size_t>();
  }
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) fail(ErrorKind::config, "sweep.seed: expected a non-negative integer");
    sweep.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("parameters")) {
    const OrderedJson& params = doc["parameters"];
    if (!params.is_object()) fail(ErrorKind::config, "sweep.parameters: expected an object");
    for (const auto& [path, def] : params.items()) {
      check_config_path(sweep.base, path);
      SweepParameter p;
      p.path = path;
      if (def.is_array()) {
        if (def.empty()) fail(ErrorKind::config, "sweep.parameters." + path + ": empty list");
        for (const auto& v : def) p.choices.push_back(plain(v));
      } else if (def.is_object()) {
        check_keys(def, {"lo", "hi", "scale"}, ("sweep.parameters." + path).c_str());
        if (!def.contains("lo") || !def.contains("hi") || !def["lo"].is_number() || !def["hi"].is_number()) {
          fail(ErrorKind::config, "sweep.parameters." + path + ": range needs numeric lo and hi");
        }
        p.is_range = true;
        p.lo = def["lo"].get<double>();
        p.hi = def["hi"].get<double>();
        const std::string scale = def.contains("scale") ? def["scale"].get<std::string>() : "linear";
        if (scale != "linear" && scale != "log") {
          fail(ErrorKind::config, "sweep.parameters." + path + ": scale must be linear or log");
        }
        p.log_scale = scale == "log";
        p.integer = !p.log_scale && def["lo"].is_number_integer() && def["hi"].is_number_integer();
        if (!(p.lo <= p.hi)) fail(ErrorKind::config, "sweep.parameters." + path + ": lo > hi");
        if (p.log_scale && !(p.lo > 0.0)) {
          fail(ErrorKind::config, "sweep.parameters." + path + ": log scale needs lo > 0");
        }
      } else {
        fail(ErrorKind::config, "sweep.parameters." + path + ": expected a list or a range object");
      }
      sweep.parameters.push_back(std::move(p));
    }
  }
  parse_config(sweep.base);
  return sweep;
}

Json draw_parameter(const SweepParameter& p, Rng& rng) {
  if (!p.is_range) return p.choices[rng.below(p.choices.size())];
  if (p.integer) {
    const auto lo = static_cast<std::int64_t>(p.lo);
    const auto hi = static_cast<std::int64_t>(p.hi);
    return lo + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(hi - lo) + 1));
  }
  if (p.log_scale) {
    const double v = std::exp(rng.uniform(std::log(p.lo), std::log(p.hi)));
    return std::clamp(v, p.lo, p.hi);
  }
  return rng.uniform(p.lo, p.hi);
}

std::vector<Json> draw_trial(const SweepSpec& sweep, std::size_t index) {
  Rng rng(derive_seed(sweep.seed, "hpo.trial." + std::to_string(index)));
  std::vector<Json> values;
  for (const auto& p : sweep.parameters) values.push_back(draw_parameter(p, rng));
  return values;
}

HpoResult run_hpo(const SweepSpec& sweep, const fs::path& out_csv, const fs::path& work_dir) {
  std::ofstream csv = open_csv(out_csv);
  csv << "trial";
  for (const auto& p : sweep.parameters) csv << ',' << csv_field(p.path);
  csv << ',' << csv_field(sweep.metric) << ",error\n";
  csv.flush();

  HpoResult result;
  for (std::size_t i = 0; i < sweep.max_trials; ++i) {
    const std::vector<Json> values = draw_trial(sweep, i);
    Json config = sweep.base;
    for (std::size_t k = 0; k < values.size(); ++k) set_path(config, sweep.parameters[k].path, values[k]);
    config["output_dir"] = (work_dir / "trials" / std::to_string(i)).string();
    RunOutcome outcome = train_and_test(config);

    std::optional<double> metric;
    if (outcome.report) {
      metric = outcome.report->get(sweep.metric);
      if (!metric) outcome.error = "metric '" + sweep.metric + "' absent from report";
    }
    csv << i;
    for (const auto& v : values) csv << ',' << csv_field(value_text(v));
    csv << ',' << (metric ? format_metric(*metric) : "") << ',' << csv_field(outcome.error) << '\n';
    csv.flush();

    if (!metric) {
      ++result.failures;
      continue;
    }
    if (!result.best_trial || *metric > result.best_metric) {
      result.best_trial = i;
      result.best_metric = *metric;
      result.best_config = outcome.resolved;
    }
  }
  if (!csv) fail(ErrorKind::io, "write failed for " + out_csv.string());
  if (result.best_trial) {
    write_text(out_csv.parent_path() / "best.config.json", dump_json(result.best_config));
  }
  return result;
}

}  // namespace anoma
