#include "anoma/cli.hpp"

#include <algorithm>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "anoma/bench.hpp"
#include "anoma/codec.hpp"
#include "anoma/config.hpp"
#include "anoma/engine.hpp"
#include "anoma/error.hpp"
#include "anoma/parallel.hpp"

namespace fs = std::filesystem;

namespace anoma::cli {

namespace {

struct Options {
  std::string config;
  std::string model;
  std::string spec;
  std::vector<std::string> inputs;
  std::string out;
  std::optional<std::uint64_t> seed;
};

// Config-stage failures: bad files, bad JSON, bad fields.
struct UsageFailure {
  std::string message;
};

Json read_config_json(const std::string& path, const Options& opt) {
  try {
    Json j = load_json_file(path);
    if (!j.is_object()) fail(ErrorKind::config, path + ": expected a JSON object");
    if (opt.seed) j["seed"] = *opt.seed;
    if (!opt.out.empty()) j["output_dir"] = opt.out;
    return j;
  } catch (const Error& e) {
    throw UsageFailure{e.what()};
  }
}

ExperimentConfig read_config(const Options& opt) {
  const Json j = read_config_json(opt.config, opt);
  try {
    return parse_config(j);
  } catch (const Error& e) {
    throw UsageFailure{opt.config + ": " + e.what()};
  }
}

std::string read_text(const std::string& path) {
  try {
    const Bytes bytes = read_file(path);
    return std::string(bytes.begin(), bytes.end());
  } catch (const Error& e) {
    throw UsageFailure{e.what()};
  }
}

int cmd_train(const Options& opt, std::ostream& out) {
  const ExperimentConfig config = read_config(opt);
  const TrainResult result = run_train(config);
  out << Json{{"model", (config.output_dir / kModelFileName).string()},
              {"train_time_s", result.train_time_s}}
             .dump()
      << '\n';
  return kExitOk;
}

int cmd_test(const Options& opt, std::ostream& out) {
  const ExperimentConfig config = read_config(opt);
  if (!fs::is_regular_file(opt.model)) throw UsageFailure{"cannot read model " + opt.model};
  const MetricsReport report = run_test(opt.model, config);
  out << to_json(report).dump() << '\n';
  return kExitOk;
}

int cmd_infer(const Options& opt, std::ostream& out, std::ostream& err) {
  if (!fs::is_regular_file(opt.model)) throw UsageFailure{"cannot read model " + opt.model};
  std::vector<fs::path> images(opt.inputs.begin(), opt.inputs.end());
  const InferSummary summary = run_infer(opt.model, images, opt.out, out);
  if (summary.failed > 0) {
    err << "infer: " << summary.failed << " of " << images.size() << " inputs failed\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_benchmark(const Options& opt, std::ostream& out, std::ostream& err) {
  GridSpec grid;
  try {
    grid = parse_grid(read_text(opt.config));
  } catch (const Error& e) {
    throw UsageFailure{opt.config + ": " + e.what()};
  }
  if (opt.seed) grid.seeds = {*opt.seed};
  const fs::path csv = fs::path(opt.out) / "benchmark.csv";
  const BenchmarkSummary summary = run_benchmark(grid, csv, opt.out);
  out << Json{{"csv", csv.string()}, {"runs", summary.runs}, {"failures", summary.failures}}.dump() << '\n';
  if (summary.failures > 0) err << "benchmark: " << summary.failures << " of " << summary.runs << " runs failed\n";
  return kExitOk;
}

int cmd_hpo(const Options& opt, std::ostream& out, std::ostream& err) {
  SweepSpec sweep;
  try {
    sweep = parse_sweep(read_text(opt.config));
  } catch (const Error& e) {
    throw UsageFailure{opt.config + ": " + e.what()};
  }
  if (opt.seed) sweep.seed = *opt.seed;
  const fs::path csv = fs::path(opt.out) / "hpo.csv";
  const HpoResult result = run_hpo(sweep, csv, opt.out);
  Json summary{{"csv", csv.string()}, {"failures", result.failures}};
  if (result.best_trial) {
    summary["best_trial"] = *result.best_trial;
    summary["best_metric"] = result.best_metric;
    summary["best_config"] = (fs::path(opt.out) / "best.config.json").string();
  } else {
    summary["best_trial"] = nullptr;
  }
  out << summary.dump() << '\n';
  if (!result.best_trial) {
    err << "hpo: every trial failed\n";
    return kExitPartial;
  }
  return kExitOk;
}

int cmd_synth(const Options& opt, std::ostream& out) {
  Json j = read_config_json(opt.spec, Options{});
  if (opt.seed) j["seed"] = *opt.seed;
  SyntheticSpec spec;
  try {
    spec = parse_synthetic_spec(j);
  } catch (const Error& e) {
    throw UsageFailure{opt.spec + ": " + e.what()};
  }
  const auto samples = generate_synthetic(spec);
  try {
    write_synthetic_dataset(samples, opt.out);
  } catch (const Error& e) {
    throw UsageFailure{e.what()};
  }
  out << Json{{"out", opt.out}, {"images", samples.size()}}.dump() << '\n';
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised visual anomaly detection", "anoma"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed = 0;

  auto add_seed = [&](CLI::App* sub) { return sub->add_option("--seed", seed, "Override the global seed"); };

  CLI::App* train = app.add_subcommand("train", "Fit a model and calibrate thresholds");
  train->add_option("--config", opt.config, "Experiment config JSON")->required();
  train->add_option("--out", opt.out, "Override output_dir");
  CLI::Option* train_seed = add_seed(train);

  CLI::App* test = app.add_subcommand("test", "Evaluate a saved model on the test split");
  test->add_option("--model", opt.model, "Model file")->required();
  test->add_option("--config", opt.config, "Experiment config JSON")->required();
  test->add_option("--out", opt.out, "Override output_dir");
  CLI::Option* test_seed = add_seed(test);

  CLI::App* infer = app.add_subcommand("infer", "Score images with a saved model");
  infer->add_option("--model", opt.model, "Model file")->required();
  infer->add_option("--input", opt.inputs, "Image files")->required();
  infer->add_option("--out", opt.out, "Output directory")->required();

  CLI::App* bench = app.add_subcommand("benchmark", "Grid search over configs and seeds");
  bench->add_option("--config", opt.config, "Grid JSON")->required();
  bench->add_option("--out", opt.out, "Output directory")->required();
  CLI::Option* bench_seed = add_seed(bench);

  CLI::App* hpo = app.add_subcommand("hpo", "Random-search hyperparameter sweep");
  hpo->add_option("--config", opt.config, "Sweep JSON")->required();
  hpo->add_option("--out", opt.out, "Output directory")->required();
  CLI::Option* hpo_seed = add_seed(hpo);

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset to disk");
  synth->add_option("--spec", opt.spec, "Synthetic spec JSON")->required();
  synth->add_option("--out", opt.out, "Output directory")->required();
  CLI::Option* synth_seed = add_seed(synth);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  for (CLI::Option* s : {train_seed, test_seed, bench_seed, hpo_seed, synth_seed}) {
    if (s->count() > 0) opt.seed = seed;
  }

  try {
    if (train->parsed()) return cmd_train(opt, out);
    if (test->parsed()) return cmd_test(opt, out);
    if (infer->parsed()) return cmd_infer(opt, out, err);
    if (bench->parsed()) return cmd_benchmark(opt, out, err);
    if (hpo->parsed()) return cmd_hpo(opt, out, err);
    if (synth->parsed()) return cmd_synth(opt, out);
  } catch (const UsageFailure& e) {
    err << "error: " << e.message << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return (e.kind() == ErrorKind::config || e.kind() == ErrorKind::usage) ? kExitUsage : kExitPartial;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitPartial;
  }
  return kExitUsage;
}

int main(int argc, char** argv) {
  apply_thread_env();
  std::vector<std::string> args(argv + 1, argv + argc);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace anoma::cli
