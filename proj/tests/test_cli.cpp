#include "doctest.h"

#include <sstream>

#include "anoma/cli.hpp"
#include "anoma/codec.hpp"
#include "anoma/engine.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace anoma;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump()); }

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("usage errors exit 2 without side effects") {
  const auto dir = oracle::temp_dir("cli_usage");
  const Run none = run({});
  CHECK(none.code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  const Run train = run({"train"});
  CHECK(train.code == 2);
  CHECK(train.err.find("--config") != std::string::npos);
  CHECK(run({"train", "--config", "x.json", "--bogus"}).code == 2);
  CHECK(run({"infer", "--model", "m"}).code == 2);
  CHECK(run({"--help"}).code == 0);
  CHECK(fs::is_empty(dir));
}

TEST_CASE("config errors exit 2 before writing") {
  const auto dir = oracle::temp_dir("cli_config");
  Json bad = fixture::small_config(dir / "out");
  bad["model"]["kind"] = "nonsense";
  write_json(dir / "bad.json", bad);
  CHECK(run({"train", "--config", (dir / "bad.json").string()}).code == 2);
  CHECK(run({"train", "--config", (dir / "missing.json").string()}).code == 2);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("train, test, infer through the CLI") {
  const auto dir = oracle::temp_dir("cli_flow");
  write_json(dir / "c.json", fixture::small_config(dir / "ignored"));
  const Run tr = run({"train", "--config", (dir / "c.json").string(), "--out", (dir / "run").string(), "--seed", "9"});
  CHECK(tr.code == 0);
  CHECK(fs::exists(dir / "run" / kModelFileName));
  CHECK_FALSE(fs::exists(dir / "ignored"));
  CHECK(load_json_file(dir / "run" / kResolvedConfigName)["seed"] == 9);

  const Run te = run({"test", "--model", (dir / "run" / kModelFileName).string(), "--config",
                      (dir / "c.json").string(), "--out", (dir / "run").string()});
  CHECK(te.code == 0);
  CHECK(Json::parse(te.out).contains("image_auroc"));

  write_image(dir / "a.ppm", ImageBuffer(32, 32, 3, 90));
  const Run inf = run({"infer", "--model", (dir / "run" / kModelFileName).string(), "--input",
                       (dir / "a.ppm").string(), (dir / "missing.ppm").string(), "--out", (dir / "pred").string()});
  CHECK(inf.code == 1);
  CHECK(count_lines(inf.out) == 2);
  CHECK(inf.out.find("\"error\"") != std::string::npos);
}

TEST_CASE("synth writes a deterministic tree") {
  const auto dir = oracle::temp_dir("cli_synth");
  write_json(dir / "spec.json", Json{{"n_train", 3}, {"n_test_normal", 2}, {"n_test_anomalous", 2}, {"image_size", 16}});
  CHECK(run({"synth", "--spec", (dir / "spec.json").string(), "--out", (dir / "a").string()}).code == 0);
  CHECK(run({"synth", "--spec", (dir / "spec.json").string(), "--out", (dir / "b").string()}).code == 0);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    CHECK(read_file(e.path()) == read_file(dir / "b" / fs::relative(e.path(), dir / "a")));
  }
  CHECK(files == 3 + 2 + 2 + 2);
  CHECK(std::distance(fs::directory_iterator(dir / "a/train/good"), fs::directory_iterator{}) == 3);
  write_text(dir / "blocker", "x");
  CHECK(run({"synth", "--spec", (dir / "spec.json").string(), "--out", (dir / "blocker/sub").string()}).code == 2);
}

TEST_CASE("benchmark and hpo subcommands") {
  const auto dir = oracle::temp_dir("cli_bench");
  const Json base = fixture::small_config("unused");
  write_text(dir / "grid.json", "{\"base\": " + base.dump() +
                                    R"(, "axes": {"model.kind": ["gaussian", "pca_fre"]}, "seeds": [1]})");
  const Run b = run({"benchmark", "--config", (dir / "grid.json").string(), "--out", (dir / "bench").string()});
  CHECK(b.code == 0);
  CHECK(Json::parse(b.out)["runs"] == 2);
  CHECK(fs::exists(dir / "bench/benchmark.csv"));

  write_text(dir / "sweep.json", "{\"base\": " + base.dump() + R"(, "parameters": {"model.kind": ["pca_fre"]}, "max_trials": 2})");
  const Run h = run({"hpo", "--config", (dir / "sweep.json").string(), "--out", (dir / "hpo").string()});
  CHECK(h.code == 0);
  CHECK(fs::exists(dir / "hpo/best.config.json"));
  CHECK(fs::exists(dir / "hpo/hpo.csv"));

  write_text(dir / "badgrid.json", R"({"axes": {"model.nope": [1]}})");
  CHECK(run({"benchmark", "--config", (dir / "badgrid.json").string(), "--out", (dir / "bench2").string()}).code == 2);
  CHECK_FALSE(fs::exists(dir / "bench2"));
}
