#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "anoma/config.hpp"

namespace fixture {

// Small synthetic experiment: fast enough for unit tests.
inline anoma::Json small_config(const std::filesystem::path& out, const std::string& model = "coreset_knn",
                                std::uint64_t seed = 7) {
  return anoma::Json{
      {"dataset",
       {{"kind", "synthetic"},
        {"category", "tiny"},
        {"synthetic",
         {{"n_train", 10}, {"n_test_normal", 4}, {"n_test_anomalous", 4}, {"image_size", 32}, {"seed", seed}}}}},
      {"transform", {{"target_size", 32}}},
      {"features", {{"kind", "patch_stats"}, {"patch_stats", {{"cell", 4}}}}},
      {"model", {{"kind", model}, {"params", {{"coreset_fraction", 0.25}}}}},
      {"seed", seed},
      {"output_dir", out.string()}};
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// metrics.json text with the timing fields removed.
inline std::string without_timing(const std::filesystem::path& p) {
  anoma::Json j = anoma::load_json_file(p);
  j.erase("train_time_s");
  j.erase("infer_ms_per_image");
  return anoma::dump_json(j);
}

}  // namespace fixture
