#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include "anoma/tensor.hpp"

namespace anoma {

/// Gh x Gw grid of d-dimensional patch embeddings.
struct FeatureMap {
  Tensor data;  // [Gh, Gw, d]
  std::size_t cell_px = 1;
  std::size_t source_h = 0;
  std::size_t source_w = 0;

  std::size_t grid_h() const { return data.dim(0); }
  std::size_t grid_w() const { return data.dim(1); }
  std::size_t dim() const { return data.dim(2); }
  std::size_t positions() const { return grid_h() * grid_w(); }
};

enum class ExtractorKind { patch_stats, random_conv, precomputed };

struct ExtractorSpec {
  ExtractorKind kind = ExtractorKind::patch_stats;
  std::size_t cell = 8;            // patch_stats
  std::size_t n_filters = 16;      // random_conv
  std::size_t pool_cell = 8;       // random_conv
  std::uint64_t conv_seed = 0;     // random_conv
  std::string pattern = "features/{stem}.anoten";  // precomputed
  std::size_t precomputed_cell_px = 8;              // precomputed

  void validate() const;
};

const char* to_string(ExtractorKind kind);

FeatureMap extract_patch_stats(const Tensor& image, std::size_t cell);

/// k x 3 x 3 x C standard-normal filters drawn from `seed`.
Tensor random_filters(std::size_t n_filters, std::size_t channels, std::uint64_t seed);

FeatureMap extract_random_conv(const Tensor& image, std::size_t n_filters, std::size_t pool_cell,
                               std::uint64_t seed);

FeatureMap load_precomputed(const std::filesystem::path& path,
                            std::pair<std::size_t, std::size_t> expected_source_size,
                            std::size_t cell_px);

/// Substitutes "{stem}" in the pattern.
std::filesystem::path precomputed_path(const std::string& pattern, const std::string& stem);

/// Runs the configured extractor on a transformed image. `stem` feeds the
/// precomputed path pattern and is ignored by the other kinds.
FeatureMap extract(const Tensor& image, const ExtractorSpec& spec, const std::string& stem = {});

}  // namespace anoma
