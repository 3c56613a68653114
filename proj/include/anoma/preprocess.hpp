#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "anoma/tensor.hpp"

namespace anoma {

struct TransformSpec {
  std::size_t target_size = 64;
  bool grayscale = true;

  void validate() const;
};

struct TilingSpec {
  bool enabled = false;
  std::size_t tile_size = 32;
  std::size_t stride = 32;
};

struct TileLayout {
  std::size_t original_h = 0;
  std::size_t original_w = 0;
  std::size_t padded_h = 0;
  std::size_t padded_w = 0;
  std::size_t tile_size = 0;
  std::size_t stride = 0;
  std::vector<std::pair<std::size_t, std::size_t>> positions;  // row-major origins
};

/// Half-pixel-center bilinear resize of a [H, W, C] tensor (rank 2 accepted as C = 1).
Tensor resize_bilinear(const Tensor& src, std::size_t out_h, std::size_t out_w);

/// ITU-R 601 luma of a [H, W, 3] tensor, result [H, W, 1].
Tensor to_grayscale(const Tensor& src);

/// Resize to target_size squared, converting RGB to gray when requested.
Tensor apply_transform(const Tensor& image, const TransformSpec& spec);

/// Smallest padded extent >= max(extent, t) with (padded - t) % s == 0.
std::size_t padded_extent(std::size_t extent, std::size_t t, std::size_t s);

/// Edge-replicate pad of a [H, W, C] (or [H, W]) tensor to out_h x out_w.
Tensor pad_edge(const Tensor& src, std::size_t out_h, std::size_t out_w);

std::pair<std::vector<Tensor>, TileLayout> tile(const Tensor& src, std::size_t t, std::size_t s);

/// Mean over all covering tiles, cropped to the original extent. Tiles may be
/// [t, t, C] or [t, t]; the output has the same rank as the tiles.
Tensor untile(const std::vector<Tensor>& tiles, const TileLayout& layout);

}  // namespace anoma
