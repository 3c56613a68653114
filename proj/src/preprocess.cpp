#include "anoma/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "anoma/error.hpp"

namespace anoma {

void TransformSpec::validate() const {
  if (target_size < 8) fail(ErrorKind::config, "transform.target_size must be >= 8");
}

namespace {

// Views a rank-2 tensor as [H, W, 1].
std::size_t channels_of(const Tensor& t) {
  if (t.rank() == 2) return 1;
  if (t.rank() == 3) return t.dim(2);
  fail(ErrorKind::shape, "expected [H, W] or [H, W, C] tensor, got rank " +
                             std::to_string(t.rank()));
}

std::vector<std::size_t> with_extent(const Tensor& like, std::size_t h, std::size_t w) {
  if (like.rank() == 2) return {h, w};
  return {h, w, like.dim(2)};
}

struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

Tap source_tap(std::size_t i, std::size_t in, std::size_t out) {
  double pos = (static_cast<double>(i) + 0.5) * static_cast<double>(in) / static_cast<double>(out) - 0.5;
  pos = std::clamp(pos, 0.0, static_cast<double>(in - 1));
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, in - 1);
  return {lo, hi, pos - static_cast<double>(lo)};
}

}  // namespace

Tensor resize_bilinear(const Tensor& src, std::size_t out_h, std::size_t out_w) {
  const std::size_t c = channels_of(src);
  const std::size_t h = src.dim(0);
  const std::size_t w = src.dim(1);
  if (out_h == 0 || out_w == 0) fail(ErrorKind::shape, "resize target must be >= 1");
  Tensor out(with_extent(src, out_h, out_w));
  std::vector<Tap> cols(out_w);
  for (std::size_t j = 0; j < out_w; ++j) cols[j] = source_tap(j, w, out_w);
  for (std::size_t i = 0; i < out_h; ++i) {
    const Tap ty = source_tap(i, h, out_h);
    for (std::size_t j = 0; j < out_w; ++j) {
      const Tap& tx = cols[j];
      for (std::size_t k = 0; k < c; ++k) {
        auto at = [&](std::size_t r, std::size_t cc) {
          return static_cast<double>(src[(r * w + cc) * c + k]);
        };
        const double top = at(ty.lo, tx.lo) + (at(ty.lo, tx.hi) - at(ty.lo, tx.lo)) * tx.frac;
        const double bottom = at(ty.hi, tx.lo) + (at(ty.hi, tx.hi) - at(ty.hi, tx.lo)) * tx.frac;
        double v = top + (bottom - top) * ty.frac;
        // Interpolation of a constant can drift by an ulp; clamp to the
        // interpolated neighbours so value bounds hold exactly.
        const double lo = std::min({at(ty.lo, tx.lo), at(ty.lo, tx.hi), at(ty.hi, tx.lo), at(ty.hi, tx.hi)});
        const double hi = std::max({at(ty.lo, tx.lo), at(ty.lo, tx.hi), at(ty.hi, tx.lo), at(ty.hi, tx.hi)});
        v = std::clamp(v, lo, hi);
        out[(i * out_w + j) * c + k] = static_cast<float>(v);
      }
    }
  }
  return out;
}

Tensor to_grayscale(const Tensor& src) {
  if (src.rank() != 3 || src.dim(2) != 3) {
    fail(ErrorKind::shape, "to_grayscale expects [H, W, 3]");
  }
  const std::size_t n = src.dim(0) * src.dim(1);
  Tensor out({src.dim(0), src.dim(1), 1});
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 0.299 * src[i * 3] + 0.587 * src[i * 3 + 1] + 0.114 * src[i * 3 + 2];
    out[i] = static_cast<float>(y);
  }
  return out;
}

Tensor apply_transform(const Tensor& image, const TransformSpec& spec) {
  const Tensor* current = &image;
  Tensor gray;
  if (spec.grayscale && channels_of(image) == 3) {
    gray = to_grayscale(image);
    current = &gray;
  }
  if (current->dim(0) == spec.target_size && current->dim(1) == spec.target_size) {
    return *current;
  }
  return resize_bilinear(*current, spec.target_size, spec.target_size);
}

std::size_t padded_extent(std::size_t extent, std::size_t t, std::size_t s) {
  const std::size_t base = std::max(extent, t);
  const std::size_t steps = (base - t + s - 1) / s;
  return t + steps * s;
}

Tensor pad_edge(const Tensor& src, std::size_t out_h, std::size_t out_w) {
  const std::size_t c = channels_of(src);
  const std::size_t h = src.dim(0);
  const std::size_t w = src.dim(1);
  if (out_h < h || out_w < w) fail(ErrorKind::shape, "pad target smaller than source");
  if (out_h == h && out_w == w) return src;
  Tensor out(with_extent(src, out_h, out_w));
  for (std::size_t r = 0; r < out_h; ++r) {
    const std::size_t sr = std::min(r, h - 1);
    for (std::size_t col = 0; col < out_w; ++col) {
      const std::size_t sc = std::min(col, w - 1);
      for (std::size_t k = 0; k < c; ++k) out[(r * out_w + col) * c + k] = src[(sr * w + sc) * c + k];
    }
  }
  return out;
}

std::pair<std::vector<Tensor>, TileLayout> tile(const Tensor& src, std::size_t t, std::size_t s) {
  if (s < 1 || t < 1) fail(ErrorKind::config, "tile size and stride must be >= 1");
  if (s > t) fail(ErrorKind::config, "tile stride exceeds tile size (gaps would drop pixels)");
  const std::size_t c = channels_of(src);
  TileLayout layout;
  layout.original_h = src.dim(0);
  layout.original_w = src.dim(1);
  layout.padded_h = padded_extent(layout.original_h, t, s);
  layout.padded_w = padded_extent(layout.original_w, t, s);
  layout.tile_size = t;
  layout.stride = s;
  const Tensor padded = pad_edge(src, layout.padded_h, layout.padded_w);
  std::vector<Tensor> tiles;
  for (std::size_t r = 0; r + t <= layout.padded_h; r += s) {
    for (std::size_t col = 0; col + t <= layout.padded_w; col += s) {
      layout.positions.emplace_back(r, col);
      Tensor piece(with_extent(src, t, t));
      for (std::size_t i = 0; i < t; ++i) {
        const float* row = padded.data().data() + ((r + i) * layout.padded_w + col) * c;
        std::copy(row, row + t * c, piece.data().data() + i * t * c);
      }
      tiles.push_back(std::move(piece));
    }
  }
  return {std::move(tiles), std::move(layout)};
}

Tensor untile(const std::vector<Tensor>& tiles, const TileLayout& layout) {
  if (tiles.size() != layout.positions.size() || tiles.empty()) {
    fail(ErrorKind::shape, "tile count does not match layout");
  }
  const std::size_t t = layout.tile_size;
  const std::size_t c = channels_of(tiles.front());
  for (const auto& piece : tiles) {
    if (piece.rank() != tiles.front().rank() || piece.dim(0) != t || piece.dim(1) != t ||
        channels_of(piece) != c) {
      fail(ErrorKind::shape, "tile extents do not match layout");
    }
  }
  const std::size_t pw = layout.padded_w;
  std::vector<double> sum(layout.padded_h * pw * c, 0.0);
  std::vector<std::uint32_t> cover(layout.padded_h * pw, 0);
  for (std::size_t n = 0; n < tiles.size(); ++n) {
    const auto [r0, c0] = layout.positions[n];
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = 0; j < t; ++j) {
        const std::size_t p = (r0 + i) * pw + c0 + j;
        ++cover[p];
        for (std::size_t k = 0; k < c; ++k) sum[p * c + k] += tiles[n][(i * t + j) * c + k];
      }
    }
  }
  Tensor out(with_extent(tiles.front(), layout.original_h, layout.original_w));
  for (std::size_t r = 0; r < layout.original_h; ++r) {
    for (std::size_t col = 0; col < layout.original_w; ++col) {
      const std::size_t p = r * pw + col;
      for (std::size_t k = 0; k < c; ++k) {
        out[(r * layout.original_w + col) * c + k] =
            static_cast<float>(sum[p * c + k] / static_cast<double>(cover[p]));
      }
    }
  }
  return out;
}

}  // namespace anoma
