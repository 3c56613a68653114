#include "anoma/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace anoma::kernels {

namespace {

using Index = std::ptrdiff_t;

// Per-element bodies shared by the serial and OpenMP entry points.

inline double squared_distance(const float* a, const float* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < dim; ++k) {
    const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    s += diff * diff;
  }
  return s;
}

inline float nearest_one(const float* query, std::span<const float> bank, std::size_t dim) {
  const std::size_t rows = bank.size() / dim;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < rows; ++b) {
    best = std::min(best, squared_distance(query, bank.data() + b * dim, dim));
  }
  return static_cast<float>(std::sqrt(best));
}

inline float mahalanobis_one(const float* x, const float* mean, const double* chol,
                             std::size_t dim, double* y) {
  double total = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    double acc = static_cast<double>(x[i]) - static_cast<double>(mean[i]);
    const double* row = chol + i * dim;
    for (std::size_t j = 0; j < i; ++j) acc -= row[j] * y[j];
    y[i] = acc / row[i];
    total += y[i] * y[i];
  }
  return static_cast<float>(std::sqrt(total));
}

inline void update_one(std::span<const float> points, std::size_t dim, std::size_t center,
                       std::size_t i, std::span<double> min_sq) {
  const double s =
      squared_distance(points.data() + i * dim, points.data() + center * dim, dim);
  if (s < min_sq[i]) min_sq[i] = s;
}

// One output row of the rectified valid correlation.
inline void conv_row(std::span<const float> image, std::size_t width, std::size_t channels,
                     std::span<const float> filters, std::size_t n_filters, std::size_t r,
                     std::span<float> out) {
  const std::size_t ow = width - 2;
  const std::size_t taps = 9 * channels;
  for (std::size_t c = 0; c < ow; ++c) {
    for (std::size_t f = 0; f < n_filters; ++f) {
      const float* w = filters.data() + f * taps;
      double acc = 0.0;
      for (std::size_t dr = 0; dr < 3; ++dr) {
        const float* src = image.data() + ((r + dr) * width + c) * channels;
        for (std::size_t t = 0; t < 3 * channels; ++t) {
          acc += static_cast<double>(src[t]) * static_cast<double>(w[dr * 3 * channels + t]);
        }
      }
      out[(r * ow + c) * n_filters + f] = static_cast<float>(std::max(acc, 0.0));
    }
  }
}

inline double blur_h_one(std::span<const float> src, std::size_t width, std::size_t y,
                         std::size_t x, std::span<const double> kernel) {
  const Index radius = static_cast<Index>(kernel.size() / 2);
  const Index last = static_cast<Index>(width) - 1;
  double acc = 0.0;
  for (Index k = -radius; k <= radius; ++k) {
    const Index xx = std::clamp<Index>(static_cast<Index>(x) + k, 0, last);
    acc += kernel[static_cast<std::size_t>(k + radius)] *
           static_cast<double>(src[y * width + static_cast<std::size_t>(xx)]);
  }
  return acc;
}

inline float blur_v_one(const std::vector<double>& tmp, std::size_t height, std::size_t width,
                        std::size_t y, std::size_t x, std::span<const double> kernel) {
  const Index radius = static_cast<Index>(kernel.size() / 2);
  const Index last = static_cast<Index>(height) - 1;
  double acc = 0.0;
  for (Index k = -radius; k <= radius; ++k) {
    const Index yy = std::clamp<Index>(static_cast<Index>(y) + k, 0, last);
    acc += kernel[static_cast<std::size_t>(k + radius)] *
           tmp[static_cast<std::size_t>(yy) * width + x];
  }
  return static_cast<float>(acc);
}

inline void patch_cell(std::span<const float> image, std::size_t width, std::size_t channels,
                       std::size_t cell, std::size_t gr, std::size_t gc, float* out) {
  const double n = static_cast<double>(cell * cell);
  const double pairs = static_cast<double>(cell * (cell - 1));
  const std::size_t r0 = gr * cell;
  const std::size_t c0 = gc * cell;
  auto px = [&](std::size_t r, std::size_t c, std::size_t ch) {
    return static_cast<double>(image[((r0 + r) * width + c0 + c) * channels + ch]);
  };
  for (std::size_t ch = 0; ch < channels; ++ch) {
    double sum = 0.0;
    for (std::size_t r = 0; r < cell; ++r)
      for (std::size_t c = 0; c < cell; ++c) sum += px(r, c, ch);
    const double mean = sum / n;
    double sq = 0.0;
    double hdiff = 0.0;
    double vdiff = 0.0;
    for (std::size_t r = 0; r < cell; ++r) {
      for (std::size_t c = 0; c < cell; ++c) {
        const double v = px(r, c, ch);
        sq += (v - mean) * (v - mean);
        if (c + 1 < cell) hdiff += std::abs(px(r, c + 1, ch) - v);
        if (r + 1 < cell) vdiff += std::abs(px(r + 1, c, ch) - v);
      }
    }
    out[ch * 4 + 0] = static_cast<float>(mean);
    out[ch * 4 + 1] = static_cast<float>(std::sqrt(sq / n));
    out[ch * 4 + 2] = static_cast<float>(hdiff / pairs);
    out[ch * 4 + 3] = static_cast<float>(vdiff / pairs);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// OpenMP versions

void nearest_distances(std::span<const float> queries, std::span<const float> bank,
                       std::size_t dim, std::span<float> out) {
  const Index n = static_cast<Index>(queries.size() / dim);
#pragma omp parallel for schedule(static)
  for (Index q = 0; q < n; ++q) {
    out[static_cast<std::size_t>(q)] =
        nearest_one(queries.data() + static_cast<std::size_t>(q) * dim, bank, dim);
  }
}

void mahalanobis(std::span<const float> x, std::span<const float> mean,
                 std::span<const double> chol, std::size_t dim, std::span<float> out) {
  const Index n = static_cast<Index>(x.size() / dim);
#pragma omp parallel
  {
    std::vector<double> y(dim);
#pragma omp for schedule(static)
    for (Index p = 0; p < n; ++p) {
      const auto i = static_cast<std::size_t>(p);
      out[i] = mahalanobis_one(x.data() + i * dim, mean.data() + i * dim,
                               chol.data() + i * dim * dim, dim, y.data());
    }
  }
}

void update_min_sq_distances(std::span<const float> points, std::size_t dim,
                             std::size_t center, std::span<double> min_sq) {
  const Index n = static_cast<Index>(min_sq.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    update_one(points, dim, center, static_cast<std::size_t>(i), min_sq);
  }
}

void conv3x3_relu(std::span<const float> image, std::size_t height, std::size_t width,
                  std::size_t channels, std::span<const float> filters, std::size_t n_filters,
                  std::span<float> out) {
  const Index rows = static_cast<Index>(height - 2);
#pragma omp parallel for schedule(static)
  for (Index r = 0; r < rows; ++r) {
    conv_row(image, width, channels, filters, n_filters, static_cast<std::size_t>(r), out);
  }
}

void blur_separable(std::span<const float> src, std::size_t height, std::size_t width,
                    std::span<const double> kernel, std::span<float> out) {
  std::vector<double> tmp(height * width);
  const Index rows = static_cast<Index>(height);
#pragma omp parallel for schedule(static)
  for (Index y = 0; y < rows; ++y) {
    const auto yy = static_cast<std::size_t>(y);
    for (std::size_t x = 0; x < width; ++x) tmp[yy * width + x] = blur_h_one(src, width, yy, x, kernel);
  }
#pragma omp parallel for schedule(static)
  for (Index y = 0; y < rows; ++y) {
    const auto yy = static_cast<std::size_t>(y);
    for (std::size_t x = 0; x < width; ++x)
      out[yy * width + x] = blur_v_one(tmp, height, width, yy, x, kernel);
  }
}

void patch_stats(std::span<const float> image, std::size_t height, std::size_t width,
                 std::size_t channels, std::size_t cell, std::span<float> out) {
  const std::size_t gh = height / cell;
  const std::size_t gw = width / cell;
  const Index cells = static_cast<Index>(gh * gw);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < cells; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    patch_cell(image, width, channels, cell, idx / gw, idx % gw,
               out.data() + idx * 4 * channels);
  }
}

// ---------------------------------------------------------------------------
// Serial reference versions

namespace serial {

void nearest_distances(std::span<const float> queries, std::span<const float> bank,
                       std::size_t dim, std::span<float> out) {
  for (std::size_t q = 0; q < queries.size() / dim; ++q) {
    out[q] = nearest_one(queries.data() + q * dim, bank, dim);
  }
}

void mahalanobis(std::span<const float> x, std::span<const float> mean,
                 std::span<const double> chol, std::size_t dim, std::span<float> out) {
  std::vector<double> y(dim);
  for (std::size_t p = 0; p < x.size() / dim; ++p) {
    out[p] = mahalanobis_one(x.data() + p * dim, mean.data() + p * dim,
                             chol.data() + p * dim * dim, dim, y.data());
  }
}

void update_min_sq_distances(std::span<const float> points, std::size_t dim,
                             std::size_t center, std::span<double> min_sq) {
  for (std::size_t i = 0; i < min_sq.size(); ++i) update_one(points, dim, center, i, min_sq);
}

void conv3x3_relu(std::span<const float> image, std::size_t height, std::size_t width,
                  std::size_t channels, std::span<const float> filters, std::size_t n_filters,
                  std::span<float> out) {
  for (std::size_t r = 0; r + 2 < height; ++r) {
    conv_row(image, width, channels, filters, n_filters, r, out);
  }
}

void blur_separable(std::span<const float> src, std::size_t height, std::size_t width,
                    std::span<const double> kernel, std::span<float> out) {
  std::vector<double> tmp(height * width);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) tmp[y * width + x] = blur_h_one(src, width, y, x, kernel);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x)
      out[y * width + x] = blur_v_one(tmp, height, width, y, x, kernel);
}

void patch_stats(std::span<const float> image, std::size_t height, std::size_t width,
                 std::size_t channels, std::size_t cell, std::span<float> out) {
  const std::size_t gw = width / cell;
  for (std::size_t gr = 0; gr < height / cell; ++gr)
    for (std::size_t gc = 0; gc < gw; ++gc)
      patch_cell(image, width, channels, cell, gr, gc, out.data() + (gr * gw + gc) * 4 * channels);
}

}  // namespace serial
}  // namespace anoma::kernels
