#include "anoma/postprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "anoma/error.hpp"

namespace anoma {

MinMaxStats fit_minmax(std::span<const float> values) {
  if (values.empty()) fail(ErrorKind::fit, "cannot fit min-max statistics on no values");
  MinMaxStats stats{values[0], values[0]};
  for (float v : values) {
    if (!std::isfinite(v)) fail(ErrorKind::contract, "non-finite value in min-max input");
    stats.min = std::min(stats.min, static_cast<double>(v));
    stats.max = std::max(stats.max, static_cast<double>(v));
  }
  return stats;
}

double normalize(double x, const MinMaxStats& stats) {
  if (stats.max == stats.min) return 0.5;
  return std::clamp((x - stats.min) / (stats.max - stats.min), 0.0, 1.0);
}

Tensor normalize_map(const Tensor& map, const MinMaxStats& stats) {
  Tensor out(map.dims());
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = static_cast<float>(normalize(map[i], stats));
  return out;
}

double adaptive_threshold(std::span<const float> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) fail(ErrorKind::shape, "scores and labels differ in length");
  std::int64_t positives = 0;
  for (int l : labels) positives += l != 0 ? 1 : 0;
  if (positives == 0) fail(ErrorKind::threshold, "no positive labels: cannot evaluate recall");
  for (float s : scores) {
    if (!std::isfinite(s)) fail(ErrorKind::contract, "non-finite score");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Sweep candidates from high to low; at each unique value every sample with
  // score >= t is predicted positive. F1 = 2TP / (TP + FP + P), compared as exact
  // integer fractions. Ties keep the smaller threshold (later in the sweep).
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t best_num = -1;
  std::int64_t best_den = 1;
  double best = scores[order.front()];
  for (std::size_t i = 0; i < order.size();) {
    const float t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      (labels[order[i]] != 0 ? tp : fp) += 1;
      ++i;
    }
    const std::int64_t num = 2 * tp;
    const std::int64_t den = tp + fp + positives;
    if (num * best_den >= best_num * den) {
      best_num = num;
      best_den = den;
      best = t;
    }
  }
  return best;
}

namespace {

void check_unit_map(const Tensor& map01) {
  if (map01.rank() != 2) fail(ErrorKind::shape, "expected an [H, W] map");
  for (float v : map01.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) fail(ErrorKind::contract, "map values must lie in [0, 1]");
  }
}

std::uint8_t round_half_up(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

std::array<std::uint8_t, 3> colormap(double v) {
  static constexpr std::array<std::array<double, 3>, 4> anchors{{
      {0, 0, 255}, {0, 255, 255}, {255, 255, 0}, {255, 0, 0}}};
  const double x = std::clamp(v, 0.0, 1.0) * 3.0;
  const std::size_t seg = std::min<std::size_t>(static_cast<std::size_t>(x), 2);
  const double frac = x - static_cast<double>(seg);
  std::array<std::uint8_t, 3> rgb{};
  for (std::size_t k = 0; k < 3; ++k) {
    rgb[k] = round_half_up(anchors[seg][k] + (anchors[seg + 1][k] - anchors[seg][k]) * frac);
  }
  return rgb;
}

}  // namespace

ImageBuffer render_heatmap(const Tensor& map01) {
  check_unit_map(map01);
  ImageBuffer out(map01.dim(0), map01.dim(1), 3);
  for (std::size_t i = 0; i < map01.size(); ++i) {
    const auto rgb = colormap(map01[i]);
    std::copy(rgb.begin(), rgb.end(), out.pixels.begin() + static_cast<std::ptrdiff_t>(i * 3));
  }
  return out;
}

ImageBuffer render_overlay(const ImageBuffer& image, const Tensor& map01, double alpha) {
  const ImageBuffer heat = render_heatmap(map01);
  if (image.height != heat.height || image.width != heat.width) {
    fail(ErrorKind::shape, "overlay image and map extents differ");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::contract, "overlay alpha must lie in [0, 1]");
  ImageBuffer out(image.height, image.width, 3);
  for (std::size_t p = 0; p < image.height * image.width; ++p) {
    for (std::size_t k = 0; k < 3; ++k) {
      const double base = image.pixels[p * image.channels + (image.channels == 3 ? k : 0)];
      out.pixels[p * 3 + k] = round_half_up((1.0 - alpha) * base + alpha * heat.pixels[p * 3 + k]);
    }
  }
  return out;
}

ImageBuffer render_mask(const Tensor& map01, double threshold) {
  check_unit_map(map01);
  ImageBuffer out(map01.dim(0), map01.dim(1), 1);
  for (std::size_t i = 0; i < map01.size(); ++i) out.pixels[i] = map01[i] >= threshold ? 255 : 0;
  return out;
}

}  // namespace anoma
