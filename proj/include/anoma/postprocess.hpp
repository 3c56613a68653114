#pragma once

#include <span>

#include "anoma/tensor.hpp"

namespace anoma {

struct MinMaxStats {
  double min = 0.0;
  double max = 1.0;
};

MinMaxStats fit_minmax(std::span<const float> values);

/// (x - min) / (max - min) clipped to [0,1]; 0.5 when min == max.
double normalize(double x, const MinMaxStats& stats);

Tensor normalize_map(const Tensor& map, const MinMaxStats& stats);

enum class ThresholdMode { adaptive, manual };

struct ThresholdSpec {
  ThresholdMode mode = ThresholdMode::adaptive;
  double value = 0.5;
};

/// Unique score maximizing F1 under the rule score >= t; smallest maximizer wins.
double adaptive_threshold(std::span<const float> scores, std::span<const int> labels);

/// Blue, cyan, yellow, red anchors at 0, 1/3, 2/3, 1; RGB output.
ImageBuffer render_heatmap(const Tensor& map01);

/// round((1 - alpha) * image + alpha * heatmap); gray images are expanded to RGB.
ImageBuffer render_overlay(const ImageBuffer& image, const Tensor& map01, double alpha = 0.5);

/// 255 where map >= threshold, else 0; gray output.
ImageBuffer render_mask(const Tensor& map01, double threshold);

}  // namespace anoma
