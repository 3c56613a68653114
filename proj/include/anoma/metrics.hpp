#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anoma/tensor.hpp"

namespace anoma {

struct MetricsReport {
  std::optional<double> image_auroc;
  std::optional<double> pixel_auroc;
  std::optional<double> image_f1_at_threshold;
  std::optional<double> aupro;
  std::optional<double> train_time_s;
  std::optional<double> infer_ms_per_image;
  std::vector<std::string> warnings;

  /// Value of a scalar field by its serialized name; nullopt when absent or unknown.
  std::optional<double> get(const std::string& name) const;
  static bool is_metric_name(const std::string& name);
};

/// Mann-Whitney AUROC with half credit for ties. O(n log n).
double roc_auc(std::span<const float> scores, std::span<const int> labels);

struct PrF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

PrF1 pr_f1(std::span<const float> scores, std::span<const int> labels, double threshold);

struct Components {
  std::vector<int> labels;  // 0 = background, 1..count in row-major first-encounter order
  int count = 0;
};

/// 8-connected labeling of a [H, W] mask (nonzero = foreground).
Components connected_components(const Tensor& mask);

struct AuproOptions {
  double fpr_limit = 0.3;
  std::size_t max_thresholds = 300;
};

/// Area under the per-region-overlap curve up to fpr_limit, divided by fpr_limit.
double aupro(const std::vector<Tensor>& maps, const std::vector<Tensor>& masks,
             const AuproOptions& options = {});

/// Threshold set: all unique values when there are at most max_thresholds,
/// otherwise that many evenly spaced quantiles (nearest rank). Descending.
std::vector<float> aupro_thresholds(std::vector<float> values, std::size_t max_thresholds);

}  // namespace anoma
