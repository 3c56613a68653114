#include "anoma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "anoma/error.hpp"

namespace anoma {

std::optional<double> MetricsReport::get(const std::string& name) const {
  if (name == "image_auroc") return image_auroc;
  if (name == "pixel_auroc") return pixel_auroc;
  if (name == "image_f1_at_threshold") return image_f1_at_threshold;
  if (name == "aupro") return aupro;
  if (name == "train_time_s") return train_time_s;
  if (name == "infer_ms_per_image") return infer_ms_per_image;
  return std::nullopt;
}

bool MetricsReport::is_metric_name(const std::string& name) {
  return name == "image_auroc" || name == "pixel_auroc" || name == "image_f1_at_threshold" ||
         name == "aupro";
}

namespace {

void check_inputs(std::span<const float> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) fail(ErrorKind::shape, "scores and labels differ in length");
  for (float s : scores) {
    if (std::isnan(s)) fail(ErrorKind::contract, "NaN score");
  }
}

}  // namespace

double roc_auc(std::span<const float> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_total = 0.0;
  double neg_total = 0.0;
  double u = 0.0;
  double neg_below = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const float value = scores[order[i]];
    double pos = 0.0;
    double neg = 0.0;
    while (i < order.size() && scores[order[i]] == value) {
      (labels[order[i]] != 0 ? pos : neg) += 1.0;
      ++i;
    }
    u += pos * neg_below + 0.5 * pos * neg;
    neg_below += neg;
    pos_total += pos;
    neg_total += neg;
  }
  if (pos_total == 0.0 || neg_total == 0.0) {
    fail(ErrorKind::metric, "AUROC needs both positive and negative labels");
  }
  return u / (pos_total * neg_total);
}

PrF1 pr_f1(std::span<const float> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels);
  double tp = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    const bool actual = labels[i] != 0;
    if (predicted && actual) tp += 1.0;
    if (predicted && !actual) fp += 1.0;
    if (!predicted && actual) fn += 1.0;
  }
  PrF1 r;
  r.precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  r.recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

Components connected_components(const Tensor& mask) {
  if (mask.rank() != 2) fail(ErrorKind::shape, "connected_components expects an [H, W] mask");
  const std::size_t h = mask.dim(0);
  const std::size_t w = mask.dim(1);
  Components out;
  out.labels.assign(h * w, 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < h * w; ++start) {
    if (mask[start] == 0.0f || out.labels[start] != 0) continue;
    const int label = ++out.count;
    out.labels[start] = label;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const std::size_t r = p / w;
      const std::size_t c = p % w;
      for (std::size_t rr = r == 0 ? 0 : r - 1; rr <= std::min(r + 1, h - 1); ++rr) {
        for (std::size_t cc = c == 0 ? 0 : c - 1; cc <= std::min(c + 1, w - 1); ++cc) {
          const std::size_t q = rr * w + cc;
          if (mask[q] != 0.0f && out.labels[q] == 0) {
            out.labels[q] = label;
            stack.push_back(q);
          }
        }
      }
    }
  }
  return out;
}

std::vector<float> aupro_thresholds(std::vector<float> values, std::size_t max_thresholds) {
  std::sort(values.begin(), values.end());
  std::vector<float> unique = values;
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<float> out;
  if (unique.size() <= max_thresholds) {
    out = std::move(unique);
  } else {
    const double last = static_cast<double>(values.size() - 1);
    for (std::size_t i = 0; i < max_thresholds; ++i) {
      const double q = static_cast<double>(i) / static_cast<double>(max_thresholds - 1);
      out.push_back(values[static_cast<std::size_t>(std::llround(q * last))]);
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  std::reverse(out.begin(), out.end());
  return out;
}

double aupro(const std::vector<Tensor>& maps, const std::vector<Tensor>& masks,
             const AuproOptions& options) {
  if (maps.size() != masks.size()) fail(ErrorKind::shape, "aupro needs one mask per map");
  if (!(options.fpr_limit > 0.0 && options.fpr_limit <= 1.0)) {
    fail(ErrorKind::config, "fpr_limit must lie in (0, 1]");
  }
  if (options.max_thresholds < 2) fail(ErrorKind::config, "aupro needs at least 2 thresholds");

  // Every pixel tagged with its ground-truth region (-1 for normal pixels).
  std::vector<std::pair<float, int>> pixels;
  std::vector<double> region_size;
  std::size_t normal_count = 0;
  for (std::size_t n = 0; n < maps.size(); ++n) {
    const Tensor& map = maps[n];
    const Tensor& mask = masks[n];
    if (map.rank() != 2 || mask.rank() != 2 || map.dims() != mask.dims()) {
      fail(ErrorKind::shape, "aupro map and mask extents differ");
    }
    const Components comps = connected_components(mask);
    const int offset = static_cast<int>(region_size.size());
    region_size.resize(region_size.size() + static_cast<std::size_t>(comps.count), 0.0);
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (std::isnan(map[i])) fail(ErrorKind::contract, "NaN in anomaly map");
      const int label = comps.labels[i];
      if (label == 0) {
        pixels.emplace_back(map[i], -1);
        ++normal_count;
      } else {
        pixels.emplace_back(map[i], offset + label - 1);
        region_size[static_cast<std::size_t>(offset + label - 1)] += 1.0;
      }
    }
  }
  if (region_size.empty()) fail(ErrorKind::metric, "aupro needs at least one defective region");
  if (normal_count == 0) fail(ErrorKind::metric, "aupro needs at least one normal pixel");

  std::vector<float> values(pixels.size());
  std::transform(pixels.begin(), pixels.end(), values.begin(), [](const auto& p) { return p.first; });
  const std::vector<float> thresholds = aupro_thresholds(std::move(values), options.max_thresholds);

  std::sort(pixels.begin(), pixels.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<double> hits(region_size.size(), 0.0);
  double false_pos = 0.0;
  std::size_t cursor = 0;
  std::vector<std::pair<double, double>> curve;
  for (float t : thresholds) {
    while (cursor < pixels.size() && pixels[cursor].first >= t) {
      const int region = pixels[cursor].second;
      if (region < 0) {
        false_pos += 1.0;
      } else {
        hits[static_cast<std::size_t>(region)] += 1.0;
      }
      ++cursor;
    }
    double pro = 0.0;
    for (std::size_t r = 0; r < hits.size(); ++r) pro += hits[r] / region_size[r];
    pro /= static_cast<double>(hits.size());
    curve.emplace_back(false_pos / static_cast<double>(normal_count), pro);
  }
  std::sort(curve.begin(), curve.end());
  curve.erase(std::unique(curve.begin(), curve.end()), curve.end());
  if (curve.front().first > 0.0) curve.insert(curve.begin(), {0.0, 0.0});

  const double limit = options.fpr_limit;
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
    const auto [x0, y0] = curve[i];
    const auto [x1, y1] = curve[i + 1];
    if (x0 >= limit) break;
    if (x1 > limit) {
      const double y_limit = y0 + (y1 - y0) * (limit - x0) / (x1 - x0);
      area += (limit - x0) * (y0 + y_limit) / 2.0;
      break;
    }
    area += (x1 - x0) * (y0 + y1) / 2.0;
  }
  return std::clamp(area / limit, 0.0, 1.0);
}

}  // namespace anoma
