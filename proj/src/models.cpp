#include "anoma/models.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "anoma/error.hpp"
#include "anoma/kernels.hpp"
#include "anoma/preprocess.hpp"
#include "anoma/rng.hpp"

namespace anoma {

namespace {

void check_same_grid(const std::vector<FeatureMap>& features) {
  const auto& first = features.front().data.dims();
  for (const auto& f : features) {
    if (f.data.dims() != first) fail(ErrorKind::shape, "feature grids differ across training maps");
  }
}

void check_finite(const FeatureMap& f) {
  if (!f.data.all_finite()) fail(ErrorKind::contract, "feature map contains non-finite values");
}

}  // namespace

// ---------------------------------------------------------------------------

bool cholesky_lower(std::vector<double>& a, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / ljj;
    }
    for (std::size_t k = j + 1; k < n; ++k) a[j * n + k] = 0.0;
  }
  return true;
}

void GaussianModel::factorize() {
  const std::size_t d = dim();
  const std::size_t positions = grid_h() * grid_w();
  cholesky.assign(positions * d * d, 0.0);
  std::vector<double> block(d * d);
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t i = 0; i < d * d; ++i) block[i] = covariance[p * d * d + i];
    if (!cholesky_lower(block, d)) {
      fail(ErrorKind::fit, "covariance at grid position " + std::to_string(p) +
                               " is not positive definite (increase epsilon)");
    }
    std::copy(block.begin(), block.end(), cholesky.begin() + static_cast<std::ptrdiff_t>(p * d * d));
  }
}

GaussianModel fit_gaussian(const std::vector<FeatureMap>& features, double epsilon) {
  if (features.size() < 2) fail(ErrorKind::fit, "need ≥ 2 training maps");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) fail(ErrorKind::config, "epsilon must be >= 0");
  check_same_grid(features);
  for (const auto& f : features) check_finite(f);
  const std::size_t gh = features.front().grid_h();
  const std::size_t gw = features.front().grid_w();
  const std::size_t d = features.front().dim();
  const std::size_t positions = gh * gw;
  const double n = static_cast<double>(features.size());

  GaussianModel model;
  model.epsilon = epsilon;
  model.mean = Tensor({gh, gw, d});
  model.covariance = Tensor({gh, gw, d, d});
  std::vector<double> mu(d);
  std::vector<double> scatter(d * d);
  for (std::size_t p = 0; p < positions; ++p) {
    std::fill(mu.begin(), mu.end(), 0.0);
    for (const auto& f : features)
      for (std::size_t k = 0; k < d; ++k) mu[k] += f.data[p * d + k];
    for (auto& v : mu) v /= n;
    std::fill(scatter.begin(), scatter.end(), 0.0);
    for (const auto& f : features) {
      for (std::size_t i = 0; i < d; ++i) {
        const double di = f.data[p * d + i] - mu[i];
        for (std::size_t j = 0; j <= i; ++j) scatter[i * d + j] += di * (f.data[p * d + j] - mu[j]);
      }
    }
    for (std::size_t k = 0; k < d; ++k) model.mean[p * d + k] = static_cast<float>(mu[k]);
    float* cov = model.covariance.data().data() + p * d * d;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double v = scatter[i * d + j] / (n - 1.0);
        if (i == j) v += epsilon;
        cov[i * d + j] = cov[j * d + i] = static_cast<float>(v);
      }
    }
  }
  model.factorize();
  return model;
}

Tensor score_gaussian(const GaussianModel& model, const FeatureMap& f) {
  if (f.data.dims() != model.mean.dims()) {
    fail(ErrorKind::shape, "feature map grid/dim does not match the gaussian model");
  }
  check_finite(f);
  Tensor out({model.grid_h(), model.grid_w()});
  kernels::mahalanobis(f.data.data(), model.mean.data(), model.cholesky, model.dim(), out.data());
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> k_center_greedy(const Tensor& points, std::size_t m,
                                         std::size_t init_index) {
  if (points.rank() != 2) fail(ErrorKind::shape, "k_center_greedy expects an [M, d] matrix");
  const std::size_t total = points.dim(0);
  const std::size_t d = points.dim(1);
  if (m < 1 || m > total) {
    fail(ErrorKind::config, "coreset size " + std::to_string(m) + " outside [1, " +
                                std::to_string(total) + "]");
  }
  if (init_index >= total) fail(ErrorKind::config, "coreset init index out of range");

  std::vector<std::size_t> selected{init_index};
  selected.reserve(m);
  std::vector<char> taken(total, 0);
  taken[init_index] = 1;
  std::vector<double> min_sq(total, std::numeric_limits<double>::infinity());
  kernels::update_min_sq_distances(points.data(), d, init_index, min_sq);
  while (selected.size() < m) {
    std::size_t best = total;
    double best_value = -1.0;
    for (std::size_t i = 0; i < total; ++i) {
      if (!taken[i] && min_sq[i] > best_value) {
        best = i;
        best_value = min_sq[i];
      }
    }
    taken[best] = 1;
    selected.push_back(best);
    kernels::update_min_sq_distances(points.data(), d, best, min_sq);
  }
  return selected;
}

double covering_radius(const Tensor& points, const std::vector<std::size_t>& selected) {
  const std::size_t total = points.dim(0);
  const std::size_t d = points.dim(1);
  std::vector<double> min_sq(total, std::numeric_limits<double>::infinity());
  for (auto c : selected) kernels::serial::update_min_sq_distances(points.data(), d, c, min_sq);
  double worst = 0.0;
  for (double v : min_sq) worst = std::max(worst, v);
  return std::sqrt(worst);
}

Tensor pool_patches(const std::vector<FeatureMap>& features) {
  if (features.empty()) fail(ErrorKind::fit, "no feature maps to pool");
  const std::size_t d = features.front().dim();
  std::size_t rows = 0;
  for (const auto& f : features) {
    if (f.dim() != d) fail(ErrorKind::shape, "feature dimension differs across maps");
    rows += f.positions();
  }
  std::vector<float> data;
  data.reserve(rows * d);
  for (const auto& f : features) data.insert(data.end(), f.data.values().begin(), f.data.values().end());
  return Tensor({rows, d}, std::move(data));
}

std::size_t coreset_size(double fraction, std::size_t total) {
  const double want = std::ceil(fraction * static_cast<double>(total));
  return std::clamp<std::size_t>(static_cast<std::size_t>(want), 1, total);
}

MemoryBankModel fit_coreset_knn(const std::vector<FeatureMap>& features, double fraction,
                                std::uint64_t seed) {
  if (features.empty()) fail(ErrorKind::fit, "need ≥ 1 training map");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    fail(ErrorKind::config, "coreset_fraction must lie in (0, 1]");
  }
  for (const auto& f : features) check_finite(f);
  const Tensor pooled = pool_patches(features);
  const std::size_t total = pooled.dim(0);
  const std::size_t d = pooled.dim(1);
  Rng rng(seed);
  MemoryBankModel model;
  model.coreset_fraction = fraction;
  model.init_index = static_cast<std::size_t>(rng.below(total));
  auto selected = k_center_greedy(pooled, coreset_size(fraction, total), model.init_index);
  std::sort(selected.begin(), selected.end());
  std::vector<float> rows;
  rows.reserve(selected.size() * d);
  for (auto i : selected) {
    const float* row = pooled.data().data() + i * d;
    rows.insert(rows.end(), row, row + d);
  }
  model.bank = Tensor({selected.size(), d}, std::move(rows));
  return model;
}

Tensor score_knn(const MemoryBankModel& model, const FeatureMap& f) {
  if (f.dim() != model.dim()) fail(ErrorKind::shape, "feature dim does not match the memory bank");
  check_finite(f);
  Tensor out({f.grid_h(), f.grid_w()});
  kernels::nearest_distances(f.data.data(), model.bank.data(), model.dim(), out.data());
  return out;
}

// ---------------------------------------------------------------------------

PcaModel fit_pca(const std::vector<FeatureMap>& features, double variance_retained) {
  if (!(variance_retained > 0.0 && variance_retained <= 1.0)) {
    fail(ErrorKind::config, "variance_retained must lie in (0, 1]");
  }
  if (features.empty()) fail(ErrorKind::fit, "need ≥ 2 patches to fit PCA");
  for (const auto& f : features) check_finite(f);
  const Tensor pooled = pool_patches(features);
  const std::size_t n = pooled.dim(0);
  const std::size_t d = pooled.dim(1);
  if (n < 2) fail(ErrorKind::fit, "need ≥ 2 patches to fit PCA");

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) mu[static_cast<Eigen::Index>(k)] += pooled.at(i, k);
  mu /= static_cast<double>(n);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  Eigen::VectorXd centered(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      centered[kk] = pooled.at(i, k) - mu[kk];
    }
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered);
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) fail(ErrorKind::fit, "covariance eigendecomposition failed");
  // Eigen returns ascending eigenvalues.
  std::vector<double> values(d);
  for (std::size_t k = 0; k < d; ++k) {
    values[k] = std::max(0.0, solver.eigenvalues()[static_cast<Eigen::Index>(d - 1 - k)]);
  }
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  std::size_t rank = 1;
  if (total > 0.0) {
    double cumulative = 0.0;
    rank = d;
    for (std::size_t k = 0; k < d; ++k) {
      cumulative += values[k];
      if (cumulative >= variance_retained * total - 1e-12 * total) {
        rank = k + 1;
        break;
      }
    }
  }

  PcaModel model;
  model.variance_retained = variance_retained;
  model.mean = Tensor({d});
  for (std::size_t k = 0; k < d; ++k) model.mean[k] = static_cast<float>(mu[static_cast<Eigen::Index>(k)]);
  model.eigenvalues = Tensor({d});
  for (std::size_t k = 0; k < d; ++k) model.eigenvalues[k] = static_cast<float>(values[k]);
  model.components = Tensor({rank, d});
  for (std::size_t r = 0; r < rank; ++r) {
    Eigen::VectorXd v = solver.eigenvectors().col(static_cast<Eigen::Index>(d - 1 - r));
    Eigen::Index largest = 0;
    for (Eigen::Index k = 1; k < v.size(); ++k) {
      if (std::abs(v[k]) > std::abs(v[largest])) largest = k;
    }
    if (v[largest] < 0.0) v = -v;
    v.normalize();
    for (std::size_t k = 0; k < d; ++k) model.components.at(r, k) = static_cast<float>(v[static_cast<Eigen::Index>(k)]);
  }
  return model;
}

Tensor score_fre(const PcaModel& model, const FeatureMap& f) {
  const std::size_t d = model.dim();
  if (f.dim() != d) fail(ErrorKind::shape, "feature dim does not match the PCA model");
  check_finite(f);
  const std::size_t r = model.rank();
  Tensor out({f.grid_h(), f.grid_w()});
  std::vector<double> c(d);
  std::vector<double> coef(r);
  for (std::size_t p = 0; p < f.positions(); ++p) {
    for (std::size_t k = 0; k < d; ++k) c[k] = static_cast<double>(f.data[p * d + k]) - model.mean[k];
    for (std::size_t j = 0; j < r; ++j) {
      double a = 0.0;
      for (std::size_t k = 0; k < d; ++k) a += model.components.at(j, k) * c[k];
      coef[j] = a;
    }
    double err = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      double e = c[k];
      for (std::size_t j = 0; j < r; ++j) e -= coef[j] * model.components.at(j, k);
      err += e * e;
    }
    out[p] = static_cast<float>(err);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) return {1.0};
  const auto radius = static_cast<std::ptrdiff_t>(std::floor(2.0 * sigma));
  std::vector<double> taps;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    taps.push_back(std::exp(-static_cast<double>(k * k) / (2.0 * sigma * sigma)));
  }
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (auto& t : taps) t /= sum;
  return taps;
}

Tensor gaussian_blur(const Tensor& map, double sigma) {
  if (map.rank() != 2) fail(ErrorKind::shape, "gaussian_blur expects an [H, W] map");
  const auto kernel = gaussian_kernel(sigma);
  if (kernel.size() == 1) return map;
  Tensor out(map.dims());
  kernels::blur_separable(map.data(), map.dim(0), map.dim(1), kernel, out.data());
  return out;
}

AnomalyMapResult assemble_anomaly_map(const Tensor& grid_scores,
                                      std::pair<std::size_t, std::size_t> target,
                                      double smooth_sigma) {
  if (grid_scores.rank() != 2) fail(ErrorKind::shape, "grid scores must be [Gh, Gw]");
  if (!grid_scores.all_finite()) fail(ErrorKind::contract, "grid scores contain non-finite values");
  Tensor up = resize_bilinear(grid_scores, target.first, target.second);
  AnomalyMapResult result;
  result.image_score = *std::max_element(up.values().begin(), up.values().end());
  result.pixel_map = gaussian_blur(up, smooth_sigma);
  return result;
}

}  // namespace anoma
