#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "anoma/features.hpp"
#include "anoma/tensor.hpp"

namespace anoma {

// ---------------------------------------------------------------------------
// Per-position Gaussian with Mahalanobis scoring.

struct GaussianModel {
  Tensor mean;        // [Gh, Gw, d]
  Tensor covariance;  // [Gh, Gw, d, d], includes epsilon * I
  double epsilon = 0.01;
  std::vector<double> cholesky;  // derived: lower factors, one d x d block per position

  std::size_t grid_h() const { return mean.dim(0); }
  std::size_t grid_w() const { return mean.dim(1); }
  std::size_t dim() const { return mean.dim(2); }

  /// Recomputes `cholesky` from `covariance`; throws fit error when a block is
  /// not positive definite.
  void factorize();
};

GaussianModel fit_gaussian(const std::vector<FeatureMap>& features, double epsilon = 0.01);
Tensor score_gaussian(const GaussianModel& model, const FeatureMap& f);

/// In-place lower Cholesky factor of a row-major n x n SPD matrix (upper part
/// zeroed). Returns false when a pivot is not strictly positive.
bool cholesky_lower(std::vector<double>& a, std::size_t n);

// ---------------------------------------------------------------------------
// Coreset-subsampled nearest-neighbour memory bank.

/// Greedy max-min selection of m rows of an M x d matrix, starting at init_index.
std::vector<std::size_t> k_center_greedy(const Tensor& points, std::size_t m,
                                         std::size_t init_index);

/// max over points of the distance to the nearest selected point.
double covering_radius(const Tensor& points, const std::vector<std::size_t>& selected);

struct MemoryBankModel {
  Tensor bank;  // [M, d]
  double coreset_fraction = 0.1;
  std::size_t neighbor_count = 1;
  std::size_t init_index = 0;

  std::size_t dim() const { return bank.dim(1); }
};

/// Concatenates every position of every map into an N x d matrix, map order then row-major.
Tensor pool_patches(const std::vector<FeatureMap>& features);

/// max(1, ceil(fraction * total)).
std::size_t coreset_size(double fraction, std::size_t total);

MemoryBankModel fit_coreset_knn(const std::vector<FeatureMap>& features, double fraction,
                                std::uint64_t seed);
Tensor score_knn(const MemoryBankModel& model, const FeatureMap& f);

// ---------------------------------------------------------------------------
// PCA feature reconstruction error.

struct PcaModel {
  Tensor mean;         // [d]
  Tensor components;   // [r, d], orthonormal rows
  Tensor eigenvalues;  // [d], non-increasing
  double variance_retained = 0.97;

  std::size_t rank() const { return components.dim(0); }
  std::size_t dim() const { return components.dim(1); }
};

PcaModel fit_pca(const std::vector<FeatureMap>& features, double variance_retained = 0.97);
Tensor score_fre(const PcaModel& model, const FeatureMap& f);

// ---------------------------------------------------------------------------

struct AnomalyMapResult {
  Tensor pixel_map;  // [H, W]
  float image_score = 0.0f;
};

/// Normalized 1-D Gaussian taps for sigma, truncated at radius floor(2 sigma).
std::vector<double> gaussian_kernel(double sigma);

Tensor gaussian_blur(const Tensor& map, double sigma);

/// Bilinear upsample of grid scores to target, then optional blur. The image
/// score is the maximum of the upsampled map before blurring.
AnomalyMapResult assemble_anomaly_map(const Tensor& grid_scores,
                                      std::pair<std::size_t, std::size_t> target,
                                      double smooth_sigma);

}  // namespace anoma
