#pragma once

// Data-parallel inner loops of the pipeline. Every kernel exists twice: the
// OpenMP version in anoma::kernels and a plain loop in anoma::kernels::serial.
// Both evaluate each output element with the same arithmetic in the same
// order, so their results are bit-identical and independent of thread count.
// The serial versions are the test reference and the benchmark baseline.

#include <cstddef>
#include <span>

namespace anoma::kernels {

/// out[q] = min over bank rows b of ||queries[q] - b||  (rows of length dim).
void nearest_distances(std::span<const float> queries, std::span<const float> bank,
                       std::size_t dim, std::span<float> out);

/// For each position p: out[p] = sqrt(|L_p^{-1} (x_p - mean_p)|^2) where L_p is the
/// row-major lower Cholesky factor stored at chol[p*dim*dim].
void mahalanobis(std::span<const float> x, std::span<const float> mean,
                 std::span<const double> chol, std::size_t dim, std::span<float> out);

/// min_sq[i] = min(min_sq[i], ||points[i] - points[center]||^2).
void update_min_sq_distances(std::span<const float> points, std::size_t dim,
                             std::size_t center, std::span<double> min_sq);

/// Valid 3x3 cross-correlation of an H x W x C image with `filters`
/// (k x 3 x 3 x C), rectified. out is (H-2) x (W-2) x k.
void conv3x3_relu(std::span<const float> image, std::size_t height, std::size_t width,
                  std::size_t channels, std::span<const float> filters, std::size_t n_filters,
                  std::span<float> out);

/// Separable blur of a height x width map with a symmetric kernel of length
/// 2r+1 (sums to one), clamping reads at the borders.
void blur_separable(std::span<const float> src, std::size_t height, std::size_t width,
                    std::span<const double> kernel, std::span<float> out);

/// Patch statistics over cell x cell blocks of an already padded image
/// (height and width multiples of cell). out is (height/cell) x (width/cell) x (4C).
void patch_stats(std::span<const float> image, std::size_t height, std::size_t width,
                 std::size_t channels, std::size_t cell, std::span<float> out);

namespace serial {

void nearest_distances(std::span<const float> queries, std::span<const float> bank,
                       std::size_t dim, std::span<float> out);
void mahalanobis(std::span<const float> x, std::span<const float> mean,
                 std::span<const double> chol, std::size_t dim, std::span<float> out);
void update_min_sq_distances(std::span<const float> points, std::size_t dim,
                             std::size_t center, std::span<double> min_sq);
void conv3x3_relu(std::span<const float> image, std::size_t height, std::size_t width,
                  std::size_t channels, std::span<const float> filters, std::size_t n_filters,
                  std::span<float> out);
void blur_separable(std::span<const float> src, std::size_t height, std::size_t width,
                    std::span<const double> kernel, std::span<float> out);
void patch_stats(std::span<const float> image, std::size_t height, std::size_t width,
                 std::size_t channels, std::size_t cell, std::span<float> out);

}  // namespace serial
}  // namespace anoma::kernels
