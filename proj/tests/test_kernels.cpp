#include "doctest.h"

#include <cmath>
#include <vector>

#include "anoma/kernels.hpp"
#include "anoma/parallel.hpp"
#include "anoma/rng.hpp"

using namespace anoma;

namespace {

std::vector<float> rand_vec(std::size_t n, Rng& rng) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.normal());
  return v;
}

// Exercise multi-threaded paths even on a single-core host.
struct Threads {
  Threads() { set_max_threads(4); }
  ~Threads() { set_max_threads(0); }
};

}  // namespace

TEST_CASE("nearest_distances: parallel equals serial and brute force") {
  Threads guard;
  Rng rng(1);
  const std::size_t d = 5, nq = 257, nb = 31;
  const auto q = rand_vec(nq * d, rng), b = rand_vec(nb * d, rng);
  std::vector<float> par(nq), ser(nq);
  kernels::nearest_distances(q, b, d, par);
  kernels::serial::nearest_distances(q, b, d, ser);
  CHECK(par == ser);
  for (std::size_t i = 0; i < nq; ++i) {
    double best = 1e300;
    for (std::size_t j = 0; j < nb; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) s += std::pow(double(q[i * d + k]) - b[j * d + k], 2);
      best = std::min(best, s);
    }
    CHECK(par[i] == doctest::Approx(std::sqrt(best)).epsilon(1e-6));
  }
}

TEST_CASE("mahalanobis: parallel equals serial; identity factor gives Euclidean norm") {
  Threads guard;
  Rng rng(2);
  const std::size_t d = 3, n = 100;
  const auto x = rand_vec(n * d, rng), mean = rand_vec(n * d, rng);
  std::vector<double> chol(n * d * d, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < d; ++i) chol[p * d * d + i * d + i] = 1.0;
  }
  std::vector<float> par(n), ser(n);
  kernels::mahalanobis(x, mean, chol, d, par);
  kernels::serial::mahalanobis(x, mean, chol, d, ser);
  CHECK(par == ser);
  for (std::size_t p = 0; p < n; ++p) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += std::pow(double(x[p * d + k]) - mean[p * d + k], 2);
    CHECK(par[p] == doctest::Approx(std::sqrt(s)).epsilon(1e-6));
  }
}

TEST_CASE("update_min_sq_distances: parallel equals serial") {
  Threads guard;
  Rng rng(3);
  const std::size_t d = 4, n = 300;
  const auto pts = rand_vec(n * d, rng);
  std::vector<double> a(n, 1e300), b(n, 1e300);
  for (std::size_t c : {0u, 17u, 250u}) {
    kernels::update_min_sq_distances(pts, d, c, a);
    kernels::serial::update_min_sq_distances(pts, d, c, b);
  }
  CHECK(a == b);
  CHECK(a[17] == 0.0);
}

TEST_CASE("conv3x3_relu: parallel equals serial and a dense oracle") {
  Threads guard;
  Rng rng(4);
  const std::size_t h = 9, w = 7, c = 3, k = 4;
  const auto img = rand_vec(h * w * c, rng), f = rand_vec(k * 9 * c, rng);
  std::vector<float> par((h - 2) * (w - 2) * k), ser(par.size());
  kernels::conv3x3_relu(img, h, w, c, f, k, par);
  kernels::serial::conv3x3_relu(img, h, w, c, f, k, ser);
  CHECK(par == ser);
  for (std::size_t r = 0; r + 2 < h; ++r) {
    for (std::size_t col = 0; col + 2 < w; ++col) {
      for (std::size_t o = 0; o < k; ++o) {
        double acc = 0.0;
        for (std::size_t dr = 0; dr < 3; ++dr)
          for (std::size_t dc = 0; dc < 3; ++dc)
            for (std::size_t ch = 0; ch < c; ++ch)
              acc += double(img[((r + dr) * w + col + dc) * c + ch]) * f[((o * 3 + dr) * 3 + dc) * c + ch];
        CHECK(par[(r * (w - 2) + col) * k + o] == doctest::Approx(std::max(acc, 0.0)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("blur_separable: parallel equals serial, box kernel oracle") {
  Threads guard;
  Rng rng(5);
  const std::size_t h = 11, w = 13;
  const auto src = rand_vec(h * w, rng);
  const std::vector<double> kernel{0.25, 0.5, 0.25};
  std::vector<float> par(h * w), ser(h * w);
  kernels::blur_separable(src, h, w, kernel, par);
  kernels::serial::blur_separable(src, h, w, kernel, ser);
  CHECK(par == ser);
  auto at = [&](long r, long c) {
    r = std::clamp(r, 0L, long(h) - 1);
    c = std::clamp(c, 0L, long(w) - 1);
    return double(src[std::size_t(r) * w + std::size_t(c)]);
  };
  for (long r = 0; r < long(h); ++r) {
    for (long c = 0; c < long(w); ++c) {
      double acc = 0.0;
      for (long dr = -1; dr <= 1; ++dr)
        for (long dc = -1; dc <= 1; ++dc) acc += kernel[std::size_t(dr + 1)] * kernel[std::size_t(dc + 1)] * at(r + dr, c + dc);
      CHECK(par[std::size_t(r) * w + std::size_t(c)] == doctest::Approx(acc).epsilon(1e-6));
    }
  }
}

TEST_CASE("patch_stats: parallel equals serial") {
  Threads guard;
  Rng rng(6);
  const std::size_t h = 16, w = 24, c = 3, cell = 4;
  const auto img = rand_vec(h * w * c, rng);
  std::vector<float> par((h / cell) * (w / cell) * 4 * c), ser(par.size());
  kernels::patch_stats(img, h, w, c, cell, par);
  kernels::serial::patch_stats(img, h, w, c, cell, ser);
  CHECK(par == ser);
}

TEST_CASE("thread cap is applied") {
  set_max_threads(2);
  CHECK(max_threads() == 2);
  set_max_threads(0);
  CHECK(max_threads() >= 1);
}
