#include "doctest.h"

#include <algorithm>
#include <set>

#include "anoma/error.hpp"
#include "anoma/metrics.hpp"
#include "anoma/postprocess.hpp"
#include "oracles.hpp"

using namespace anoma;

TEST_CASE("fit_minmax and normalize") {
  const std::vector<float> v{2, 6, 4};
  const auto s = fit_minmax(v);
  CHECK(s.min == 2.0);
  CHECK(s.max == 6.0);
  const std::vector<float> p{4, 2, 6};
  CHECK(fit_minmax(p).min == s.min);
  CHECK(fit_minmax(p).max == s.max);
  const std::vector<float> one{5};
  CHECK(fit_minmax(one).min == 5.0);
  CHECK(fit_minmax(one).max == 5.0);
  CHECK(normalize(4, {2, 6}) == 0.5);
  CHECK(normalize(8, {2, 6}) == 1.0);
  CHECK(normalize(-1, {2, 6}) == 0.0);
  CHECK(normalize(123, {5, 5}) == 0.5);
}

TEST_CASE("normalize preserves AUROC within the validation range") {
  Rng rng(1);
  std::vector<float> s(60);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = static_cast<float>(rng.uniform(1.0, 9.0));
    y[i] = static_cast<int>(rng.below(2));
  }
  y[0] = 0;
  y[1] = 1;
  const auto stats = fit_minmax(s);
  std::vector<float> n(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) n[i] = static_cast<float>(normalize(s[i], stats));
  CHECK(roc_auc(n, y) == roc_auc(s, y));
}

TEST_CASE("adaptive_threshold: hand examples") {
  const std::vector<float> s{0.2f, 0.3f, 0.7f, 0.9f};
  const std::vector<int> y{0, 0, 1, 1};
  CHECK(adaptive_threshold(s, y) == 0.7f);
  const std::vector<float> s2{0.3f, 0.7f};
  const std::vector<int> y2{1, 1};
  CHECK(adaptive_threshold(s2, y2) == 0.3f);
  const std::vector<float> s3{0.1f, 0.2f, 0.8f, 0.95f};
  CHECK(adaptive_threshold(s3, y) == 0.8f);
  const std::vector<int> none{0, 0, 0, 0};
  CHECK_THROWS_AS(adaptive_threshold(s, none), Error);
}

TEST_CASE("adaptive_threshold equals exhaustive sweep on random instances") {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<float> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<float>(rng.below(12)) / 4.0f;
      y[i] = static_cast<int>(rng.below(2));
    }
    y[rng.below(n)] = 1;
    const float t = adaptive_threshold(s, y);
    const auto [best, arg] = oracle::best_f1(s, y);
    CHECK(std::find(s.begin(), s.end(), t) != s.end());
    CHECK(oracle::f1_at(s, y, t) == best);
    CHECK(t == arg);
  }
}

TEST_CASE("render_heatmap anchors") {
  const auto h0 = render_heatmap(Tensor({1, 1}, 0.0f));
  CHECK(h0.channels == 3);
  CHECK(h0.pixels == std::vector<std::uint8_t>{0, 0, 255});
  CHECK(render_heatmap(Tensor({1, 1}, 0.5f)).pixels == std::vector<std::uint8_t>{128, 255, 128});
  CHECK(render_heatmap(Tensor({1, 1}, 1.0f)).pixels == std::vector<std::uint8_t>{255, 0, 0});
  CHECK_THROWS_AS(render_heatmap(Tensor({1, 1}, 1.5f)), Error);
}

TEST_CASE("render_mask and overlay") {
  const auto m = render_mask(Tensor({2, 3}, 0.0f), 0.5);
  CHECK(m.channels == 1);
  for (auto p : m.pixels) CHECK(p == 0);
  const auto m2 = render_mask(Tensor({1, 2}, std::vector<float>{0.5f, 0.49f}), 0.5);
  CHECK(m2.pixels == std::vector<std::uint8_t>{255, 0});
  const ImageBuffer gray(1, 1, 1, std::vector<std::uint8_t>{100});
  const auto o = render_overlay(gray, Tensor({1, 1}, 0.0f));
  CHECK(o.channels == 3);
  CHECK(o.pixels == std::vector<std::uint8_t>{50, 50, 178});
}
