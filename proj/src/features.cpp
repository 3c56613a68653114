#include "anoma/features.hpp"

#include <string>

#include "anoma/codec.hpp"
#include "anoma/error.hpp"
#include "anoma/kernels.hpp"
#include "anoma/preprocess.hpp"
#include "anoma/rng.hpp"

namespace anoma {

const char* to_string(ExtractorKind kind) {
  switch (kind) {
    case ExtractorKind::patch_stats: return "patch_stats";
    case ExtractorKind::random_conv: return "random_conv";
    case ExtractorKind::precomputed: return "precomputed";
  }
  return "unknown";
}

void ExtractorSpec::validate() const {
  switch (kind) {
    case ExtractorKind::patch_stats:
      if (cell < 2) fail(ErrorKind::config, "patch_stats cell must be >= 2");
      break;
    case ExtractorKind::random_conv:
      if (n_filters < 1) fail(ErrorKind::config, "random_conv n_filters must be >= 1");
      if (pool_cell < 1) fail(ErrorKind::config, "random_conv pool_cell must be >= 1");
      break;
    case ExtractorKind::precomputed:
      if (pattern.find("{stem}") == std::string::npos) {
        fail(ErrorKind::config, "precomputed pattern must contain {stem}");
      }
      if (precomputed_cell_px < 1) fail(ErrorKind::config, "precomputed cell_px must be >= 1");
      break;
  }
}

namespace {

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

const Tensor& as_hwc(const Tensor& image, Tensor& storage) {
  if (image.rank() == 3) return image;
  if (image.rank() == 2) {
    storage = image.reshaped({image.dim(0), image.dim(1), 1});
    return storage;
  }
  fail(ErrorKind::shape, "feature extractors expect an [H, W, C] image");
}

}  // namespace

FeatureMap extract_patch_stats(const Tensor& image, std::size_t cell) {
  if (cell < 2) fail(ErrorKind::config, "patch_stats cell must be >= 2");
  Tensor storage;
  const Tensor& img = as_hwc(image, storage);
  const std::size_t h = img.dim(0);
  const std::size_t w = img.dim(1);
  const std::size_t c = img.dim(2);
  if (h < cell || w < cell) {
    fail(ErrorKind::shape, "image " + std::to_string(h) + "x" + std::to_string(w) +
                               " is smaller than patch cell " + std::to_string(cell));
  }
  const std::size_t gh = ceil_div(h, cell);
  const std::size_t gw = ceil_div(w, cell);
  const Tensor padded = pad_edge(img, gh * cell, gw * cell);
  Tensor out({gh, gw, 4 * c});
  kernels::patch_stats(padded.data(), gh * cell, gw * cell, c, cell, out.data());
  return FeatureMap{std::move(out), cell, h, w};
}

Tensor random_filters(std::size_t n_filters, std::size_t channels, std::uint64_t seed) {
  Rng rng(seed);
  Tensor filters({n_filters, 3, 3, channels});
  for (auto& v : filters.data()) v = static_cast<float>(rng.normal());
  return filters;
}

FeatureMap extract_random_conv(const Tensor& image, std::size_t n_filters, std::size_t pool_cell,
                               std::uint64_t seed) {
  if (n_filters < 1) fail(ErrorKind::config, "random_conv n_filters must be >= 1");
  if (pool_cell < 1) fail(ErrorKind::config, "random_conv pool_cell must be >= 1");
  Tensor storage;
  const Tensor& img = as_hwc(image, storage);
  const std::size_t h = img.dim(0);
  const std::size_t w = img.dim(1);
  const std::size_t c = img.dim(2);
  if (h < 3 || w < 3) fail(ErrorKind::shape, "random_conv needs an image of at least 3x3");
  const Tensor filters = random_filters(n_filters, c, seed);
  const std::size_t rh = h - 2;
  const std::size_t rw = w - 2;
  Tensor response({rh, rw, n_filters});
  kernels::conv3x3_relu(img.data(), h, w, c, filters.data(), n_filters, response.data());

  const std::size_t gh = ceil_div(rh, pool_cell);
  const std::size_t gw = ceil_div(rw, pool_cell);
  const Tensor padded = pad_edge(response, gh * pool_cell, gw * pool_cell);
  const std::size_t pw = gw * pool_cell;
  Tensor out({gh, gw, n_filters});
  const double n = static_cast<double>(pool_cell * pool_cell);
  for (std::size_t gr = 0; gr < gh; ++gr) {
    for (std::size_t gc = 0; gc < gw; ++gc) {
      for (std::size_t f = 0; f < n_filters; ++f) {
        double acc = 0.0;
        for (std::size_t r = 0; r < pool_cell; ++r)
          for (std::size_t col = 0; col < pool_cell; ++col)
            acc += padded[((gr * pool_cell + r) * pw + gc * pool_cell + col) * n_filters + f];
        out.at(gr, gc, f) = static_cast<float>(acc / n);
      }
    }
  }
  return FeatureMap{std::move(out), pool_cell, h, w};
}

FeatureMap load_precomputed(const std::filesystem::path& path,
                            std::pair<std::size_t, std::size_t> expected_source_size,
                            std::size_t cell_px) {
  Tensor t = tensor_read(read_file(path));
  if (t.rank() != 3) {
    fail(ErrorKind::format, "expected rank-3 feature tensor in " + path.string() + ", got rank " +
                                std::to_string(t.rank()));
  }
  if (!t.all_finite()) fail(ErrorKind::format, "non-finite feature values in " + path.string());
  return FeatureMap{std::move(t), cell_px, expected_source_size.first,
                    expected_source_size.second};
}

std::filesystem::path precomputed_path(const std::string& pattern, const std::string& stem) {
  std::string out = pattern;
  const std::string key = "{stem}";
  for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + stem.size())) {
    out.replace(pos, key.size(), stem);
  }
  return out;
}

FeatureMap extract(const Tensor& image, const ExtractorSpec& spec, const std::string& stem) {
  switch (spec.kind) {
    case ExtractorKind::patch_stats:
      return extract_patch_stats(image, spec.cell);
    case ExtractorKind::random_conv:
      return extract_random_conv(image, spec.n_filters, spec.pool_cell, spec.conv_seed);
    case ExtractorKind::precomputed:
      return load_precomputed(precomputed_path(spec.pattern, stem), {image.dim(0), image.dim(1)},
                              spec.precomputed_cell_px);
  }
  fail(ErrorKind::config, "unknown extractor kind");
}

}  // namespace anoma
