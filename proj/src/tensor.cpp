#include "anoma/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "anoma/error.hpp"

namespace anoma {

std::size_t element_count(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

namespace {

void check_dims(const std::vector<std::size_t>& dims) {
  if (dims.empty()) fail(ErrorKind::shape, "tensor needs at least one dimension");
  for (auto d : dims) {
    if (d == 0) fail(ErrorKind::shape, "tensor extents must be >= 1");
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims) : Tensor(std::move(dims), 0.0f) {}

Tensor::Tensor(std::vector<std::size_t> dims, float fill) : dims_(std::move(dims)) {
  check_dims(dims_);
  data_.assign(element_count(dims_), fill);
}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<float> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
  check_dims(dims_);
  if (data_.size() != element_count(dims_)) {
    fail(ErrorKind::shape, "tensor data length " + std::to_string(data_.size()) +
                               " does not match extents (" +
                               std::to_string(element_count(dims_)) + ")");
  }
}

Tensor Tensor::reshaped(std::vector<std::size_t> dims) const {
  return Tensor(std::move(dims), data_);
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

ImageBuffer::ImageBuffer(std::size_t h, std::size_t w, std::size_t c, std::uint8_t fill)
    : ImageBuffer(h, w, c, std::vector<std::uint8_t>(h * w * c, fill)) {}

ImageBuffer::ImageBuffer(std::size_t h, std::size_t w, std::size_t c,
                         std::vector<std::uint8_t> px)
    : height(h), width(w), channels(c), pixels(std::move(px)) {
  if (c != 1 && c != 3) fail(ErrorKind::shape, "image channels must be 1 or 3");
  if (h == 0 || w == 0) fail(ErrorKind::shape, "image extents must be >= 1");
  if (pixels.size() != h * w * c) fail(ErrorKind::shape, "image pixel count mismatch");
}

Tensor image_to_tensor(const ImageBuffer& image) {
  std::vector<float> values(image.pixels.size());
  std::transform(image.pixels.begin(), image.pixels.end(), values.begin(),
                 [](std::uint8_t p) { return static_cast<float>(p / 255.0); });
  return Tensor({image.height, image.width, image.channels}, std::move(values));
}

ImageBuffer tensor_to_image(const Tensor& t) {
  if (t.rank() != 2 && t.rank() != 3) fail(ErrorKind::shape, "expected [H, W] or [H, W, C]");
  const std::size_t c = t.rank() == 3 ? t.dim(2) : 1;
  std::vector<std::uint8_t> px(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double v = std::clamp(static_cast<double>(t[i]), 0.0, 1.0);
    px[i] = static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
  }
  return ImageBuffer(t.dim(0), t.dim(1), c, std::move(px));
}

}  // namespace anoma
