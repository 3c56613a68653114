#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace anoma {

/// Dense row-major f32 array with explicit extents.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);
  Tensor(std::vector<std::size_t> dims, float fill);
  Tensor(std::vector<std::size_t> dims, std::vector<float> data);

  const std::vector<std::size_t>& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  const std::vector<float>& values() const noexcept { return data_; }

  float& operator[](std::size_t i) noexcept { return data_[i]; }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  // Rank-2 and rank-3 accessors; no bounds checks.
  float& at(std::size_t r, std::size_t c) noexcept { return data_[r * dims_[1] + c]; }
  float at(std::size_t r, std::size_t c) const noexcept { return data_[r * dims_[1] + c]; }
  float& at(std::size_t r, std::size_t c, std::size_t k) noexcept {
    return data_[(r * dims_[1] + c) * dims_[2] + k];
  }
  float at(std::size_t r, std::size_t c, std::size_t k) const noexcept {
    return data_[(r * dims_[1] + c) * dims_[2] + k];
  }

  /// Same data, new extents; the element count must not change.
  Tensor reshaped(std::vector<std::size_t> dims) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<float> data_;
};

std::size_t element_count(const std::vector<std::size_t>& dims);

/// 8-bit image, row-major, channel-interleaved; 1 (gray) or 3 (RGB) channels.
struct ImageBuffer {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
  std::vector<std::uint8_t> pixels;

  ImageBuffer() = default;
  ImageBuffer(std::size_t h, std::size_t w, std::size_t c, std::uint8_t fill = 0);
  ImageBuffer(std::size_t h, std::size_t w, std::size_t c, std::vector<std::uint8_t> px);

  std::uint8_t& at(std::size_t r, std::size_t col, std::size_t ch = 0) noexcept {
    return pixels[(r * width + col) * channels + ch];
  }
  std::uint8_t at(std::size_t r, std::size_t col, std::size_t ch = 0) const noexcept {
    return pixels[(r * width + col) * channels + ch];
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;
};

/// dims [H, W, C], values pixel / 255.
Tensor image_to_tensor(const ImageBuffer& image);

/// Inverse of image_to_tensor for values in [0,1]: round(v * 255), clipped.
ImageBuffer tensor_to_image(const Tensor& t);

}  // namespace anoma
