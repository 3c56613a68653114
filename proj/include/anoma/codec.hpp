#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "anoma/tensor.hpp"

namespace anoma {

using Bytes = std::vector<std::uint8_t>;

// Binary PNM: "P5" gray or "P6" RGB, maxval 255 only.
ImageBuffer pnm_read(std::span<const std::uint8_t> bytes);
Bytes pnm_write(const ImageBuffer& image);

// ANOTEN01 tensor file:
//   "ANOTEN01" | u32 ndim | ndim x u64 extents | u8 dtype (0 = f32) | f32 payload
// All integers and floats little-endian.
inline constexpr char kTensorMagic[] = "ANOTEN01";

Tensor tensor_read(std::span<const std::uint8_t> bytes);
Bytes tensor_write(const Tensor& t);

/// Decodes one ANOTEN01 record starting at `offset`; advances `offset` past it.
Tensor tensor_read_at(std::span<const std::uint8_t> bytes, std::size_t& offset);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

ImageBuffer read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageBuffer& image);

bool is_supported_image(const std::filesystem::path& path);

// Little-endian primitives shared with the model container.
void put_u32(Bytes& out, std::uint32_t v);
void put_u64(Bytes& out, std::uint64_t v);
std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t& offset, const char* field);
std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t& offset, const char* field);

}  // namespace anoma
