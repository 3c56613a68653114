#include "anoma/codec.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "anoma/error.hpp"

namespace anoma {

static_assert(std::endian::native == std::endian::little,
              "codecs assume a little-endian host");

namespace {

bool is_space(std::uint8_t c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

void skip_space_and_comments(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (is_space(bytes[pos])) {
      ++pos;
    } else if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
}

std::size_t read_header_int(std::span<const std::uint8_t> bytes, std::size_t& pos,
                            const char* field) {
  skip_space_and_comments(bytes, pos);
  const std::size_t start = pos;
  std::size_t value = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > (1u << 30)) fail(ErrorKind::format, std::string("malformed ") + field);
    ++pos;
  }
  if (pos == start) fail(ErrorKind::format, std::string("malformed ") + field);
  return value;
}

}  // namespace

ImageBuffer pnm_read(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    fail(ErrorKind::format, "malformed magic (expected P5 or P6)");
  }
  const std::size_t channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  if (pos < bytes.size() && !is_space(bytes[pos]) && bytes[pos] != '#') {
    fail(ErrorKind::format, "malformed magic (expected P5 or P6)");
  }
  const std::size_t width = read_header_int(bytes, pos, "width");
  const std::size_t height = read_header_int(bytes, pos, "height");
  const std::size_t maxval = read_header_int(bytes, pos, "maxval");
  if (width == 0) fail(ErrorKind::format, "malformed width");
  if (height == 0) fail(ErrorKind::format, "malformed height");
  if (maxval != 255) fail(ErrorKind::format, "unsupported maxval " + std::to_string(maxval));
  if (pos >= bytes.size() || !is_space(bytes[pos])) {
    fail(ErrorKind::format, "malformed maxval (missing separator before payload)");
  }
  ++pos;
  const std::size_t need = width * height * channels;
  if (bytes.size() - pos < need) fail(ErrorKind::format, "truncated payload");
  std::vector<std::uint8_t> px(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                               bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return ImageBuffer(height, width, channels, std::move(px));
}

Bytes pnm_write(const ImageBuffer& image) {
  const std::string header = std::string(image.channels == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(image.width) + " " + std::to_string(image.height) +
                             "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t& offset,
                      const char* field) {
  if (bytes.size() < offset + 4) fail(ErrorKind::format, std::string("truncated ") + field);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
  offset += 4;
  return v;
}

std::uint64_t get_u64(std::span<const std::uint8_t> bytes, std::size_t& offset,
                      const char* field) {
  if (bytes.size() < offset + 8) fail(ErrorKind::format, std::string("truncated ") + field);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  offset += 8;
  return v;
}

Bytes tensor_write(const Tensor& t) {
  if (!t.all_finite()) fail(ErrorKind::format, "refusing to write non-finite tensor values");
  Bytes out(kTensorMagic, kTensorMagic + 8);
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (auto d : t.dims()) put_u64(out, d);
  out.push_back(0);
  const std::size_t start = out.size();
  out.resize(start + t.size() * sizeof(float));
  std::memcpy(out.data() + start, t.data().data(), t.size() * sizeof(float));
  return out;
}

Tensor tensor_read_at(std::span<const std::uint8_t> bytes, std::size_t& offset) {
  if (bytes.size() < offset + 8 || std::memcmp(bytes.data() + offset, kTensorMagic, 8) != 0) {
    fail(ErrorKind::format, "bad magic (expected ANOTEN01)");
  }
  offset += 8;
  const std::uint32_t ndim = get_u32(bytes, offset, "ndim");
  if (ndim == 0) fail(ErrorKind::format, "ndim must be >= 1");
  std::vector<std::size_t> dims(ndim);
  std::size_t count = 1;
  for (auto& d : dims) {
    const std::uint64_t e = get_u64(bytes, offset, "extent");
    if (e == 0) fail(ErrorKind::format, "zero extent");
    if (e > (std::uint64_t{1} << 40) || count > (std::size_t{1} << 40) / e) {
      fail(ErrorKind::format, "payload length mismatch");
    }
    d = static_cast<std::size_t>(e);
    count *= d;
  }
  if (bytes.size() < offset + 1) fail(ErrorKind::format, "truncated dtype");
  const std::uint8_t dtype = bytes[offset++];
  if (dtype != 0) fail(ErrorKind::format, "unsupported dtype " + std::to_string(dtype));
  const std::size_t payload = count * sizeof(float);
  if (bytes.size() - offset < payload) fail(ErrorKind::format, "payload length mismatch");
  std::vector<float> values(count);
  std::memcpy(values.data(), bytes.data() + offset, payload);
  offset += payload;
  return Tensor(std::move(dims), std::move(values));
}

Tensor tensor_read(std::span<const std::uint8_t> bytes) {
  std::size_t offset = 0;
  Tensor t = tensor_read_at(bytes, offset);
  if (offset != bytes.size()) fail(ErrorKind::format, "payload length mismatch");
  return t;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

bool is_supported_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

ImageBuffer read_image(const std::filesystem::path& path) {
  if (!is_supported_image(path)) {
    fail(ErrorKind::format, "unsupported image format: " + path.string());
  }
  const Bytes bytes = read_file(path);
  try {
    return pnm_read(bytes);
  } catch (const Error& e) {
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

void write_image(const std::filesystem::path& path, const ImageBuffer& image) {
  write_file(path, pnm_write(image));
}

}  // namespace anoma
