#include "anoma/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "anoma/codec.hpp"
#include "anoma/error.hpp"
#include "anoma/preprocess.hpp"
#include "anoma/rng.hpp"

namespace fs = std::filesystem;

namespace anoma {

const char* to_string(Label label) { return label == Label::normal ? "normal" : "anomalous"; }

const char* to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
  }
  return "unknown";
}

ImageBuffer ImageSource::load() const {
  if (buffer) return *buffer;
  if (path.empty()) fail(ErrorKind::io, "sample has no image source");
  return read_image(path);
}

void SyntheticSpec::validate() const {
  if (n_train < 1 || n_test_normal < 1 || n_test_anomalous < 1) {
    fail(ErrorKind::config, "synthetic sample counts must be >= 1");
  }
  if (image_size < 16) fail(ErrorKind::config, "synthetic image_size must be >= 16");
  if (texture_grid < 1) fail(ErrorKind::config, "synthetic texture_grid must be >= 1");
  if (!(noise_amplitude >= 0.0)) fail(ErrorKind::config, "synthetic noise_amplitude must be >= 0");
  if (!(defect_side_min > 0.0 && defect_side_min <= defect_side_max && defect_side_max < 1.0)) {
    fail(ErrorKind::config, "synthetic defect_side_range must satisfy 0 < min <= max < 1");
  }
  if (!std::isfinite(defect_delta)) fail(ErrorKind::config, "synthetic defect_delta must be finite");
}

namespace {

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_supported_image(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

std::vector<std::string> sorted_subdirs(const fs::path& dir) {
  std::vector<std::string> names;
  if (!fs::is_directory(dir)) return names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::optional<fs::path> find_mask(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".pgm", ".ppm", ".pnm"}) {
    fs::path candidate = dir / (stem + "_mask" + ext);
    if (fs::is_regular_file(candidate)) return candidate;
  }
  return std::nullopt;
}

}  // namespace

std::vector<Sample> scan_folder_dataset(const fs::path& root, const std::string& category) {
  const fs::path base = root / category;
  const fs::path train_dir = base / "train" / "good";
  if (!fs::is_directory(train_dir)) {
    fail(ErrorKind::layout, "missing train/good directory: " + train_dir.string());
  }
  std::vector<Sample> samples;
  for (const auto& file : sorted_images(train_dir)) {
    Sample s;
    s.image.path = file;
    s.label = Label::normal;
    s.split = Split::train;
    s.category = category;
    s.defect_type = "good";
    s.stem = file.stem().string();
    samples.push_back(std::move(s));
  }
  // A category without any ground_truth/ directory is mask-free.
  const bool has_ground_truth = fs::is_directory(base / "ground_truth");
  for (const auto& type : sorted_subdirs(base / "test")) {
    for (const auto& file : sorted_images(base / "test" / type)) {
      Sample s;
      s.image.path = file;
      s.split = Split::test;
      s.category = category;
      s.defect_type = type;
      s.stem = file.stem().string();
      if (type == "good") {
        s.label = Label::normal;
      } else {
        s.label = Label::anomalous;
        if (!has_ground_truth) {
          samples.push_back(std::move(s));
          continue;
        }
        auto mask = find_mask(base / "ground_truth" / type, s.stem);
        if (!mask) {
          fail(ErrorKind::pairing, "no ground-truth mask for test/" + type + "/" + s.stem +
                                       " (expected ground_truth/" + type + "/" + s.stem +
                                       "_mask.*)");
        }
        s.mask = ImageSource{*mask, nullptr};
      }
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

std::vector<Sample> make_validation_split(const std::vector<Sample>& samples,
                                          const ValidationSpec& spec, std::uint64_t seed) {
  std::vector<Sample> out = samples;
  if (spec.mode == ValidationMode::reuse_test) {
    for (const auto& s : samples) {
      if (s.split != Split::test) continue;
      Sample copy = s;
      copy.split = Split::validation;
      out.push_back(std::move(copy));
    }
    return out;
  }
  if (!(spec.fraction > 0.0 && spec.fraction < 1.0)) {
    fail(ErrorKind::config, "validation fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  for (Label label : {Label::normal, Label::anomalous}) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (out[i].split == Split::test && out[i].label == label) idx.push_back(i);
    }
    if (idx.empty()) {
      fail(ErrorKind::config, std::string("fraction validation needs at least one ") +
                                  to_string(label) + " test sample");
    }
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[rng.below(i)]);
    }
    const auto take = static_cast<std::size_t>(
        std::ceil(spec.fraction * static_cast<double>(idx.size()) - 1e-9));
    for (std::size_t i = 0; i < take && i < idx.size(); ++i) out[idx[i]].split = Split::validation;
  }
  return out;
}

namespace {

std::string stem_for(std::size_t i, std::size_t count) {
  std::size_t digits = 3;
  for (std::size_t n = count > 0 ? count - 1 : 0; n >= 1000; n /= 10) ++digits;
  std::string s = std::to_string(i);
  return std::string(digits > s.size() ? digits - s.size() : 0, '0') + s;
}

Tensor texture(const SyntheticSpec& spec, Rng& rng) {
  Tensor grid({spec.texture_grid, spec.texture_grid, 1});
  for (auto& v : grid.data()) v = static_cast<float>(rng.uniform01());
  Tensor img = resize_bilinear(grid, spec.image_size, spec.image_size);
  for (auto& v : img.data()) {
    const double noisy = v + rng.uniform(-spec.noise_amplitude, spec.noise_amplitude);
    v = static_cast<float>(std::clamp(noisy, 0.0, 1.0));
  }
  return img;
}

ImageBuffer quantize(const Tensor& img) {
  return tensor_to_image(img);
}

Sample make_sample(ImageBuffer image, Label label, Split split, const std::string& category,
                   std::string defect_type, std::string stem) {
  Sample s;
  s.image.buffer = std::make_shared<const ImageBuffer>(std::move(image));
  s.label = label;
  s.split = split;
  s.category = category;
  s.defect_type = std::move(defect_type);
  s.stem = std::move(stem);
  return s;
}

}  // namespace

std::vector<Sample> generate_synthetic(const SyntheticSpec& spec, const std::string& category) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t side_px = spec.image_size;
  std::vector<Sample> train;
  std::vector<Sample> test_good;
  std::vector<Sample> test_defect;
  for (std::size_t i = 0; i < spec.n_train; ++i) {
    train.push_back(make_sample(quantize(texture(spec, rng)), Label::normal, Split::train,
                                category, "good", stem_for(i, spec.n_train)));
  }
  for (std::size_t i = 0; i < spec.n_test_normal; ++i) {
    test_good.push_back(make_sample(quantize(texture(spec, rng)), Label::normal, Split::test,
                                    category, "good", stem_for(i, spec.n_test_normal)));
  }
  const auto lo = static_cast<std::size_t>(std::ceil(spec.defect_side_min * side_px - 1e-9));
  const auto hi = std::max(lo, static_cast<std::size_t>(std::floor(spec.defect_side_max * side_px + 1e-9)));
  for (std::size_t i = 0; i < spec.n_test_anomalous; ++i) {
    Tensor img = texture(spec, rng);
    const std::size_t side = std::clamp<std::size_t>(lo + rng.below(hi - lo + 1), 1, side_px);
    const std::size_t row = rng.below(side_px - side + 1);
    const std::size_t col = rng.below(side_px - side + 1);
    ImageBuffer mask(side_px, side_px, 1, 0);
    for (std::size_t r = row; r < row + side; ++r) {
      for (std::size_t c = col; c < col + side; ++c) {
        float& v = img[r * side_px + c];
        v = static_cast<float>(std::clamp(v + spec.defect_delta, 0.0, 1.0));
        mask.at(r, c) = 255;
      }
    }
    Sample s = make_sample(quantize(img), Label::anomalous, Split::test, category, "defect",
                           stem_for(i, spec.n_test_anomalous));
    s.mask = ImageSource{{}, std::make_shared<const ImageBuffer>(std::move(mask))};
    test_defect.push_back(std::move(s));
  }
  std::vector<Sample> out = std::move(train);
  for (auto& s : test_defect) out.push_back(std::move(s));
  for (auto& s : test_good) out.push_back(std::move(s));
  return out;
}

void write_synthetic_dataset(const std::vector<Sample>& samples, const fs::path& dir) {
  std::error_code ec;
  for (const char* sub : {"train/good", "test/good", "test/defect", "ground_truth/defect"}) {
    fs::create_directories(dir / sub, ec);
    if (ec) fail(ErrorKind::io, "cannot create " + (dir / sub).string() + ": " + ec.message());
  }
  for (const auto& s : samples) {
    const fs::path folder = s.split == Split::train ? dir / "train" / s.defect_type
                                                    : dir / "test" / s.defect_type;
    write_image(folder / (s.stem + ".pgm"), s.image.load());
    if (s.mask) {
      write_image(dir / "ground_truth" / s.defect_type / (s.stem + "_mask.pgm"), s.mask->load());
    }
  }
}

}  // namespace anoma
