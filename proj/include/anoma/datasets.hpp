#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anoma/tensor.hpp"

namespace anoma {

enum class Label { normal, anomalous };
enum class Split { train, validation, test };

const char* to_string(Label label);
const char* to_string(Split split);

/// Either a file on disk or an in-memory buffer.
struct ImageSource {
  std::filesystem::path path;
  std::shared_ptr<const ImageBuffer> buffer;

  bool has_value() const noexcept { return buffer != nullptr || !path.empty(); }
  ImageBuffer load() const;
};

struct Sample {
  ImageSource image;
  Label label = Label::normal;
  std::optional<ImageSource> mask;  // nonzero pixel = defective
  Split split = Split::train;
  std::string category;
  std::string defect_type;  // "good" for normal samples
  std::string stem;         // file name without extension
};

struct SyntheticSpec {
  std::size_t n_train = 16;
  std::size_t n_test_normal = 8;
  std::size_t n_test_anomalous = 8;
  std::size_t image_size = 64;
  std::size_t texture_grid = 8;
  double noise_amplitude = 0.05;
  double defect_side_min = 0.125;
  double defect_side_max = 0.25;
  double defect_delta = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class ValidationMode { reuse_test, fraction };

struct ValidationSpec {
  ValidationMode mode = ValidationMode::reuse_test;
  double fraction = 0.5;
};

/// MVTec layout: root/category/{train/good, test/<type>, ground_truth/<type>/<stem>_mask.*}.
/// Ordering: train files, then test types, then files, all lexicographic.
/// Without a ground_truth/ directory anomalous samples carry no mask.
std::vector<Sample> scan_folder_dataset(const std::filesystem::path& root,
                                        const std::string& category);

/// reuse_test appends a validation copy of every test sample. fraction moves
/// ceil(f * n_label) seeded-random test samples of each label to validation.
std::vector<Sample> make_validation_split(const std::vector<Sample>& samples,
                                          const ValidationSpec& spec, std::uint64_t seed);

/// Seeded textured gray images; anomalous ones carry one bright square defect.
/// Returned in the same order scan_folder_dataset produces for the tree that
/// write_synthetic_dataset writes: train, test/defect, test/good.
std::vector<Sample> generate_synthetic(const SyntheticSpec& spec,
                                       const std::string& category = "synthetic");

/// Materializes generated samples as dir/{train/good, test/good, test/defect,
/// ground_truth/defect}, PGM encoded.
void write_synthetic_dataset(const std::vector<Sample>& samples,
                             const std::filesystem::path& dir);

}  // namespace anoma
