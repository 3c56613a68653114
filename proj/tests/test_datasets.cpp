#include "doctest.h"

#include <algorithm>
#include <string>

#include "anoma/codec.hpp"
#include "anoma/datasets.hpp"
#include "anoma/error.hpp"
#include "oracles.hpp"

using namespace anoma;
namespace fs = std::filesystem;

namespace {

void put_image(const fs::path& path, std::uint8_t v = 128) {
  fs::create_directories(path.parent_path());
  write_image(path, ImageBuffer(4, 4, 1, v));
}

std::size_t count(const std::vector<Sample>& s, Split split, Label label) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](const Sample& x) {
    return x.split == split && x.label == label;
  }));
}

}  // namespace

TEST_CASE("scan_folder_dataset counts and pairs masks") {
  const auto root = oracle::temp_dir("scan");
  const auto cat = root / "bottle";
  put_image(cat / "train/good/000.pgm");
  put_image(cat / "train/good/001.pgm");
  put_image(cat / "test/good/000.pgm");
  put_image(cat / "test/crack/000.pgm");
  put_image(cat / "ground_truth/crack/000_mask.pgm", 255);
  const auto s = scan_folder_dataset(root, "bottle");
  REQUIRE(s.size() == 4);
  CHECK(count(s, Split::train, Label::normal) == 2);
  CHECK(count(s, Split::test, Label::normal) == 1);
  CHECK(count(s, Split::test, Label::anomalous) == 1);
  for (const auto& x : s) {
    CHECK(x.category == "bottle");
    CHECK(x.mask.has_value() == (x.label == Label::anomalous));
    if (x.label == Label::anomalous) CHECK(x.defect_type == "crack");
  }
  CHECK(s[0].stem == "000");
  CHECK(s[1].stem == "001");
  // pure function of the listing
  const auto again = scan_folder_dataset(root, "bottle");
  for (std::size_t i = 0; i < s.size(); ++i) CHECK(again[i].image.path == s[i].image.path);
}

TEST_CASE("scan_folder_dataset with empty test dir is train-only") {
  const auto root = oracle::temp_dir("scan_empty");
  put_image(root / "c/train/good/a.pgm");
  fs::create_directories(root / "c/test");
  const auto s = scan_folder_dataset(root, "c");
  CHECK(s.size() == 1);
  CHECK(s[0].split == Split::train);
}

TEST_CASE("scan_folder_dataset reports missing mask by stem") {
  const auto root = oracle::temp_dir("scan_missing");
  put_image(root / "c/train/good/a.pgm");
  put_image(root / "c/test/crack/007.ppm");
  std::filesystem::create_directories(root / "c/ground_truth/crack");
  try {
    scan_folder_dataset(root, "c");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::pairing);
    CHECK(std::string(e.what()).find("007") != std::string::npos);
  }
}

TEST_CASE("scan_folder_dataset without ground_truth yields mask-free anomalies") {
  const auto root = oracle::temp_dir("scan_nogt");
  put_image(root / "c/train/good/a.pgm");
  put_image(root / "c/test/crack/007.pgm");
  const auto s = scan_folder_dataset(root, "c");
  REQUIRE(s.size() == 2);
  CHECK(s[1].label == Label::anomalous);
  CHECK_FALSE(s[1].mask.has_value());
}

TEST_CASE("scan_folder_dataset requires train/good") {
  const auto root = oracle::temp_dir("scan_layout");
  fs::create_directories(root / "c/test/good");
  CHECK_THROWS_AS(scan_folder_dataset(root, "c"), Error);
}

TEST_CASE("validation split: reuse_test duplicates every test sample") {
  SyntheticSpec spec;
  spec.n_train = 2;
  spec.n_test_normal = 5;
  spec.n_test_anomalous = 5;
  const auto base = generate_synthetic(spec);
  const auto s = make_validation_split(base, {ValidationMode::reuse_test, 0.5}, 1);
  CHECK(count(s, Split::validation, Label::normal) + count(s, Split::validation, Label::anomalous) == 10);
  CHECK(count(s, Split::test, Label::normal) + count(s, Split::test, Label::anomalous) == 10);
}

TEST_CASE("validation split: stratified fraction") {
  SyntheticSpec spec;
  spec.n_train = 2;
  spec.n_test_normal = 2;
  spec.n_test_anomalous = 2;
  const auto base = generate_synthetic(spec);
  const auto s = make_validation_split(base, {ValidationMode::fraction, 0.5}, 1);
  CHECK(count(s, Split::validation, Label::normal) == 1);
  CHECK(count(s, Split::validation, Label::anomalous) == 1);
  CHECK(count(s, Split::test, Label::normal) == 1);
  CHECK(count(s, Split::test, Label::anomalous) == 1);
  const auto t = make_validation_split(base, {ValidationMode::fraction, 0.5}, 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].stem == t[i].stem);
    CHECK(s[i].split == t[i].split);
  }
  CHECK_THROWS_AS(make_validation_split(base, {ValidationMode::fraction, 1.0}, 1), Error);
}

TEST_CASE("generate_synthetic: counts, labels, masks") {
  SyntheticSpec spec;
  spec.n_train = 4;
  spec.n_test_normal = 2;
  spec.n_test_anomalous = 2;
  spec.seed = 7;
  const auto s = generate_synthetic(spec);
  REQUIRE(s.size() == 8);
  CHECK(count(s, Split::train, Label::normal) == 4);
  CHECK(count(s, Split::test, Label::normal) == 2);
  CHECK(count(s, Split::test, Label::anomalous) == 2);
  CHECK(count(s, Split::train, Label::anomalous) == 0);
}

TEST_CASE("generate_synthetic: defect area bounds for defaults") {
  SyntheticSpec spec;
  spec.n_train = 1;
  spec.n_test_normal = 1;
  spec.n_test_anomalous = 40;
  spec.seed = 3;
  const double side = static_cast<double>(spec.image_size);
  for (const auto& x : generate_synthetic(spec)) {
    if (x.label != Label::anomalous) {
      CHECK_FALSE(x.mask.has_value());
      continue;
    }
    REQUIRE(x.mask.has_value());
    const ImageBuffer m = x.mask->load();
    const auto area = static_cast<double>(std::count_if(m.pixels.begin(), m.pixels.end(), [](auto p) { return p != 0; }));
    CHECK(area >= (0.125 * side) * (0.125 * side));
    CHECK(area <= (0.25 * side) * (0.25 * side));
  }
}

TEST_CASE("generate_synthetic: seeded determinism") {
  SyntheticSpec spec;
  spec.n_train = 2;
  spec.n_test_normal = 1;
  spec.n_test_anomalous = 1;
  spec.seed = 7;
  const auto a = generate_synthetic(spec), b = generate_synthetic(spec);
  spec.seed = 8;
  const auto c = generate_synthetic(spec);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].image.load() == b[i].image.load());
    differs = differs || !(a[i].image.load() == c[i].image.load());
  }
  CHECK(differs);
}

TEST_CASE("synthetic tree rescans to the in-memory sample list") {
  SyntheticSpec spec;
  spec.n_train = 3;
  spec.n_test_normal = 2;
  spec.n_test_anomalous = 2;
  spec.seed = 5;
  const auto mem = generate_synthetic(spec, "synth");
  const auto root = oracle::temp_dir("synth_tree");
  write_synthetic_dataset(mem, root / "synth");
  const auto disk = scan_folder_dataset(root, "synth");
  REQUIRE(disk.size() == mem.size());
  for (std::size_t i = 0; i < mem.size(); ++i) {
    CHECK(disk[i].stem == mem[i].stem);
    CHECK(disk[i].label == mem[i].label);
    CHECK(disk[i].split == mem[i].split);
    CHECK(disk[i].defect_type == mem[i].defect_type);
    CHECK(disk[i].image.load() == mem[i].image.load());
    CHECK(disk[i].mask.has_value() == mem[i].mask.has_value());
    if (mem[i].mask) CHECK(disk[i].mask->load() == mem[i].mask->load());
  }
}

TEST_CASE("synthetic spec validation") {
  SyntheticSpec spec;
  spec.image_size = 8;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = {};
  spec.defect_side_min = 0.3;
  spec.defect_side_max = 0.2;
  CHECK_THROWS_AS(spec.validate(), Error);
  spec = {};
  spec.n_train = 0;
  CHECK_THROWS_AS(spec.validate(), Error);
}
