#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "dsgd/dataset.hpp"

using namespace dsgd;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dsgd_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

// Image i is filled with the value (i % 250) + 1; labels cycle through `digits`.
void write_idx_pair(const std::filesystem::path& images, const std::filesystem::path& labels,
                    std::size_t count, const std::vector<int>& digits) {
  std::ofstream img(images, std::ios::binary), lab(labels, std::ios::binary);
  put_be32(img, 0x803);
  put_be32(img, static_cast<std::uint32_t>(count));
  put_be32(img, 28);
  put_be32(img, 28);
  put_be32(lab, 0x801);
  put_be32(lab, static_cast<std::uint32_t>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const std::string pixels(784, static_cast<char>(i % 250 + 1));
    img.write(pixels.data(), 784);
    lab.put(static_cast<char>(digits[i % digits.size()]));
  }
}

}  // namespace

TEST(Downsample, CropAndStrideArithmetic) {
  std::vector<std::uint8_t> pixels(28 * 28);
  for (std::size_t r = 0; r < 28; ++r) {
    for (std::size_t c = 0; c < 28; ++c) pixels[r * 28 + c] = static_cast<std::uint8_t>(r + 2 * c);
  }
  const auto out = downsample_image(pixels, 28, 28);
  ASSERT_EQ(out.size(), 64u);
  // Kept rows/cols are 6, 8, ..., 20; check ratios to undo the normalization.
  const double scale = out[0] / (6 + 2 * 6);
  EXPECT_NEAR(out[1] / scale, 6 + 2 * 8, 1e-9);
  EXPECT_NEAR(out[8] / scale, 8 + 2 * 6, 1e-9);
  EXPECT_NEAR(out[63] / scale, 20 + 2 * 20, 1e-9);
}

TEST(Downsample, EqualPixelsGiveOneEighth) {
  const std::vector<std::uint8_t> pixels(784, 200);
  for (double v : downsample_image(pixels, 28, 28)) EXPECT_NEAR(v, 0.125, 1e-15);
  EXPECT_THROW(downsample_image(std::vector<std::uint8_t>(784, 0), 28, 28), std::invalid_argument);
  EXPECT_THROW(downsample_image(pixels, 28, 27), std::invalid_argument);
}

TEST(Synthetic, DeterministicAndNormalized) {
  SyntheticConfig cfg;
  cfg.num_qubits = 3;
  const auto a = make_synthetic_dataset(cfg);
  const auto b = make_synthetic_dataset(cfg);
  ASSERT_EQ(a.train.size(), 200u);
  ASSERT_EQ(a.validation.size(), 100u);
  EXPECT_EQ(a.dimension(), 8u);
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train[i].features, b.train[i].features);
    EXPECT_EQ(a.train[i].label, b.train[i].label);
  }
  EXPECT_NO_THROW(a.validate());
  int pos = 0;
  for (const auto& s : a.train) pos += s.label == 1;
  EXPECT_EQ(pos, 100);
  cfg.seed = 8;
  EXPECT_NE(make_synthetic_dataset(cfg).train[0].features, a.train[0].features);
}

TEST(Dataset, ValidateRejectsBadInstances) {
  Dataset d;
  d.train.push_back({{1.0, 0.0}, 2});
  EXPECT_THROW(d.validate(), std::invalid_argument);
  d.train[0] = {{1.0, 1.0}, 1};
  EXPECT_THROW(d.validate(), std::invalid_argument);
}

TEST(Idx, ReadsBigEndianFiles) {
  const auto dir = temp_dir("idx");
  write_idx_pair(dir / "img", dir / "lab", 5, {3, 6, 1});
  const auto images = read_idx_images(dir / "img");
  EXPECT_EQ(images.count, 5u);
  EXPECT_EQ(images.rows, 28u);
  EXPECT_EQ(images.pixels.size(), 5u * 784u);
  EXPECT_EQ(images.pixels[784 * 2], 3);
  EXPECT_EQ(read_idx_labels(dir / "lab"), (std::vector<std::uint8_t>{3, 6, 1, 3, 6}));
  EXPECT_THROW(read_idx_images(dir / "lab"), std::runtime_error);
  EXPECT_THROW(read_idx_labels(dir / "missing"), std::runtime_error);
}

TEST(Mnist, SelectsDigitsAndSplits) {
  const auto dir = temp_dir("mnist");
  write_idx_pair(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", 30, {3, 6, 1});
  write_idx_pair(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", 12, {3, 6, 1});
  const auto d = load_mnist_dataset({dir, 3, 6, 4, 2});
  EXPECT_EQ(d.train.size(), 8u);
  EXPECT_EQ(d.validation.size(), 4u);
  EXPECT_EQ(d.dimension(), 64u);
  EXPECT_NO_THROW(d.validate());
  EXPECT_EQ(d.train[0].label, 1);
  EXPECT_EQ(d.train[1].label, -1);
  EXPECT_THROW(load_mnist_dataset({dir, 3, 6, 20, 2}), std::runtime_error);
  EXPECT_THROW(load_mnist_dataset({dir / "nope", 3, 6, 1, 1}), std::runtime_error);
}

TEST(Csv, RoundTrip) {
  const auto dir = temp_dir("csv");
  SyntheticConfig cfg;
  cfg.train_per_class = 5;
  cfg.validation_per_class = 3;
  const auto d = make_synthetic_dataset(cfg);
  write_dataset_csv(d, dir);
  const auto back = read_dataset_csv(dir);
  ASSERT_EQ(back.train.size(), d.train.size());
  ASSERT_EQ(back.validation.size(), d.validation.size());
  for (std::size_t i = 0; i < d.train.size(); ++i) {
    EXPECT_EQ(back.train[i].features, d.train[i].features);
    EXPECT_EQ(back.train[i].label, d.train[i].label);
  }
}

TEST(DataDirectory, EnvironmentOverride) {
  ::unsetenv("DSGD_DATA_DIR");
  EXPECT_EQ(data_directory("fallback"), std::filesystem::path("fallback"));
  ::setenv("DSGD_DATA_DIR", "/tmp/somewhere", 1);
  EXPECT_EQ(data_directory("fallback"), std::filesystem::path("/tmp/somewhere"));
  ::unsetenv("DSGD_DATA_DIR");
}
