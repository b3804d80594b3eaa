#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace dsgd {

struct LabeledSample {
  std::vector<double> features;  // unit 2-norm
  int label = 1;                  // +1 or -1
};

struct Dataset {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> validation;

  std::size_t dimension() const;
  /// Throws std::invalid_argument unless every label is +-1, every feature
  /// vector has the same length and unit norm (within 1e-8).
  void validate() const;
};

/// Two Gaussian clusters around orthogonal random unit means on the unit
/// sphere of dimension 2^num_qubits. Class +1 belongs to the first mean.
/// Points closer (by overlap) to the wrong mean are redrawn, so the classes
/// are separable. Fully determined by the seed.
struct SyntheticConfig {
  int num_qubits = 2;
  std::size_t train_per_class = 100;
  std::size_t validation_per_class = 50;
  double noise = 0.25;
  std::uint64_t seed = 7;
};

Dataset make_synthetic_dataset(const SyntheticConfig& config);

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols, row-major
};

/// Reads an uncompressed IDX image file (magic 0x00000803).
IdxImages read_idx_images(const std::filesystem::path& path);
/// Reads an uncompressed IDX label file (magic 0x00000801).
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

/// Crops `crop` pixels from every border, keeps even rows and columns of what
/// remains, flattens row-major and normalizes to unit 2-norm. 28x28 with
/// crop 6 gives 8x8 = 64 features. Throws on an all-zero result.
std::vector<double> downsample_image(std::span<const std::uint8_t> pixels, std::size_t rows,
                                     std::size_t cols, std::size_t crop = 6);

/// Binary 3-vs-6 style dataset from the four standard MNIST files in `dir`
/// (train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte,
/// t10k-labels-idx1-ubyte). Training instances come from the training files,
/// validation instances from the test files, taking the first N of each class.
struct MnistConfig {
  std::filesystem::path dir;
  int positive_digit = 3;
  int negative_digit = 6;
  std::size_t train_per_class = 2000;
  std::size_t validation_per_class = 200;
};

Dataset load_mnist_dataset(const MnistConfig& config);

/// Writes train.csv and validation.csv (features..., label per row).
void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset_csv(const std::filesystem::path& dir);

/// Directory named by DSGD_DATA_DIR, else `fallback`.
std::filesystem::path data_directory(const std::filesystem::path& fallback = "data");

}  // namespace dsgd
