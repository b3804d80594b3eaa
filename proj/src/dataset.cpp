#include "dsgd/dataset.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dsgd/rng.hpp"

namespace dsgd {

namespace {

constexpr double kNormTolerance = 1e-8;
constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

void normalize(std::vector<double>& v) {
  double n2 = 0.0;
  for (double x : v) n2 += x * x;
  if (!(n2 > 0.0)) throw std::invalid_argument("cannot normalize a zero vector");
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : v) x *= inv;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<char>& bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw std::runtime_error("truncated IDX header");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    v = (v << 8) | static_cast<std::uint8_t>(bytes[offset + i]);
  }
  return v;
}

}  // namespace

std::size_t Dataset::dimension() const {
  if (!train.empty()) return train.front().features.size();
  if (!validation.empty()) return validation.front().features.size();
  return 0;
}

void Dataset::validate() const {
  const std::size_t dim = dimension();
  for (const auto* split : {&train, &validation}) {
    for (const auto& s : *split) {
      if (s.label != 1 && s.label != -1) throw std::invalid_argument("label is not +-1");
      if (s.features.size() != dim) throw std::invalid_argument("feature vectors differ in length");
      double n2 = 0.0;
      for (double x : s.features) n2 += x * x;
      if (std::abs(std::sqrt(n2) - 1.0) > kNormTolerance) {
        throw std::invalid_argument("feature vector is not unit norm");
      }
    }
  }
}

Dataset make_synthetic_dataset(const SyntheticConfig& config) {
  if (config.num_qubits < 1 || config.num_qubits > 12) {
    throw std::invalid_argument("synthetic dataset qubit count out of range");
  }
  if (config.train_per_class == 0 || config.validation_per_class == 0) {
    throw std::invalid_argument("synthetic dataset needs instances in both splits");
  }
  if (!(config.noise >= 0.0)) throw std::invalid_argument("noise must be nonnegative");

  const std::size_t dim = std::size_t{1} << config.num_qubits;
  RngStream rng(config.seed);
  RngStream mean_rng = rng.split(1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> pos(dim), neg(dim);
  for (auto& x : pos) x = gauss(mean_rng);
  normalize(pos);
  for (auto& x : neg) x = gauss(mean_rng);
  const double overlap = dot(pos, neg);
  for (std::size_t i = 0; i < dim; ++i) neg[i] -= overlap * pos[i];
  normalize(neg);

  auto draw = [&](RngStream& r, int label) {
    const auto& own = label > 0 ? pos : neg;
    const auto& other = label > 0 ? neg : pos;
    for (;;) {
      std::vector<double> x(dim);
      for (std::size_t i = 0; i < dim; ++i) x[i] = own[i] + config.noise * gauss(r);
      normalize(x);
      if (std::abs(dot(x, own)) > std::abs(dot(x, other))) return LabeledSample{std::move(x), label};
    }
  };

  Dataset data;
  auto fill = [&](std::vector<LabeledSample>& split, std::size_t per_class, std::uint64_t tag) {
    RngStream r = rng.split(tag);
    for (std::size_t i = 0; i < per_class; ++i) {
      split.push_back(draw(r, 1));
      split.push_back(draw(r, -1));
    }
  };
  fill(data.train, config.train_per_class, 2);
  fill(data.validation, config.validation_per_class, 3);
  return data;
}

IdxImages read_idx_images(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (read_be32(bytes, 0) != kImageMagic) {
    throw std::runtime_error(path.string() + " is not an IDX image file");
  }
  IdxImages images;
  images.count = read_be32(bytes, 4);
  images.rows = read_be32(bytes, 8);
  images.cols = read_be32(bytes, 12);
  const std::size_t n = images.count * images.rows * images.cols;
  if (bytes.size() < 16 + n) throw std::runtime_error(path.string() + " is truncated");
  images.pixels.assign(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(n));
  return images;
}

std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (read_be32(bytes, 0) != kLabelMagic) {
    throw std::runtime_error(path.string() + " is not an IDX label file");
  }
  const std::size_t n = read_be32(bytes, 4);
  if (bytes.size() < 8 + n) throw std::runtime_error(path.string() + " is truncated");
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n)};
}

std::vector<double> downsample_image(std::span<const std::uint8_t> pixels, std::size_t rows,
                                     std::size_t cols, std::size_t crop) {
  if (pixels.size() != rows * cols) throw std::invalid_argument("pixel count does not match shape");
  if (2 * crop >= rows || 2 * crop >= cols) throw std::invalid_argument("crop removes the image");
  std::vector<double> out;
  for (std::size_t r = crop; r < rows - crop; r += 2) {
    for (std::size_t c = crop; c < cols - crop; c += 2) {
      out.push_back(static_cast<double>(pixels[r * cols + c]));
    }
  }
  normalize(out);
  return out;
}

Dataset load_mnist_dataset(const MnistConfig& config) {
  if (config.positive_digit == config.negative_digit) {
    throw std::invalid_argument("positive and negative digits must differ");
  }
  auto collect = [&](const char* images_name, const char* labels_name, std::size_t per_class,
                     std::vector<LabeledSample>& out) {
    const auto images = read_idx_images(config.dir / images_name);
    const auto labels = read_idx_labels(config.dir / labels_name);
    if (labels.size() != images.count) {
      throw std::runtime_error(std::string(images_name) + " and " + labels_name +
                               " disagree on the instance count");
    }
    const std::size_t pixels = images.rows * images.cols;
    std::size_t pos = 0, neg = 0;
    for (std::size_t i = 0; i < images.count && (pos < per_class || neg < per_class); ++i) {
      const int digit = labels[i];
      int label = 0;
      if (digit == config.positive_digit && pos < per_class) {
        label = 1;
        ++pos;
      } else if (digit == config.negative_digit && neg < per_class) {
        label = -1;
        ++neg;
      } else {
        continue;
      }
      std::span<const std::uint8_t> img(images.pixels.data() + i * pixels, pixels);
      out.push_back({downsample_image(img, images.rows, images.cols), label});
    }
    if (pos < per_class || neg < per_class) {
      throw std::runtime_error(std::string(images_name) + " has too few instances of the chosen digits");
    }
  };
  Dataset data;
  collect("train-images-idx3-ubyte", "train-labels-idx1-ubyte", config.train_per_class, data.train);
  collect("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", config.validation_per_class,
          data.validation);
  return data;
}

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [&](const std::vector<LabeledSample>& split, const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out.precision(17);
    for (const auto& s : split) {
      for (double x : s.features) out << x << ',';
      out << s.label << '\n';
    }
  };
  write(dataset.train, "train.csv");
  write(dataset.validation, "validation.csv");
}

Dataset read_dataset_csv(const std::filesystem::path& dir) {
  auto read = [&](const char* name) {
    std::ifstream in(dir / name);
    if (!in) throw std::runtime_error("cannot open " + (dir / name).string());
    std::vector<LabeledSample> split;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> values;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
      if (values.size() < 2) throw std::runtime_error("malformed row in " + std::string(name));
      const int label = static_cast<int>(values.back());
      values.pop_back();
      split.push_back({std::move(values), label});
    }
    return split;
  };
  Dataset data{read("train.csv"), read("validation.csv")};
  data.validate();
  return data;
}

std::filesystem::path data_directory(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("DSGD_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return fallback;
}

}  // namespace dsgd
