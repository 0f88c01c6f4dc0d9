#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace rbc {

/// A point of the unit hypercube with its class label.
struct Example {
  std::vector<double> features;
  std::size_t label = 0;
};

/// Immutable-by-convention sequence of examples sharing a dimension and class count.
///
/// Every example is checked on insertion: length must equal feature_dim, every
/// feature must lie in [0, 1], and label < class_count.
class Dataset {
 public:
  Dataset(std::size_t feature_dim, std::size_t class_count);
  Dataset(std::size_t feature_dim, std::size_t class_count, std::vector<Example> examples);

  void add(Example example);

  std::size_t feature_dim() const noexcept { return feature_dim_; }
  std::size_t class_count() const noexcept { return class_count_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }

  const Example& operator[](std::size_t i) const { return examples_[i]; }
  std::span<const Example> examples() const noexcept { return examples_; }

  auto begin() const noexcept { return examples_.begin(); }
  auto end() const noexcept { return examples_.end(); }

 private:
  void check(const Example& example) const;

  std::size_t feature_dim_;
  std::size_t class_count_;
  std::vector<Example> examples_;
};

/// Rows of normalized pixels read from an IDX image file.
struct ImageMatrix {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // count * rows * cols, row-major per image

  std::size_t feature_dim() const noexcept { return rows * cols; }
  std::span<const double> image(std::size_t i) const {
    return std::span<const double>(values).subspan(i * feature_dim(), feature_dim());
  }
};

inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

/// Reads an IDX3 image file (optionally gzip-compressed). Byte b maps to b / 255.0.
ImageMatrix load_idx_images(const std::filesystem::path& path);

/// Reads an IDX1 label file (optionally gzip-compressed); every label must be < class_count.
std::vector<std::size_t> load_idx_labels(const std::filesystem::path& path,
                                         std::size_t class_count = 10);

/// Combines image rows and labels into a Dataset.
Dataset make_dataset(const ImageMatrix& images, std::span<const std::size_t> labels,
                     std::size_t class_count = 10);

/// Writes features as IDX3 bytes, round(f * 255). feature_dim must equal rows * cols.
void write_idx_images(const std::filesystem::path& path, const Dataset& data, std::size_t rows,
                      std::size_t cols);
void write_idx_labels(const std::filesystem::path& path, const Dataset& data);

struct SplitSpec {
  std::size_t train_count = 55000;
  std::size_t validation_count = 5000;
  std::size_t test_count = 10000;
  std::uint64_t seed = 0;
};

struct Split {
  Dataset train;
  Dataset validation;
  Dataset test;
  /// Pool indices drawn for validation, in draw order.
  std::vector<std::size_t> validation_indices;
};

/// Draws validation_count pool examples uniformly without replacement (seeded
/// partial Fisher-Yates), keeps the first train_count remaining pool examples in
/// pool order as train, and the first test_count examples of test_pool as test.
Split split(const Dataset& pool, const Dataset& test_pool, const SplitSpec& spec);

/// Gaussian blobs in [0,1]^dim, one per class, clipped to the cube.
///
/// Class c is centered at 0.5 + (separation / 2) * s_c * e_{floor(c/2) mod dim},
/// with s_c = +1 for even c and -1 for odd c, so classes 0 and 1 sit exactly
/// `separation` apart along the first axis. Requires 2 <= class_count <= 2 * dim.
Dataset synth_blobs(std::size_t class_count, std::size_t per_class, std::size_t dim,
                    double separation, std::uint64_t seed, double stddev = 0.1);

/// Flat binary dataset cache, little-endian:
///   "RBCD" | u32 version | u32 feature_dim | u32 class_count | u64 count
///   | count * feature_dim float32 features | count uint8 labels
void save_cache(const std::filesystem::path& path, const Dataset& data);
Dataset load_cache(const std::filesystem::path& path);

}  // namespace rbc
