#include "rbc/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rbc/error.hpp"
#include "rbc/io.hpp"
#include "rbc/random.hpp"

namespace rbc {

namespace {

constexpr std::uint32_t kCacheVersion = 1;

std::uint8_t to_byte(double f) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(f, 0.0, 1.0) * 255.0));
}

}  // namespace

Dataset::Dataset(std::size_t feature_dim, std::size_t class_count)
    : feature_dim_(feature_dim), class_count_(class_count) {
  if (feature_dim == 0) throw ParameterError("dataset feature_dim must be positive");
  if (class_count == 0) throw ParameterError("dataset class_count must be positive");
}

Dataset::Dataset(std::size_t feature_dim, std::size_t class_count, std::vector<Example> examples)
    : Dataset(feature_dim, class_count) {
  for (const auto& e : examples) check(e);
  examples_ = std::move(examples);
}

void Dataset::add(Example example) {
  check(example);
  examples_.push_back(std::move(example));
}

void Dataset::check(const Example& example) const {
  if (example.features.size() != feature_dim_)
    throw DimensionError("example has " + std::to_string(example.features.size()) +
                         " features, dataset expects " + std::to_string(feature_dim_));
  if (example.label >= class_count_)
    throw RangeError("label " + std::to_string(example.label) + " >= class count " +
                     std::to_string(class_count_));
  for (const double f : example.features)
    if (!(f >= 0.0 && f <= 1.0)) throw RangeError("feature outside [0,1]: " + std::to_string(f));
}

ImageMatrix load_idx_images(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader in(bytes);
  const auto magic = in.u32_be();
  if (magic != kIdxImageMagic)
    throw FormatError(path.string() + ": IDX image magic " + std::to_string(magic) +
                      ", expected 2051");
  ImageMatrix m;
  m.count = in.u32_be();
  m.rows = in.u32_be();
  m.cols = in.u32_be();
  const std::size_t total = m.count * m.rows * m.cols;
  if (in.remaining() < total)
    throw LengthError(path.string() + ": header declares " + std::to_string(total) +
                      " pixel bytes, file holds " + std::to_string(in.remaining()));
  const auto pixels = in.take(total);
  m.values.resize(total);
  std::transform(pixels.begin(), pixels.end(), m.values.begin(),
                 [](std::uint8_t b) { return static_cast<double>(b) / 255.0; });
  return m;
}

std::vector<std::size_t> load_idx_labels(const std::filesystem::path& path,
                                         std::size_t class_count) {
  const auto bytes = read_file_bytes(path);
  ByteReader in(bytes);
  const auto magic = in.u32_be();
  if (magic != kIdxLabelMagic)
    throw FormatError(path.string() + ": IDX label magic " + std::to_string(magic) +
                      ", expected 2049");
  const std::size_t count = in.u32_be();
  if (in.remaining() < count)
    throw LengthError(path.string() + ": header declares " + std::to_string(count) +
                      " labels, file holds " + std::to_string(in.remaining()));
  const auto raw = in.take(count);
  std::vector<std::size_t> labels(raw.begin(), raw.end());
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] >= class_count)
      throw RangeError(path.string() + ": label " + std::to_string(labels[i]) + " at index " +
                       std::to_string(i) + " >= class count " + std::to_string(class_count));
  return labels;
}

Dataset make_dataset(const ImageMatrix& images, std::span<const std::size_t> labels,
                     std::size_t class_count) {
  if (images.count != labels.size())
    throw DimensionError(std::to_string(images.count) + " images but " +
                         std::to_string(labels.size()) + " labels");
  std::vector<Example> examples;
  examples.reserve(images.count);
  for (std::size_t i = 0; i < images.count; ++i) {
    const auto row = images.image(i);
    examples.push_back({std::vector<double>(row.begin(), row.end()), labels[i]});
  }
  return Dataset(images.feature_dim(), class_count, std::move(examples));
}

void write_idx_images(const std::filesystem::path& path, const Dataset& data, std::size_t rows,
                      std::size_t cols) {
  if (rows * cols != data.feature_dim())
    throw DimensionError("rows*cols does not match feature_dim");
  std::vector<std::uint8_t> out;
  out.reserve(16 + data.size() * data.feature_dim());
  auto be32 = [&out](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  be32(kIdxImageMagic);
  be32(static_cast<std::uint32_t>(data.size()));
  be32(static_cast<std::uint32_t>(rows));
  be32(static_cast<std::uint32_t>(cols));
  for (const auto& e : data)
    for (const double f : e.features) out.push_back(to_byte(f));
  write_file_atomic(path, out);
}

void write_idx_labels(const std::filesystem::path& path, const Dataset& data) {
  std::vector<std::uint8_t> out;
  auto be32 = [&out](std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  be32(kIdxLabelMagic);
  be32(static_cast<std::uint32_t>(data.size()));
  for (const auto& e : data) out.push_back(static_cast<std::uint8_t>(e.label));
  write_file_atomic(path, out);
}

Split split(const Dataset& pool, const Dataset& test_pool, const SplitSpec& spec) {
  if (spec.train_count + spec.validation_count > pool.size())
    throw CapacityError("split asks for " +
                        std::to_string(spec.train_count + spec.validation_count) +
                        " training-pool examples, pool holds " + std::to_string(pool.size()));
  if (spec.test_count > test_pool.size())
    throw CapacityError("split asks for " + std::to_string(spec.test_count) +
                        " test examples, test pool holds " + std::to_string(test_pool.size()));
  if (pool.feature_dim() != test_pool.feature_dim() ||
      pool.class_count() != test_pool.class_count())
    throw DimensionError("training and test pools disagree on shape");

  // Partial Fisher-Yates: position i receives a uniform draw from [i, size).
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < spec.validation_count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(order.size() - i));
    std::swap(order[i], order[j]);
  }

  Split out{Dataset(pool.feature_dim(), pool.class_count()),
            Dataset(pool.feature_dim(), pool.class_count()),
            Dataset(pool.feature_dim(), pool.class_count()),
            {}};
  out.validation_indices.assign(order.begin(),
                                order.begin() + static_cast<std::ptrdiff_t>(spec.validation_count));
  std::vector<bool> taken(pool.size(), false);
  for (const auto idx : out.validation_indices) {
    taken[idx] = true;
    out.validation.add(pool[idx]);
  }
  for (std::size_t i = 0; i < pool.size() && out.train.size() < spec.train_count; ++i)
    if (!taken[i]) out.train.add(pool[i]);
  for (std::size_t i = 0; i < spec.test_count; ++i) out.test.add(test_pool[i]);
  return out;
}

Dataset synth_blobs(std::size_t class_count, std::size_t per_class, std::size_t dim,
                    double separation, std::uint64_t seed, double stddev) {
  if (class_count < 2) throw ParameterError("synth_blobs needs at least 2 classes");
  if (dim < 1) throw ParameterError("synth_blobs needs dim >= 1");
  if (class_count > 2 * dim)
    throw ParameterError("synth_blobs places at most 2 * dim distinct centers");
  if (separation < 0.0 || stddev < 0.0) throw ParameterError("separation and stddev must be >= 0");

  Dataset data(dim, class_count);
  Rng rng(seed);
  for (std::size_t c = 0; c < class_count; ++c) {
    std::vector<double> center(dim, 0.5);
    const double sign = (c % 2 == 0) ? 1.0 : -1.0;
    center[(c / 2) % dim] += sign * separation / 2.0;
    for (std::size_t k = 0; k < per_class; ++k) {
      Example e{std::vector<double>(dim), c};
      for (std::size_t j = 0; j < dim; ++j)
        e.features[j] = std::clamp(center[j] + stddev * rng.normal(), 0.0, 1.0);
      data.add(std::move(e));
    }
  }
  return data;
}

void save_cache(const std::filesystem::path& path, const Dataset& data) {
  ByteWriter out;
  out.raw("RBCD");
  out.u32(kCacheVersion);
  out.u32(static_cast<std::uint32_t>(data.feature_dim()));
  out.u32(static_cast<std::uint32_t>(data.class_count()));
  out.u64(data.size());
  for (const auto& e : data)
    for (const double f : e.features) out.f32(static_cast<float>(f));
  for (const auto& e : data) out.u8(static_cast<std::uint8_t>(e.label));
  write_file_atomic(path, out.bytes());
}

Dataset load_cache(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader in(bytes);
  if (in.raw(4) != "RBCD") throw FormatError(path.string() + ": not a dataset cache");
  const auto version = in.u32();
  if (version != kCacheVersion)
    throw VersionError(path.string() + ": cache version " + std::to_string(version) +
                       ", expected " + std::to_string(kCacheVersion));
  const std::size_t dim = in.u32();
  const std::size_t classes = in.u32();
  const std::size_t count = in.u64();
  std::vector<Example> examples(count);
  for (auto& e : examples) {
    e.features.resize(dim);
    for (auto& f : e.features) f = static_cast<double>(in.f32());
  }
  for (auto& e : examples) e.label = in.u8();
  return Dataset(dim, classes, std::move(examples));
}

}  // namespace rbc
