#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rbc/dataset.hpp"
#include "rbc/network.hpp"

namespace rbc {

/// Per-class sample counts a_i(x, r); the counts sum to the sample size m.
struct VoteCounts {
  std::vector<std::size_t> counts;

  std::size_t total() const;
  friend bool operator==(const VoteCounts&, const VoteCounts&) = default;
};

/// Majority vote of a point classifier over m uniform samples of the box
/// B(x, r) = {y in [0,1]^n : |y_j - x_j| <= r}.
class RegionClassifier {
 public:
  RegionClassifier(std::shared_ptr<const Network> base, double r, std::size_t m,
                   std::uint64_t seed);

  const Network& base() const noexcept { return *base_; }
  std::shared_ptr<const Network> base_ptr() const noexcept { return base_; }
  double radius() const noexcept { return r_; }
  std::size_t samples() const noexcept { return m_; }
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::shared_ptr<const Network> base_;
  double r_;
  std::size_t m_;
  std::uint64_t seed_;
};

/// m points drawn coordinate-wise uniform on [max(0, x_j - r), min(1, x_j + r)]
/// from Rng(seed), sample by sample, coordinate by coordinate.
std::vector<std::vector<double>> sample_hypercube(std::span<const double> x, double r,
                                                  std::size_t m, std::uint64_t seed);

/// Votes of `base` over the samples sample_hypercube(x, r, m, seed) would
/// return. Samples are generated one at a time; the network runs exactly m times.
VoteCounts vote(const Network& base, std::span<const double> x, double r, std::size_t m,
                std::uint64_t seed);
VoteCounts vote(const RegionClassifier& rc, std::span<const double> x);

/// Same as vote() with an explicit sampling seed.
VoteCounts vote(const RegionClassifier& rc, std::span<const double> x, std::uint64_t seed);

/// argmax of the counts. On a tie the point prediction wins if it is among the
/// tied classes, otherwise the lowest tied index.
std::size_t decide(const VoteCounts& votes, std::size_t point_prediction);

/// decide(vote(rc, x), predict(base, x)); the point prediction is only
/// computed when the top count is tied.
std::size_t classify(const RegionClassifier& rc, std::span<const double> x);
std::size_t classify(const RegionClassifier& rc, std::span<const double> x, std::uint64_t seed);

/// The decision classify() would make with the same seed, but the vote stops
/// as soon as the leading class can no longer be overtaken.
std::size_t classify_early(const Network& base, std::span<const double> x, double r,
                           std::size_t m, std::uint64_t seed);

/// Label histogram of the measurement study; vote() with its own default m.
VoteCounts label_histogram(const Network& base, std::span<const double> x, double r,
                           std::size_t m = 10000, std::uint64_t seed = 0);

/// Region accuracy on `data`, example i sampled with derive_seed(seed, {i}).
double region_accuracy(const Network& base, const Dataset& data, double r, std::size_t m,
                       std::uint64_t seed, std::size_t threads = 1);

struct RadiusStep {
  double r = 0.0;
  double region_accuracy = 0.0;
};

struct RadiusSearch {
  double radius = 0.0;
  double point_accuracy = 0.0;
  /// Region accuracy at the returned radius.
  double region_accuracy = 0.0;
  /// Every radius tried. The failing entry holds an upper bound that is already
  /// below point_accuracy: evaluation stops once the comparison is decided.
  std::vector<RadiusStep> steps;
};

/// Grows r = r0 + k * step while region validation accuracy >= point accuracy
/// and returns the last radius that passed, or r0 if none did. Every radius
/// samples example i with derive_seed(seed, {i}). The search stops before r
/// exceeds 1, where the box covers the whole cube.
RadiusSearch learn_radius(const Network& base, const Dataset& validation, std::size_t m,
                          double r0, double step, std::uint64_t seed, std::size_t threads = 1);

}  // namespace rbc
