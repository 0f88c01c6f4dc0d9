#include "rbc/region.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <string>

#include "rbc/error.hpp"
#include "rbc/parallel.hpp"
#include "rbc/random.hpp"

namespace rbc {

namespace {

void check_point(std::span<const double> x, double r, std::size_t m) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError("region length r must be >= 0");
  if (m == 0) throw ParameterError("region sample count m must be positive");
  for (const double v : x)
    if (!(v >= 0.0 && v <= 1.0)) throw RangeError("region center must lie in [0,1]^n");
}

// Streams the samples of B(x, r) in the order sample_hypercube returns them.
class BoxSampler {
 public:
  BoxSampler(std::span<const double> x, double r, std::uint64_t seed)
      : rng_(seed), lo_(x.size()), hi_(x.size()), sample_(x.size()) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      lo_[j] = std::max(0.0, x[j] - r);
      hi_[j] = std::min(1.0, x[j] + r);
    }
  }

  std::span<const double> next() {
    for (std::size_t j = 0; j < sample_.size(); ++j) sample_[j] = rng_.uniform(lo_[j], hi_[j]);
    return sample_;
  }

 private:
  Rng rng_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<double> sample_;
};

}  // namespace

std::size_t VoteCounts::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

RegionClassifier::RegionClassifier(std::shared_ptr<const Network> base, double r, std::size_t m,
                                   std::uint64_t seed)
    : base_(std::move(base)), r_(r), m_(m), seed_(seed) {
  if (!base_) throw ParameterError("region classifier needs a base network");
  if (!(r >= 0.0) || !std::isfinite(r)) throw ParameterError("region length r must be >= 0");
  if (m == 0) throw ParameterError("region sample count m must be positive");
}

std::vector<std::vector<double>> sample_hypercube(std::span<const double> x, double r,
                                                  std::size_t m, std::uint64_t seed) {
  check_point(x, r, m);
  BoxSampler sampler(x, r, seed);
  std::vector<std::vector<double>> out;
  out.reserve(m);
  for (std::size_t s = 0; s < m; ++s) {
    const auto sample = sampler.next();
    out.emplace_back(sample.begin(), sample.end());
  }
  return out;
}

VoteCounts vote(const Network& base, std::span<const double> x, double r, std::size_t m,
                std::uint64_t seed) {
  if (x.size() != base.input_dim())
    throw DimensionError("region input has " + std::to_string(x.size()) +
                         " features, network expects " + std::to_string(base.input_dim()));
  check_point(x, r, m);
  BoxSampler sampler(x, r, seed);
  VoteCounts votes{std::vector<std::size_t>(base.class_count(), 0)};
  for (std::size_t s = 0; s < m; ++s) ++votes.counts[predict(base, sampler.next())];
  return votes;
}

VoteCounts vote(const RegionClassifier& rc, std::span<const double> x) {
  return vote(rc.base(), x, rc.radius(), rc.samples(), rc.seed());
}

VoteCounts vote(const RegionClassifier& rc, std::span<const double> x, std::uint64_t seed) {
  return vote(rc.base(), x, rc.radius(), rc.samples(), seed);
}

std::size_t decide(const VoteCounts& votes, std::size_t point_prediction) {
  if (votes.counts.empty()) throw ParameterError("cannot decide on empty vote counts");
  const std::size_t top = *std::max_element(votes.counts.begin(), votes.counts.end());
  if (point_prediction < votes.counts.size() && votes.counts[point_prediction] == top)
    return point_prediction;
  return static_cast<std::size_t>(
      std::find(votes.counts.begin(), votes.counts.end(), top) - votes.counts.begin());
}

std::size_t classify(const RegionClassifier& rc, std::span<const double> x, std::uint64_t seed) {
  const VoteCounts votes = vote(rc, x, seed);
  const std::size_t top = *std::max_element(votes.counts.begin(), votes.counts.end());
  if (std::count(votes.counts.begin(), votes.counts.end(), top) > 1)
    return decide(votes, predict(rc.base(), x));
  return decide(votes, votes.counts.size());
}

std::size_t classify(const RegionClassifier& rc, std::span<const double> x) {
  return classify(rc, x, rc.seed());
}

std::size_t classify_early(const Network& base, std::span<const double> x, double r, std::size_t m,
                         std::uint64_t seed) {
  if (x.size() != base.input_dim())
    throw DimensionError("region input has " + std::to_string(x.size()) +
                         " features, network expects " + std::to_string(base.input_dim()));
  check_point(x, r, m);
  BoxSampler sampler(x, r, seed);
  VoteCounts votes{std::vector<std::size_t>(base.class_count(), 0)};
  for (std::size_t s = 0; s < m; ++s) {
    ++votes.counts[predict(base, sampler.next())];
    std::size_t first = 0, second = 0;
    for (const auto c : votes.counts) {
      if (c > first) {
        second = first;
        first = c;
      } else if (c > second) {
        second = c;
      }
    }
    if (first - second > m - s - 1) break;
  }
  const std::size_t top = *std::max_element(votes.counts.begin(), votes.counts.end());
  const auto tied = std::count(votes.counts.begin(), votes.counts.end(), top);
  return decide(votes, tied > 1 ? predict(base, x) : 0);
}

VoteCounts label_histogram(const Network& base, std::span<const double> x, double r,
                           std::size_t m, std::uint64_t seed) {
  return vote(base, x, r, m, seed);
}

double region_accuracy(const Network& base, const Dataset& data, double r, std::size_t m,
                       std::uint64_t seed, std::size_t threads) {
  if (data.empty()) throw ParameterError("accuracy of an empty dataset is undefined");
  check_point({}, r, m);
  std::vector<char> correct(data.size(), 0);
  parallel_for(data.size(), threads, [&](std::size_t i) {
    correct[i] = classify_early(base, data[i].features, r, m, derive_seed(seed, {i})) ==
                 data[i].label;
  });
  const auto hits = std::count(correct.begin(), correct.end(), char{1});
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

RadiusSearch learn_radius(const Network& base, const Dataset& validation, std::size_t m,
                          double r0, double step, std::uint64_t seed, std::size_t threads) {
  if (validation.empty()) throw ParameterError("learn_radius needs a non-empty validation set");
  if (!(r0 >= 0.0) || !std::isfinite(r0)) throw ParameterError("r0 must be finite and >= 0");
  if (!(step > 0.0) || !std::isfinite(step)) throw ParameterError("step must be positive");
  if (m == 0) throw ParameterError("region sample count m must be positive");

  const std::size_t n = validation.size();
  std::size_t point_correct = 0;
  for (const auto& e : validation)
    if (predict(base, e.features) == e.label) ++point_correct;
  const std::size_t allowed_errors = n - point_correct;

  RadiusSearch result;
  result.point_accuracy = static_cast<double>(point_correct) / static_cast<double>(n);
  result.radius = r0;

  for (std::size_t k = 0;; ++k) {
    const double r = r0 + static_cast<double>(k) * step;
    if (k > 0 && r > 1.0) break;
    std::atomic<std::size_t> errors{0};
    std::atomic<bool> failed{false};
    parallel_for(n, threads, [&](std::size_t i) {
      if (failed.load(std::memory_order_relaxed)) return;
      const auto& e = validation[i];
      if (classify_early(base, e.features, r, m, derive_seed(seed, {i})) != e.label &&
          errors.fetch_add(1) + 1 > allowed_errors)
        failed.store(true);
    });
    const double acc =
        static_cast<double>(n - std::min(n, errors.load())) / static_cast<double>(n);
    result.steps.push_back({r, acc});
    if (failed.load()) {
      if (k == 0) result.region_accuracy = acc;
      break;
    }
    result.radius = r;
    result.region_accuracy = acc;
  }
  return result;
}

}  // namespace rbc
