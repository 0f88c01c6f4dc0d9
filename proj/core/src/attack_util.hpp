#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbc/attacks.hpp"
#include "rbc/error.hpp"

namespace rbc::detail {

inline void check_attack_input(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_dim())
    throw DimensionError("attack input has " + std::to_string(x.size()) +
                         " features, network expects " + std::to_string(net.input_dim()));
}

inline void check_target(const Network& net, std::size_t target) {
  if (target >= net.class_count())
    throw RangeError("target " + std::to_string(target) + " >= class count " +
                     std::to_string(net.class_count()));
}

inline double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline AttackOutcome make_outcome(std::span<const double> x, std::vector<double> adversarial,
                                  bool success, std::optional<std::size_t> target,
                                  std::size_t iterations) {
  AttackOutcome out;
  out.noise = noise_of(x, adversarial);
  out.adversarial = std::move(adversarial);
  out.success = success;
  out.target = target;
  out.iterations = iterations;
  return out;
}

inline AttackOutcome failure_at(std::span<const double> x, std::optional<std::size_t> target,
                                std::size_t iterations) {
  return make_outcome(x, std::vector<double>(x.begin(), x.end()), false, target, iterations);
}

/// Z_t - k > max_{i != t} Z_i, with the shared lowest-index tie rule.
inline bool reaches_target(const Vector& z, std::size_t target, double confidence) {
  Vector shifted = z;
  shifted[static_cast<Eigen::Index>(target)] -= confidence;
  return argmax(shifted) == target;
}

}  // namespace rbc::detail
