#include <cmath>
#include <string>

#include "attack_util.hpp"

namespace rbc {

std::string_view to_string(NoiseMetric metric) {
  switch (metric) {
    case NoiseMetric::l0: return "l0";
    case NoiseMetric::l2: return "l2";
    case NoiseMetric::linf: return "linf";
  }
  return "unknown";
}

NoiseMetric parse_noise_metric(std::string_view name) {
  if (name == "l0") return NoiseMetric::l0;
  if (name == "l2") return NoiseMetric::l2;
  if (name == "linf") return NoiseMetric::linf;
  throw ParameterError("unknown noise metric '" + std::string(name) +
                       "' (expected l0, l2 or linf)");
}

double Noise::get(NoiseMetric metric) const {
  switch (metric) {
    case NoiseMetric::l0: return static_cast<double>(l0);
    case NoiseMetric::l2: return l2;
    case NoiseMetric::linf: return linf;
  }
  return l2;
}

Noise noise_of(std::span<const double> original, std::span<const double> adversarial) {
  if (original.size() != adversarial.size())
    throw DimensionError("noise_of: lengths " + std::to_string(original.size()) + " and " +
                         std::to_string(adversarial.size()) + " differ");
  Noise n;
  double sq = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double d = std::abs(adversarial[i] - original[i]);
    if (d > kL0Threshold) ++n.l0;
    sq += d * d;
    n.linf = std::max(n.linf, d);
  }
  n.l2 = std::sqrt(sq);
  return n;
}

std::vector<double> adapt(const AttackOutcome& outcome, std::span<const double> x, double alpha) {
  if (!outcome.success) throw ParameterError("adapt requires a successful outcome");
  if (!(alpha >= 0.0)) throw ParameterError("adapt requires alpha >= 0");
  if (outcome.adversarial.size() != x.size()) throw DimensionError("adapt: length mismatch");
  if (alpha == 0.0) return outcome.adversarial;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = detail::clip01(x[i] + (1.0 + alpha) * (outcome.adversarial[i] - x[i]));
  return out;
}

}  // namespace rbc
