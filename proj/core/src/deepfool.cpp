#include <cmath>
#include <limits>

#include "attack_util.hpp"

namespace rbc {

AttackOutcome deepfool(const Network& net, std::span<const double> x, std::size_t max_iters,
                       double overshoot) {
  detail::check_attack_input(net, x);
  for (const double v : x)
    if (!std::isfinite(v)) throw ParameterError("deepfool input must be finite");
  if (!(overshoot >= 0.0)) throw ParameterError("deepfool overshoot must be non-negative");

  const std::size_t original = predict(net, x);
  const auto orig = static_cast<Eigen::Index>(original);
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Map<const Vector> x0(x.data(), n);
  Vector total = Vector::Zero(n);
  std::vector<double> current(x.begin(), x.end());
  std::size_t iters = 0;

  while (iters < max_iters) {
    const Vector z = logits(net, current);
    const RowMatrix jac = logit_jacobian(net, current);
    double best = std::numeric_limits<double>::infinity();
    Vector best_step;
    for (Eigen::Index k = 0; k < z.size(); ++k) {
      if (k == orig) continue;
      const Vector w = (jac.row(k) - jac.row(orig)).transpose();
      const double norm_sq = w.squaredNorm();
      if (!(norm_sq > 0.0)) continue;
      const double f = z[k] - z[orig];
      const double dist = std::abs(f) / std::sqrt(norm_sq);
      if (dist < best) {
        best = dist;
        best_step = (std::abs(f) / norm_sq) * w;
      }
    }
    if (best_step.size() == 0) break;

    total += best_step;
    ++iters;
    const Vector next = x0 + (1.0 + overshoot) * total;
    for (Eigen::Index i = 0; i < n; ++i)
      current[static_cast<std::size_t>(i)] = detail::clip01(next[i]);
    if (predict(net, current) != original) break;
  }

  const bool success = predict(net, current) != original;
  return detail::make_outcome(x, std::move(current), success, std::nullopt, iters);
}

}  // namespace rbc
