#include <cmath>

#include "attack_util.hpp"

namespace rbc {

namespace {

void check_grid(std::span<const double> eps_grid) {
  if (eps_grid.empty()) throw ParameterError("epsilon grid must not be empty");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] >= 0.0) || !std::isfinite(eps_grid[i]))
      throw ParameterError("epsilon values must be finite and non-negative");
    if (i > 0 && eps_grid[i] < eps_grid[i - 1])
      throw ParameterError("epsilon grid must be ascending");
  }
}

// Clamps v into [center - eps, center + eps] such that |v - center| <= eps holds
// in floating point, not just in exact arithmetic.
double project_linf(double v, double center, double eps) {
  v = std::clamp(v, center - eps, center + eps);
  while (std::abs(v - center) > eps) v = std::nextafter(v, center);
  return v;
}

}  // namespace

std::vector<double> default_eps_grid() {
  std::vector<double> grid(256);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = static_cast<double>(k + 1) / 256.0;
  return grid;
}

AttackOutcome t_fgsm(const Network& net, std::span<const double> x, std::size_t target,
                     std::span<const double> eps_grid) {
  detail::check_attack_input(net, x);
  detail::check_target(net, target);
  check_grid(eps_grid);
  const Vector grad = input_gradient(net, x, target);
  std::vector<double> candidate(x.size());
  std::size_t tried = 0;
  for (const double eps : eps_grid) {
    ++tried;
    for (std::size_t j = 0; j < x.size(); ++j)
      candidate[j] =
          detail::clip01(x[j] - eps * detail::sign(grad[static_cast<Eigen::Index>(j)]));
    if (predict(net, candidate) == target)
      return detail::make_outcome(x, candidate, true, target, tried);
  }
  return detail::failure_at(x, target, tried);
}

AttackOutcome t_igsm(const Network& net, std::span<const double> x, std::size_t target,
                     std::span<const double> eps_grid, double step, std::size_t max_iters,
                     const IterateObserver& observer) {
  detail::check_attack_input(net, x);
  detail::check_target(net, target);
  check_grid(eps_grid);
  if (!(step > 0.0)) throw ParameterError("IGSM step must be positive");
  if (predict(net, x) == target)
    return detail::make_outcome(x, {x.begin(), x.end()}, true, target, 0);

  std::size_t total_steps = 0;
  std::vector<double> current(x.size());
  for (const double eps : eps_grid) {
    current.assign(x.begin(), x.end());
    for (std::size_t it = 0; it < max_iters; ++it) {
      const Vector grad = input_gradient(net, current, target);
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double moved = current[j] - step * detail::sign(grad[static_cast<Eigen::Index>(j)]);
        current[j] = detail::clip01(project_linf(moved, x[j], eps));
      }
      ++total_steps;
      if (observer) observer(current, eps);
      if (predict(net, current) == target)
        return detail::make_outcome(x, current, true, target, total_steps);
    }
  }
  return detail::failure_at(x, target, total_steps);
}

}  // namespace rbc
