#include <vector>

#include "attack_util.hpp"

namespace rbc {

namespace {

// A pixel pushed toward one bound: +1 saturates to 1, -1 to 0.
struct Move {
  std::size_t pixel;
  double direction;
  double alpha;  // d Z_t along the move
  double beta;   // d sum_{i != t} Z_i along the move
};

}  // namespace

AttackOutcome t_jsma(const Network& net, std::span<const double> x, std::size_t target,
                     std::size_t max_l0) {
  detail::check_attack_input(net, x);
  detail::check_target(net, target);
  const std::size_t n = x.size();
  const auto t = static_cast<Eigen::Index>(target);

  std::vector<double> current(x.begin(), x.end());
  std::vector<bool> in_domain(n, true);
  std::size_t changed = 0;
  std::size_t rounds = 0;
  std::vector<Move> moves;
  moves.reserve(2 * n);

  while (predict(net, current) != target) {
    const std::size_t budget = max_l0 - changed;
    if (budget == 0) break;
    const RowMatrix jac = logit_jacobian(net, current);
    const Vector others = jac.colwise().sum().transpose() - jac.row(t).transpose();

    moves.clear();
    for (std::size_t p = 0; p < n; ++p) {
      if (!in_domain[p]) continue;
      const auto i = static_cast<Eigen::Index>(p);
      if (current[p] < 1.0) moves.push_back({p, 1.0, jac(t, i), others[i]});
      if (current[p] > 0.0) moves.push_back({p, -1.0, -jac(t, i), -others[i]});
    }

    double best_score = 0.0;
    std::ptrdiff_t best_a = -1;
    std::ptrdiff_t best_b = -1;
    for (std::size_t a = 0; a < moves.size(); ++a) {
      const Move& m = moves[a];
      if (m.alpha > 0.0 && m.beta < 0.0 && m.alpha * -m.beta > best_score) {
        best_score = m.alpha * -m.beta;
        best_a = static_cast<std::ptrdiff_t>(a);
        best_b = -1;
      }
    }
    if (budget >= 2) {
      for (std::size_t a = 0; a < moves.size(); ++a) {
        for (std::size_t b = a + 1; b < moves.size(); ++b) {
          if (moves[a].pixel == moves[b].pixel) continue;
          const double alpha = moves[a].alpha + moves[b].alpha;
          const double beta = moves[a].beta + moves[b].beta;
          if (alpha > 0.0 && beta < 0.0 && alpha * -beta > best_score) {
            best_score = alpha * -beta;
            best_a = static_cast<std::ptrdiff_t>(a);
            best_b = static_cast<std::ptrdiff_t>(b);
          }
        }
      }
    }
    if (best_a < 0) break;

    ++rounds;
    for (const std::ptrdiff_t k : {best_a, best_b}) {
      if (k < 0) continue;
      const Move& m = moves[static_cast<std::size_t>(k)];
      current[m.pixel] = m.direction > 0.0 ? 1.0 : 0.0;
      in_domain[m.pixel] = false;
      if (current[m.pixel] != x[m.pixel]) ++changed;
    }
  }

  const bool success = predict(net, current) == target;
  if (!success) return detail::failure_at(x, target, rounds);
  return detail::make_outcome(x, std::move(current), true, target, rounds);
}

}  // namespace rbc
