#include <cmath>
#include <limits>
#include <numeric>

#include "attack_util.hpp"

namespace rbc {

namespace {

constexpr double kTanhScale = 0.999999;
// Coordinates this close to x after a solve are set back to x when the result
// still reaches the target; the tanh parametrization cannot hit x exactly.
constexpr double kSnap = 1e-6;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

enum class Distance { l2, linf };

struct Solve {
  std::vector<double> best;
  double best_distance = std::numeric_limits<double>::infinity();
  bool success = false;
  bool finite = true;
  std::size_t steps = 0;
};

double to_tanh_space(double v) { return std::atanh((2.0 * v - 1.0) * kTanhScale); }

double distance_of(std::span<const double> x, std::span<const double> adv, Distance d) {
  const Noise n = noise_of(x, adv);
  return d == Distance::l2 ? n.l2 : n.linf;
}

std::size_t strongest_other(const Vector& z, std::size_t target) {
  std::size_t best = target == 0 ? 1 : 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(z.size()); ++i)
    if (i != target && z[static_cast<Eigen::Index>(i)] > z[static_cast<Eigen::Index>(best)])
      best = i;
  return best;
}

// Adam on w for min dist(x', x) + c * max(max_{i != t} Z_i - Z_t, -k), with
// x' = tanh(w) / 2 + 1/2 on the free coordinates and x' = x on pinned ones.
// dist is ||x' - x||_2^2 or sum_i (|x'_i - x_i| - tau)^+.
Solve inner_solve(const Network& net, std::span<const double> x, std::size_t target,
                  const CwConfig& cfg, double c, Distance dist, double tau,
                  std::span<const double> start, const std::vector<bool>& pinned) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!pinned[i]) free.push_back(i);
  std::vector<double> w(free.size()), m(free.size(), 0.0), v(free.size(), 0.0);
  for (std::size_t k = 0; k < free.size(); ++k) w[k] = to_tanh_space(start[free[k]]);

  std::vector<double> adv(x.begin(), x.end());
  std::vector<double> th(free.size());
  const std::size_t check_every = std::max<std::size_t>(1, cfg.inner_iterations / 10);
  double previous = std::numeric_limits<double>::max();
  double b1 = 1.0, b2 = 1.0;
  Solve out;

  for (std::size_t step = 0;; ++step) {
    for (std::size_t k = 0; k < free.size(); ++k) {
      th[k] = std::tanh(w[k]);
      adv[free[k]] = detail::clip01(th[k] * 0.5 + 0.5);
    }
    const ForwardTrace trace = forward(net, adv);
    const std::size_t other = strongest_other(trace.logits, target);
    const double margin = trace.logits[static_cast<Eigen::Index>(other)] -
                          trace.logits[static_cast<Eigen::Index>(target)];
    const bool active = margin > -cfg.confidence;
    double d = 0.0;
    for (const std::size_t i : free) {
      const double delta = adv[i] - x[i];
      d += dist == Distance::l2 ? delta * delta : std::max(0.0, std::abs(delta) - tau);
    }
    const double loss = d + c * std::max(margin, -cfg.confidence);
    if (!std::isfinite(loss)) {
      out.finite = false;
      break;
    }
    if (detail::reaches_target(trace.logits, target, cfg.confidence)) {
      const double measured = distance_of(x, adv, dist);
      if (measured < out.best_distance) {
        out.best_distance = measured;
        out.best = adv;
        out.success = true;
      }
    }
    if (step == cfg.inner_iterations) break;
    if (cfg.abort_early && step % check_every == 0) {
      if (loss > previous * 0.9999) break;
      previous = loss;
    }

    Vector grad_f;
    if (active) {
      Vector dlogits = Vector::Zero(trace.logits.size());
      dlogits[static_cast<Eigen::Index>(other)] = 1.0;
      dlogits[static_cast<Eigen::Index>(target)] = -1.0;
      grad_f = backprop_input(net, trace, dlogits);
    }
    b1 *= kAdamBeta1;
    b2 *= kAdamBeta2;
    const double lr = cfg.inner_learning_rate * std::sqrt(1.0 - b2) / (1.0 - b1);
    for (std::size_t k = 0; k < free.size(); ++k) {
      const std::size_t i = free[k];
      const double delta = adv[i] - x[i];
      double g = 0.0;
      if (dist == Distance::l2)
        g = 2.0 * delta;
      else if (std::abs(delta) > tau)
        g = detail::sign(delta);
      if (active) g += c * grad_f[static_cast<Eigen::Index>(i)];
      g *= 0.5 * (1.0 - th[k] * th[k]);
      m[k] = kAdamBeta1 * m[k] + (1.0 - kAdamBeta1) * g;
      v[k] = kAdamBeta2 * v[k] + (1.0 - kAdamBeta2) * g * g;
      w[k] -= lr * m[k] / (std::sqrt(v[k]) + kAdamEps);
    }
    ++out.steps;
  }
  return out;
}

// Pulls near-x coordinates back onto x if the target is still reached.
std::vector<double> snap(std::span<const double> x, std::vector<double> adv, std::size_t target,
                         double confidence, const Network& net) {
  std::vector<double> snapped = adv;
  bool changed = false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (snapped[i] != x[i] && std::abs(snapped[i] - x[i]) <= kSnap) {
      snapped[i] = x[i];
      changed = true;
    }
  }
  if (changed && detail::reaches_target(logits(net, snapped), target, confidence)) return snapped;
  return adv;
}

bool already_there(const Network& net, std::span<const double> x, std::size_t target,
                   const CwConfig& cfg) {
  return detail::reaches_target(logits(net, x), target, cfg.confidence);
}

}  // namespace

void CwConfig::validate() const {
  if (!(confidence >= 0.0) || !std::isfinite(confidence))
    throw ParameterError("CW confidence must be finite and non-negative");
  if (!(c_min > 0.0) || !(c_max > c_min) || !std::isfinite(c_max))
    throw ParameterError("CW constants need 0 < c_min < c_max");
  if (binary_search_steps == 0) throw ParameterError("CW binary_search_steps must be positive");
  if (inner_iterations == 0) throw ParameterError("CW inner_iterations must be positive");
  if (!(inner_learning_rate > 0.0) || !std::isfinite(inner_learning_rate))
    throw ParameterError("CW inner_learning_rate must be positive");
  if (l0_fix_per_round == 0) throw ParameterError("CW l0_fix_per_round must be positive");
}

AttackOutcome t_cw_l2(const Network& net, std::span<const double> x, std::size_t target,
                      const CwConfig& cfg) {
  detail::check_attack_input(net, x);
  detail::check_target(net, target);
  cfg.validate();
  if (already_there(net, x, target, cfg))
    return detail::make_outcome(x, {x.begin(), x.end()}, true, target, 0);

  const std::vector<bool> pinned(x.size(), false);
  double lower = 0.0;
  double upper = cfg.c_max;
  double c = cfg.c_min;
  bool found = false;
  std::vector<double> best;
  double best_l2 = std::numeric_limits<double>::infinity();
  std::size_t steps = 0;

  for (std::size_t round = 0; round < cfg.binary_search_steps; ++round) {
    const Solve s = inner_solve(net, x, target, cfg, c, Distance::l2, 0.0, x, pinned);
    steps += s.steps;
    if (s.finite && s.success) {
      if (s.best_distance < best_l2) {
        best_l2 = s.best_distance;
        best = s.best;
      }
      found = true;
      upper = std::min(upper, c);
      c = 0.5 * (lower + upper);
    } else {
      lower = std::max(lower, c);
      c = found ? 0.5 * (lower + upper) : c * 10.0;
      if (c > cfg.c_max) break;
    }
  }
  if (best.empty()) return detail::failure_at(x, target, steps);
  return detail::make_outcome(x, snap(x, std::move(best), target, cfg.confidence, net), true,
                              target, steps);
}

AttackOutcome t_cw_l0(const Network& net, std::span<const double> x, std::size_t target,
                      const CwConfig& cfg, CwL0Trace* trace) {
  detail::check_attack_input(net, x);
  detail::check_target(net, target);
  cfg.validate();
  if (trace != nullptr) *trace = {};
  if (already_there(net, x, target, cfg))
    return detail::make_outcome(x, {x.begin(), x.end()}, true, target, 0);

  std::vector<bool> pinned(x.size(), false);
  std::vector<double> start(x.begin(), x.end());
  std::vector<double> best;
  std::size_t best_l0 = std::numeric_limits<std::size_t>::max();
  double c = cfg.c_min;
  std::size_t steps = 0;

  for (;;) {
    Solve s;
    while (c <= cfg.c_max) {
      s = inner_solve(net, x, target, cfg, c, Distance::l2, 0.0, start, pinned);
      steps += s.steps;
      if (s.finite && s.success) break;
      c *= 2.0;
    }
    if (!s.success || !s.finite) break;

    std::vector<double> adv = snap(x, std::move(s.best), target, cfg.confidence, net);
    const std::size_t l0 = noise_of(x, adv).l0;
    if (trace != nullptr) {
      ++trace->rounds;
      if (!trace->initial_l0) trace->initial_l0 = l0;
    }
    if (l0 <= best_l0) {
      best_l0 = l0;
      best = adv;
    }

    // Impact of each free coordinate: |g_i * delta_i| with g the gradient of
    // Z_j - Z_t at the current solution, j the strongest other class.
    const ForwardTrace ft = forward(net, adv);
    Vector dlogits = Vector::Zero(ft.logits.size());
    dlogits[static_cast<Eigen::Index>(strongest_other(ft.logits, target))] = 1.0;
    dlogits[static_cast<Eigen::Index>(target)] = -1.0;
    const Vector g = backprop_input(net, ft, dlogits);

    std::size_t fixed_now = 0;
    std::vector<std::pair<double, std::size_t>> impact;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (pinned[i]) continue;
      const double delta = adv[i] - x[i];
      if (std::abs(delta) <= kL0Threshold) {
        pinned[i] = true;
        ++fixed_now;
      } else {
        impact.emplace_back(std::abs(g[static_cast<Eigen::Index>(i)] * delta), i);
      }
    }
    if (impact.size() <= 1) {
      if (trace != nullptr) trace->fixed_per_round.push_back(fixed_now);
      break;
    }
    const std::size_t extra = std::min(cfg.l0_fix_per_round, impact.size() - 1);
    std::partial_sort(impact.begin(), impact.begin() + static_cast<std::ptrdiff_t>(extra),
                      impact.end());
    for (std::size_t k = 0; k < extra; ++k) pinned[impact[k].second] = true;
    fixed_now += extra;
    if (trace != nullptr) trace->fixed_per_round.push_back(fixed_now);

    start = adv;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (pinned[i]) start[i] = x[i];
  }

  if (best.empty()) return detail::failure_at(x, target, steps);
  return detail::make_outcome(x, std::move(best), true, target, steps);
}

AttackOutcome t_cw_linf(const Network& net, std::span<const double> x, std::size_t target,
                        const CwConfig& cfg, CwLinfTrace* trace) {
  detail::check_attack_input(net, x);
  detail::check_target(net, target);
  cfg.validate();
  if (trace != nullptr) *trace = {};
  if (already_there(net, x, target, cfg))
    return detail::make_outcome(x, {x.begin(), x.end()}, true, target, 0);

  const std::vector<bool> pinned(x.size(), false);
  std::vector<double> start(x.begin(), x.end());
  std::vector<double> best;
  double best_linf = std::numeric_limits<double>::infinity();
  double tau = 1.0;
  double c = cfg.c_min;
  std::size_t steps = 0;

  while (tau >= 1.0 / 256.0) {
    bool accepted = false;
    double solved_linf = 0.0;
    while (c <= cfg.c_max) {
      const Solve s = inner_solve(net, x, target, cfg, c, Distance::linf, tau, start, pinned);
      steps += s.steps;
      if (s.finite && s.success) {
        std::vector<double> adv = snap(x, s.best, target, cfg.confidence, net);
        const double linf = noise_of(x, adv).linf;
        if (linf < best_linf) {
          best_linf = linf;
          best = adv;
        }
        if (linf < tau) {
          accepted = true;
          solved_linf = linf;
          start = std::move(adv);
          break;
        }
      }
      c *= 2.0;
    }
    if (!accepted) break;
    if (trace != nullptr) {
      trace->accepted_taus.push_back(tau);
      trace->constants.push_back(c);
    }
    tau = 0.9 * std::min(tau, solved_linf);
  }

  if (best.empty()) return detail::failure_at(x, target, steps);
  return detail::make_outcome(x, std::move(best), true, target, steps);
}

}  // namespace rbc
