#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbc/network.hpp"

namespace rbc {

enum class NoiseMetric { l0, l2, linf };

std::string_view to_string(NoiseMetric metric);
NoiseMetric parse_noise_metric(std::string_view name);

/// A coordinate counts toward L0 when it moved by more than this.
inline constexpr double kL0Threshold = 1e-9;

struct Noise {
  std::size_t l0 = 0;
  double l2 = 0.0;
  double linf = 0.0;

  double get(NoiseMetric metric) const;
};

/// L0 / L2 / Linf norms of adversarial - original.
Noise noise_of(std::span<const double> original, std::span<const double> adversarial);

struct AttackOutcome {
  std::vector<double> adversarial;  // always inside [0,1]^n
  bool success = false;
  std::optional<std::size_t> target;  // set for targeted attacks
  Noise noise;
  std::size_t iterations = 0;
};

/// Pixel-quantum grid {1/256, 2/256, ..., 1}.
std::vector<double> default_eps_grid();

/// Called with every IGSM iterate and the epsilon it was produced under.
using IterateObserver = std::function<void(std::span<const double> iterate, double eps)>;

/// x' = clip01(x - eps * sign(grad_x J(x, t))) for ascending eps; the first eps
/// that reaches the target wins. Failure returns x.
AttackOutcome t_fgsm(const Network& net, std::span<const double> x, std::size_t target,
                     std::span<const double> eps_grid);

/// Iterated sign steps of size `step`, projected onto the Linf eps-ball around x
/// and onto [0,1] after every step; ascending eps, early exit on the target.
AttackOutcome t_igsm(const Network& net, std::span<const double> x, std::size_t target,
                     std::span<const double> eps_grid, double step = 1.0 / 256.0,
                     std::size_t max_iters = 100, const IterateObserver& observer = {});

/// Logit-based Jacobian saliency attack. Each round saturates the single
/// pixel or pixel pair (each moved to 0 or 1) whose logit-gradient sums raise
/// Z_target (alpha > 0) while lowering the other logits (beta < 0), maximizing
/// alpha * |beta|; ties prefer a single pixel. Modified pixels leave the search
/// domain. Stops on success, when the next move would exceed max_l0 changed
/// pixels, or when no admissible move remains.
AttackOutcome t_jsma(const Network& net, std::span<const double> x, std::size_t target,
                     std::size_t max_l0 = 112);

struct CwConfig {
  double confidence = 0.0;  // k in f(x') = max(max_{i != t} Z_i - Z_t, -k)
  double c_min = 1e-3;
  double c_max = 1e10;
  std::size_t binary_search_steps = 9;
  std::size_t inner_iterations = 1000;
  double inner_learning_rate = 1e-2;
  /// Stop an inner solve when the loss has not dropped 0.01% over a tenth of its budget.
  bool abort_early = true;
  /// Coordinates with nonzero |g_i * delta_i| pinned per L0 round.
  std::size_t l0_fix_per_round = 1;

  void validate() const;
};

/// Change of variables x' = (tanh(w) + 1) / 2 with Adam on w. c starts at
/// c_min and grows 10x until the first success, then bisects; the minimum-L2
/// success over all rounds is returned.
AttackOutcome t_cw_l2(const Network& net, std::span<const double> x, std::size_t target,
                      const CwConfig& cfg);

struct CwL0Trace {
  std::size_t rounds = 0;
  /// L0 of the first (unrestricted) successful solve.
  std::optional<std::size_t> initial_l0;
  std::vector<std::size_t> fixed_per_round;
};

/// Repeated restricted L2 solves. After each success the coordinates with the
/// smallest |g_i * delta_i| (g = grad f at x + delta) are pinned to x: every
/// zero-impact coordinate plus l0_fix_per_round more. c doubles from c_min
/// until a solve succeeds. Returns the smallest-L0 success (ties: latest).
AttackOutcome t_cw_l0(const Network& net, std::span<const double> x, std::size_t target,
                      const CwConfig& cfg, CwL0Trace* trace = nullptr);

struct CwLinfTrace {
  /// tau values whose solve kept every |delta_i| < tau.
  std::vector<double> accepted_taus;
  std::vector<double> constants;
};

/// Minimizes sum_i (|delta_i| - tau)^+ + c * f(x + delta). c doubles from c_min
/// until a solve succeeds; starting at tau = 1, every solve that keeps all
/// |delta_i| < tau shrinks tau to 0.9 * min(tau, ||delta||_inf) and solves again.
AttackOutcome t_cw_linf(const Network& net, std::span<const double> x, std::size_t target,
                        const CwConfig& cfg, CwLinfTrace* trace = nullptr);

/// Multiclass DeepFool: each step projects onto the nearest linearized
/// boundary, the accumulated step is scaled by (1 + overshoot) and clipped to
/// [0,1]. Success iff the predicted label changed. Classes with a zero gradient
/// difference are skipped; if every class is degenerate the attack fails. The
/// returned adversarial is the last iterate even on failure.
AttackOutcome deepfool(const Network& net, std::span<const double> x, std::size_t max_iters = 50,
                       double overshoot = 0.02);

using TargetedAttack =
    std::function<AttackOutcome(const Network&, std::span<const double>, std::size_t target)>;
using UntargetedAttack =
    std::function<AttackOutcome(const Network&, std::span<const double>, std::size_t true_label)>;

/// Index of the successful outcome with the smallest noise under `metric`
/// (first one on ties), or nullopt if none succeeded.
std::optional<std::size_t> select_min_noise(std::span<const AttackOutcome> outcomes,
                                            NoiseMetric metric);

/// Runs `attack` for every target != true_label and keeps the minimum-noise
/// success. The result is untargeted (target unset); failure returns x.
AttackOutcome untargeted_from_targeted(const TargetedAttack& attack, const Network& net,
                                       std::span<const double> x, std::size_t true_label,
                                       NoiseMetric metric,
                                       std::vector<AttackOutcome>* per_target = nullptr);

/// Minimum-noise success among the constituent outcomes, or a failure at x
/// when none succeeded.
AttackOutcome combine_outcomes(std::span<const AttackOutcome> outcomes, NoiseMetric metric,
                               std::span<const double> x, std::optional<std::size_t> target);

AttackOutcome combined_targeted(std::span<const TargetedAttack> variants, const Network& net,
                                std::span<const double> x, std::size_t target, NoiseMetric metric);
AttackOutcome combined_untargeted(std::span<const UntargetedAttack> variants, const Network& net,
                                  std::span<const double> x, std::size_t true_label,
                                  NoiseMetric metric);

/// clip01(x + (1 + alpha) * (outcome.adversarial - x)). Requires outcome.success.
std::vector<double> adapt(const AttackOutcome& outcome, std::span<const double> x, double alpha);

/// Parameters shared by the attack registry.
struct AttackSettings {
  std::vector<double> eps_grid = default_eps_grid();
  double igsm_step = 1.0 / 256.0;
  std::size_t igsm_max_iters = 100;
  std::size_t jsma_max_l0 = 112;
  CwConfig cw;
  std::size_t deepfool_max_iters = 50;
  double deepfool_overshoot = 0.02;
  /// Confidence values combined by T-CA-L2 / U-CA-L2.
  std::vector<double> ca_l2_confidences = {0, 5, 10, 15, 20, 25, 30, 35, 40};
};

/// An attack resolved by name; exactly one of the two callables is set.
struct NamedAttack {
  std::string name;
  bool targeted = true;
  NoiseMetric metric = NoiseMetric::l2;
  TargetedAttack targeted_fn;
  UntargetedAttack untargeted_fn;
};

/// Lower-case names: t-fgsm t-igsm t-jsma t-cw-l0 t-cw-l2 t-cw-linf, their u-
/// counterparts, deepfool, and t-/u-ca-l0, -ca-linf, -ca-l2.
std::span<const std::string_view> attack_names();

/// Throws ParameterError (listing the valid names) for an unknown name.
NamedAttack make_attack(std::string_view name, const AttackSettings& settings);

}  // namespace rbc
