#include <array>
#include <string>

#include "attack_util.hpp"

namespace rbc {

std::optional<std::size_t> select_min_noise(std::span<const AttackOutcome> outcomes,
                                            NoiseMetric metric) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].success) continue;
    if (!best || outcomes[i].noise.get(metric) < outcomes[*best].noise.get(metric)) best = i;
  }
  return best;
}

AttackOutcome untargeted_from_targeted(const TargetedAttack& attack, const Network& net,
                                       std::span<const double> x, std::size_t true_label,
                                       NoiseMetric metric,
                                       std::vector<AttackOutcome>* per_target) {
  detail::check_attack_input(net, x);
  if (true_label >= net.class_count())
    throw RangeError("true label " + std::to_string(true_label) + " >= class count " +
                     std::to_string(net.class_count()));
  std::vector<AttackOutcome> outcomes;
  outcomes.reserve(net.class_count() - 1);
  std::size_t iterations = 0;
  for (std::size_t t = 0; t < net.class_count(); ++t) {
    if (t == true_label) continue;
    outcomes.push_back(attack(net, x, t));
    iterations += outcomes.back().iterations;
  }
  const auto best = select_min_noise(outcomes, metric);
  AttackOutcome result = best ? outcomes[*best] : detail::failure_at(x, std::nullopt, 0);
  result.target.reset();
  result.iterations = iterations;
  if (per_target != nullptr) *per_target = std::move(outcomes);
  return result;
}

AttackOutcome combine_outcomes(std::span<const AttackOutcome> outcomes, NoiseMetric metric,
                               std::span<const double> x, std::optional<std::size_t> target) {
  if (outcomes.empty()) throw ParameterError("a combined attack needs at least one variant");
  const auto best = select_min_noise(outcomes, metric);
  if (!best) {
    std::size_t iterations = 0;
    for (const auto& o : outcomes) iterations += o.iterations;
    return detail::failure_at(x, target, iterations);
  }
  AttackOutcome result = outcomes[*best];
  result.target = target;
  return result;
}

AttackOutcome combined_targeted(std::span<const TargetedAttack> variants, const Network& net,
                                std::span<const double> x, std::size_t target,
                                NoiseMetric metric) {
  std::vector<AttackOutcome> outcomes;
  for (const auto& attack : variants) outcomes.push_back(attack(net, x, target));
  return combine_outcomes(outcomes, metric, x, target);
}

AttackOutcome combined_untargeted(std::span<const UntargetedAttack> variants, const Network& net,
                                  std::span<const double> x, std::size_t true_label,
                                  NoiseMetric metric) {
  std::vector<AttackOutcome> outcomes;
  for (const auto& attack : variants) outcomes.push_back(attack(net, x, true_label));
  return combine_outcomes(outcomes, metric, x, std::nullopt);
}

namespace {

constexpr std::array<std::string_view, 19> kNames = {
    "t-fgsm",  "t-igsm",  "t-jsma",  "t-cw-l0",  "t-cw-l2",   "t-cw-linf", "u-fgsm",
    "u-igsm",  "u-jsma",  "u-cw-l0", "u-cw-l2",  "u-cw-linf", "deepfool",  "t-ca-l0",
    "t-ca-l2", "t-ca-linf", "u-ca-l0", "u-ca-l2", "u-ca-linf"};

// Targeted base attack for a family name ("fgsm", "cw-l2", ...).
std::pair<TargetedAttack, NoiseMetric> base_attack(std::string_view family,
                                                   const AttackSettings& s) {
  if (family == "fgsm")
    return {[grid = s.eps_grid](const Network& net, std::span<const double> x, std::size_t t) {
              return t_fgsm(net, x, t, grid);
            },
            NoiseMetric::linf};
  if (family == "igsm")
    return {[grid = s.eps_grid, step = s.igsm_step, iters = s.igsm_max_iters](
                const Network& net, std::span<const double> x, std::size_t t) {
              return t_igsm(net, x, t, grid, step, iters);
            },
            NoiseMetric::linf};
  if (family == "jsma")
    return {[budget = s.jsma_max_l0](const Network& net, std::span<const double> x,
                                     std::size_t t) { return t_jsma(net, x, t, budget); },
            NoiseMetric::l0};
  if (family == "cw-l0")
    return {[cfg = s.cw](const Network& net, std::span<const double> x, std::size_t t) {
              return t_cw_l0(net, x, t, cfg);
            },
            NoiseMetric::l0};
  if (family == "cw-l2")
    return {[cfg = s.cw](const Network& net, std::span<const double> x, std::size_t t) {
              return t_cw_l2(net, x, t, cfg);
            },
            NoiseMetric::l2};
  if (family == "cw-linf")
    return {[cfg = s.cw](const Network& net, std::span<const double> x, std::size_t t) {
              return t_cw_linf(net, x, t, cfg);
            },
            NoiseMetric::linf};
  throw ParameterError("unknown attack family '" + std::string(family) + "'");
}

UntargetedAttack to_untargeted(TargetedAttack attack, NoiseMetric metric) {
  return [attack = std::move(attack), metric](const Network& net, std::span<const double> x,
                                              std::size_t true_label) {
    return untargeted_from_targeted(attack, net, x, true_label, metric);
  };
}

UntargetedAttack deepfool_attack(const AttackSettings& s) {
  return [iters = s.deepfool_max_iters, overshoot = s.deepfool_overshoot](
             const Network& net, std::span<const double> x, std::size_t) {
    return deepfool(net, x, iters, overshoot);
  };
}

// Constituent targeted attacks of a combined attack.
std::vector<TargetedAttack> combined_members(NoiseMetric metric, const AttackSettings& s) {
  std::vector<TargetedAttack> members;
  switch (metric) {
    case NoiseMetric::l0:
      members.push_back(base_attack("jsma", s).first);
      members.push_back(base_attack("cw-l0", s).first);
      break;
    case NoiseMetric::linf:
      members.push_back(base_attack("fgsm", s).first);
      members.push_back(base_attack("igsm", s).first);
      members.push_back(base_attack("cw-linf", s).first);
      break;
    case NoiseMetric::l2:
      if (s.ca_l2_confidences.empty())
        throw ParameterError("CA-L2 needs at least one confidence value");
      for (const double k : s.ca_l2_confidences) {
        AttackSettings variant = s;
        variant.cw.confidence = k;
        members.push_back(base_attack("cw-l2", variant).first);
      }
      break;
  }
  return members;
}

std::string valid_names() {
  std::string out;
  for (const auto name : kNames) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

}  // namespace

std::span<const std::string_view> attack_names() { return kNames; }

NamedAttack make_attack(std::string_view name, const AttackSettings& settings) {
  settings.cw.validate();
  NamedAttack out;
  out.name = std::string(name);
  if (name == "deepfool") {
    out.targeted = false;
    out.metric = NoiseMetric::l2;
    out.untargeted_fn = deepfool_attack(settings);
    return out;
  }
  const bool known = std::find(kNames.begin(), kNames.end(), name) != kNames.end();
  if (!known)
    throw ParameterError("unknown attack '" + std::string(name) + "'; valid names: " +
                         valid_names());
  out.targeted = name.starts_with("t-");
  const std::string_view family = name.substr(2);

  if (family.starts_with("ca-")) {
    out.metric = parse_noise_metric(family.substr(3));
    auto members = combined_members(out.metric, settings);
    const NoiseMetric metric = out.metric;
    if (out.targeted) {
      out.targeted_fn = [members, metric](const Network& net, std::span<const double> x,
                                          std::size_t t) {
        return combined_targeted(members, net, x, t, metric);
      };
    } else {
      std::vector<UntargetedAttack> variants;
      for (auto& m : members) variants.push_back(to_untargeted(std::move(m), metric));
      if (metric == NoiseMetric::l2) variants.push_back(deepfool_attack(settings));
      out.untargeted_fn = [variants, metric](const Network& net, std::span<const double> x,
                                             std::size_t label) {
        return combined_untargeted(variants, net, x, label, metric);
      };
    }
    return out;
  }

  auto [attack, metric] = base_attack(family, settings);
  out.metric = metric;
  if (out.targeted)
    out.targeted_fn = std::move(attack);
  else
    out.untargeted_fn = to_untargeted(std::move(attack), metric);
  return out;
}

}  // namespace rbc
