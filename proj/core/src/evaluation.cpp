#include "rbc/evaluation.hpp"

#include <algorithm>
#include <string>

#include "rbc/error.hpp"
#include "rbc/parallel.hpp"
#include "rbc/random.hpp"

namespace rbc {

namespace {

void check_benign(const Dataset& test, std::span<const std::size_t> benign) {
  if (benign.empty()) throw ParameterError("benign set is empty");
  for (const auto id : benign)
    if (id >= test.size())
      throw RangeError("benign id " + std::to_string(id) + " outside test set of " +
                       std::to_string(test.size()));
}

Campaign run_campaign(const NamedAttack& attack, const Network& net,
                      const ClassifierUnderTest& classifier, const Dataset& test,
                      std::span<const std::size_t> benign, std::uint64_t seed,
                      std::size_t threads, std::string config_digest,
                      std::size_t max_targets) {
  check_benign(test, benign);
  if (max_targets == 0) throw ParameterError("max_targets must be positive");
  Campaign c;
  c.records = generate(attack, net, test, benign, seed, threads, max_targets);
  const std::size_t n_targets =
      attack.targeted ? std::min(max_targets, net.class_count() - 1) : 1;
  c.report = report_for(attack, c.records, benign.size(), n_targets, classifier, threads,
                        std::move(config_digest));
  return c;
}

}  // namespace

std::uint64_t outcome_seed(std::uint64_t base, std::size_t example_id,
                           std::optional<std::size_t> target, std::string_view attack_name) {
  const std::uint64_t t = target ? static_cast<std::uint64_t>(*target) : ~std::uint64_t{0};
  return derive_seed(base, {example_id, t, name_tag(attack_name)});
}

std::vector<std::size_t> select_benign(const Network& net, const Dataset& test, std::size_t count,
                                       std::uint64_t seed) {
  std::vector<std::size_t> order(test.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> picked;
  for (const auto i : order) {
    if (picked.size() == count) break;
    if (predict(net, test[i].features) == test[i].label) picked.push_back(i);
  }
  if (picked.size() < count)
    throw CapacityError("only " + std::to_string(picked.size()) +
                        " correctly classified test examples, " + std::to_string(count) +
                        " requested");
  return picked;
}

std::vector<OutcomeRecord> attack_example(const NamedAttack& attack, const Network& net,
                                          const Dataset& test, std::size_t example_id,
                                          std::uint64_t seed, std::size_t max_targets) {
  if (example_id >= test.size()) throw RangeError("example id outside the test set");
  const Example& e = test[example_id];
  std::vector<OutcomeRecord> out;
  if (attack.targeted) {
    for (std::size_t t = 0; t < net.class_count() && out.size() < max_targets; ++t) {
      if (t == e.label) continue;
      out.push_back({example_id, attack.name, e.label, attack.targeted_fn(net, e.features, t),
                     outcome_seed(seed, example_id, t, attack.name)});
    }
  } else {
    out.push_back({example_id, attack.name, e.label,
                   attack.untargeted_fn(net, e.features, e.label),
                   outcome_seed(seed, example_id, std::nullopt, attack.name)});
  }
  return out;
}

std::vector<OutcomeRecord> generate(const NamedAttack& attack, const Network& net,
                                    const Dataset& test, std::span<const std::size_t> benign,
                                    std::uint64_t seed, std::size_t threads,
                                    std::size_t max_targets) {
  std::vector<std::vector<OutcomeRecord>> per_example(benign.size());
  parallel_for(benign.size(), threads, [&](std::size_t i) {
    per_example[i] = attack_example(attack, net, test, benign[i], seed, max_targets);
  });
  std::vector<OutcomeRecord> records;
  for (auto& chunk : per_example)
    for (auto& r : chunk) records.push_back(std::move(r));
  return records;
}

ClassifierUnderTest point_based(std::shared_ptr<const Network> net, std::string name) {
  if (!net) throw ParameterError("point classifier needs a network");
  return {std::move(name), [net = std::move(net)](std::span<const double> x, std::uint64_t) {
            return predict(*net, x);
          }};
}

ClassifierUnderTest region_based(const RegionClassifier& rc, std::string name) {
  return {std::move(name), [rc](std::span<const double> x, std::uint64_t seed) {
            return classify_early(rc.base(), x, rc.radius(), rc.samples(), seed);
          }};
}

std::vector<std::uint8_t> judge(std::span<const OutcomeRecord> records,
                                const ClassifierUnderTest& classifier, std::size_t threads) {
  std::vector<std::uint8_t> judged(records.size(), 0);
  parallel_for(records.size(), threads, [&](std::size_t i) {
    const OutcomeRecord& r = records[i];
    if (!r.outcome.success) return;
    const std::size_t label = classifier.predict(r.outcome.adversarial, r.seed);
    judged[i] = r.outcome.target ? label == *r.outcome.target : label != r.true_label;
  });
  return judged;
}

EvalReport fold(std::string classifier_name, std::string attack_name, bool targeted,
                std::size_t n_examples, std::size_t n_targets,
                std::span<const OutcomeRecord> records, std::span<const std::uint8_t> judged,
                std::string config_digest) {
  if (records.size() != judged.size()) throw DimensionError("fold: records and verdicts differ");
  if (n_examples == 0 || n_targets == 0) throw ParameterError("fold: empty campaign");
  EvalReport rep;
  rep.classifier_name = std::move(classifier_name);
  rep.attack_name = std::move(attack_name);
  rep.targeted = targeted;
  rep.n_examples = n_examples;
  rep.n_targets = n_targets;
  rep.config_digest = std::move(config_digest);
  double l0 = 0.0, l2 = 0.0, linf = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!judged[i]) continue;
    ++rep.successes;
    l0 += static_cast<double>(records[i].outcome.noise.l0);
    l2 += records[i].outcome.noise.l2;
    linf += records[i].outcome.noise.linf;
  }
  rep.success_rate =
      static_cast<double>(rep.successes) / static_cast<double>(n_examples * n_targets);
  if (rep.successes > 0) {
    const auto s = static_cast<double>(rep.successes);
    rep.avg_l0 = l0 / s;
    rep.avg_l2 = l2 / s;
    rep.avg_linf = linf / s;
  }
  return rep;
}

EvalReport report_for(const NamedAttack& attack, std::span<const OutcomeRecord> records,
                      std::size_t n_examples, std::size_t n_targets,
                      const ClassifierUnderTest& classifier, std::size_t threads,
                      std::string config_digest) {
  const auto judged = judge(records, classifier, threads);
  return fold(classifier.name, attack.name, attack.targeted, n_examples, n_targets, records,
              judged, std::move(config_digest));
}

Campaign targeted_campaign(const NamedAttack& attack, const Network& net,
                           const ClassifierUnderTest& classifier, const Dataset& test,
                           std::span<const std::size_t> benign, std::uint64_t seed,
                           std::size_t threads, std::string config_digest,
                           std::size_t max_targets) {
  if (!attack.targeted) throw ParameterError(attack.name + " is not a targeted attack");
  return run_campaign(attack, net, classifier, test, benign, seed, threads,
                      std::move(config_digest), max_targets);
}

Campaign untargeted_campaign(const NamedAttack& attack, const Network& net,
                             const ClassifierUnderTest& classifier, const Dataset& test,
                             std::span<const std::size_t> benign, std::uint64_t seed,
                             std::size_t threads, std::string config_digest) {
  if (attack.targeted) throw ParameterError(attack.name + " is not an untargeted attack");
  return run_campaign(attack, net, classifier, test, benign, seed, threads,
                      std::move(config_digest), kAllTargets);
}

std::vector<SweepPoint> confidence_sweep(std::span<const double> k_grid,
                                         const AttackSettings& settings, const Network& net,
                                         const ClassifierUnderTest& classifier,
                                         const Dataset& test, std::span<const std::size_t> benign,
                                         std::uint64_t seed, std::size_t threads,
                                         std::size_t max_targets) {
  if (k_grid.empty()) throw ParameterError("confidence grid is empty");
  std::vector<SweepPoint> points;
  for (const double k : k_grid) {
    AttackSettings s = settings;
    s.cw.confidence = k;
    const NamedAttack attack = make_attack("t-cw-l2", s);
    Campaign c =
        targeted_campaign(attack, net, classifier, test, benign, seed, threads, {}, max_targets);
    c.report.parameter = "k";
    c.report.value = k;
    points.push_back({k, std::move(c.records), std::move(c.report)});
  }
  return points;
}

std::vector<OutcomeRecord> adapt_records(std::span<const OutcomeRecord> base, const Dataset& test,
                                         double alpha) {
  std::vector<OutcomeRecord> out(base.begin(), base.end());
  for (auto& r : out) {
    if (!r.outcome.success) continue;
    const auto& x = test[r.example_id].features;
    r.outcome.adversarial = adapt(r.outcome, x, alpha);
    r.outcome.noise = noise_of(x, r.outcome.adversarial);
  }
  return out;
}

std::vector<SweepPoint> alpha_sweep(std::span<const OutcomeRecord> base,
                                    std::span<const double> alpha_grid, const NamedAttack& attack,
                                    std::size_t n_examples, std::size_t n_targets,
                                    const ClassifierUnderTest& classifier, const Dataset& test,
                                    std::size_t threads) {
  if (std::find(alpha_grid.begin(), alpha_grid.end(), 0.0) == alpha_grid.end())
    throw ParameterError("alpha grid must contain 0");
  std::vector<SweepPoint> points;
  for (const double alpha : alpha_grid) {
    if (!(alpha >= 0.0)) throw ParameterError("alpha values must be non-negative");
    auto records = adapt_records(base, test, alpha);
    EvalReport rep = report_for(attack, records, n_examples, n_targets, classifier, threads);
    rep.parameter = "alpha";
    rep.value = alpha;
    points.push_back({alpha, std::move(records), std::move(rep)});
  }
  return points;
}

std::vector<AccuracyRow> accuracy_table(std::span<const ClassifierUnderTest> classifiers,
                                        const Dataset& test, std::uint64_t seed,
                                        std::size_t threads) {
  if (test.empty()) throw ParameterError("accuracy table needs a non-empty test set");
  std::vector<AccuracyRow> rows;
  for (const auto& c : classifiers) {
    std::vector<std::uint8_t> correct(test.size(), 0);
    parallel_for(test.size(), threads, [&](std::size_t i) {
      correct[i] = c.predict(test[i].features, derive_seed(seed, {i})) == test[i].label;
    });
    const auto hits = std::count(correct.begin(), correct.end(), std::uint8_t{1});
    rows.push_back({c.name, static_cast<double>(hits) / static_cast<double>(test.size())});
  }
  return rows;
}

}  // namespace rbc
