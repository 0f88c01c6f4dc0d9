#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbc/attacks.hpp"
#include "rbc/dataset.hpp"
#include "rbc/network.hpp"
#include "rbc/region.hpp"

namespace rbc {

/// One attack outcome on one benign example (and one target, if targeted).
struct OutcomeRecord {
  std::size_t example_id = 0;
  std::string attack_name;
  std::size_t true_label = 0;
  AttackOutcome outcome;
  /// Sampling seed used when the record is judged by a region classifier.
  std::uint64_t seed = 0;
};

/// derive_seed(base, {example_id, target or class-count sentinel, name_tag(attack)}).
std::uint64_t outcome_seed(std::uint64_t base, std::size_t example_id,
                           std::optional<std::size_t> target, std::string_view attack_name);

/// `count` test indices the point network classifies correctly, taken in the
/// order of a seeded shuffle of the test set. Throws CapacityError if fewer exist.
std::vector<std::size_t> select_benign(const Network& net, const Dataset& test, std::size_t count,
                                       std::uint64_t seed);

inline constexpr std::size_t kAllTargets = static_cast<std::size_t>(-1);

/// Runs `attack` against the point network on test[example_id]: one record
/// per target != label (the first max_targets of them, in class order) for
/// targeted attacks, one record otherwise.
std::vector<OutcomeRecord> attack_example(const NamedAttack& attack, const Network& net,
                                          const Dataset& test, std::size_t example_id,
                                          std::uint64_t seed,
                                          std::size_t max_targets = kAllTargets);

/// attack_example over every benign id, in benign order.
std::vector<OutcomeRecord> generate(const NamedAttack& attack, const Network& net,
                                    const Dataset& test, std::span<const std::size_t> benign,
                                    std::uint64_t seed, std::size_t threads = 1,
                                    std::size_t max_targets = kAllTargets);

/// A classifier that adversarial examples are judged against. The seed is the
/// record's sampling seed; point classifiers ignore it.
struct ClassifierUnderTest {
  std::string name;
  std::function<std::size_t(std::span<const double>, std::uint64_t)> predict;
};

ClassifierUnderTest point_based(std::shared_ptr<const Network> net, std::string name = "point");

/// Judges with the classifier's r and m and the per-record seed.
ClassifierUnderTest region_based(const RegionClassifier& rc, std::string name = "region");

/// 1 where the record succeeded against the classifier-under-test: the attack
/// succeeded on the point network and the classifier outputs the target
/// (targeted) or anything but the true label (untargeted).
std::vector<std::uint8_t> judge(std::span<const OutcomeRecord> records,
                                const ClassifierUnderTest& classifier, std::size_t threads = 1);

struct EvalReport {
  std::string classifier_name;
  std::string attack_name;
  bool targeted = true;
  std::size_t n_examples = 0;
  std::size_t n_targets = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  /// Means over successful outcomes; absent when nothing succeeded.
  std::optional<double> avg_l0;
  std::optional<double> avg_l2;
  std::optional<double> avg_linf;
  std::string config_digest;
  /// Sweep coordinate ("k", "alpha"), empty for plain campaigns.
  std::string parameter;
  std::optional<double> value;
};

/// Pure fold of judged records into a report. success_rate is
/// successes / (n_examples * n_targets).
EvalReport fold(std::string classifier_name, std::string attack_name, bool targeted,
                std::size_t n_examples, std::size_t n_targets,
                std::span<const OutcomeRecord> records, std::span<const std::uint8_t> judged,
                std::string config_digest = {});

struct Campaign {
  std::vector<OutcomeRecord> records;
  EvalReport report;
};

/// Generates outcomes against `net`, judges them against `classifier`.
/// Throws if the attack is untargeted. max_targets as in attack_example.
Campaign targeted_campaign(const NamedAttack& attack, const Network& net,
                           const ClassifierUnderTest& classifier, const Dataset& test,
                           std::span<const std::size_t> benign, std::uint64_t seed,
                           std::size_t threads = 1, std::string config_digest = {},
                           std::size_t max_targets = kAllTargets);

/// As targeted_campaign for untargeted attacks.
Campaign untargeted_campaign(const NamedAttack& attack, const Network& net,
                             const ClassifierUnderTest& classifier, const Dataset& test,
                             std::span<const std::size_t> benign, std::uint64_t seed,
                             std::size_t threads = 1, std::string config_digest = {});

/// Judges stored records and folds them. n_targets is 1 for untargeted attacks.
EvalReport report_for(const NamedAttack& attack, std::span<const OutcomeRecord> records,
                      std::size_t n_examples, std::size_t n_targets,
                      const ClassifierUnderTest& classifier, std::size_t threads = 1,
                      std::string config_digest = {});

struct SweepPoint {
  double value = 0.0;
  std::vector<OutcomeRecord> records;
  EvalReport report;
};

/// One T-CW-L2 campaign per confidence k, transferred to `classifier`.
std::vector<SweepPoint> confidence_sweep(std::span<const double> k_grid,
                                         const AttackSettings& settings, const Network& net,
                                         const ClassifierUnderTest& classifier,
                                         const Dataset& test, std::span<const std::size_t> benign,
                                         std::uint64_t seed, std::size_t threads = 1,
                                         std::size_t max_targets = kAllTargets);

/// Adapted records: every successful base outcome moved to adapt(outcome, x,
/// alpha) with its noise recomputed; failures stay failures at x.
std::vector<OutcomeRecord> adapt_records(std::span<const OutcomeRecord> base,
                                         const Dataset& test, double alpha);

/// One report per alpha over the adapted base records. alpha_grid must contain 0.
std::vector<SweepPoint> alpha_sweep(std::span<const OutcomeRecord> base,
                                    std::span<const double> alpha_grid, const NamedAttack& attack,
                                    std::size_t n_examples, std::size_t n_targets,
                                    const ClassifierUnderTest& classifier, const Dataset& test,
                                    std::size_t threads = 1);

struct AccuracyRow {
  std::string classifier_name;
  double accuracy = 0.0;
};

/// Accuracy of each classifier on `test`; example i is judged with
/// derive_seed(seed, {i}).
std::vector<AccuracyRow> accuracy_table(std::span<const ClassifierUnderTest> classifiers,
                                        const Dataset& test, std::uint64_t seed,
                                        std::size_t threads = 1);

}  // namespace rbc
