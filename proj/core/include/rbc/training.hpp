#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rbc/dataset.hpp"
#include "rbc/network.hpp"

namespace rbc {

enum class TrainMode { standard, adversarial, distilled };

std::string_view to_string(TrainMode mode);
/// Throws ParameterError for anything but "standard", "adversarial", "distilled".
TrainMode parse_train_mode(std::string_view name);

/// Plain mini-batch SGD settings. Weight init and batch order are both derived
/// from `seed`, so identical inputs give bit-identical parameters.
struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::standard;
  /// Required iff mode == distilled.
  std::optional<double> distill_temperature;
  /// DeepFool settings for adversarial mode; 0 iterations disables augmentation.
  std::size_t deepfool_max_iters = 50;
  double deepfool_overshoot = 0.02;
  /// When positive, every time an example enters a batch its features are
  /// replaced by a uniform draw from the box of this half-width around it,
  /// truncated to [0,1]. 0 trains on the clean inputs.
  double input_noise = 0.0;
  std::size_t threads = 1;
};

struct EpochLog {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> validation_accuracy;
};

struct TrainResult {
  Network net;
  std::vector<EpochLog> log;
  /// Teacher run (distilled) or base run (adversarial); empty for standard.
  std::vector<EpochLog> stage_one_log;
  std::size_t adversarial_twins = 0;
  std::size_t deepfool_failures = 0;
};

/// Cross-entropy SGD from Glorot init. Throws TrainingError on a non-finite loss.
TrainResult train_standard(const Dataset& data, std::span<const LayerSpec> arch,
                           const TrainConfig& cfg, const Dataset* validation = nullptr);

/// Trains a standard base net, adds one DeepFool twin (with the original's
/// label) per training example the attack succeeds on, then trains a fresh net
/// on originals followed by twins.
TrainResult train_adversarial(const Dataset& data, std::span<const LayerSpec> arch,
                              const TrainConfig& cfg, const Dataset* validation = nullptr);

/// Teacher trained with softmax(Z / T) in its loss; a fresh student of the same
/// architecture is trained on the teacher's softmax(Z / T) soft labels, also at
/// temperature T. Both losses are multiplied by T so the logit gradient keeps
/// its temperature-1 magnitude. The returned student is used at temperature 1.
TrainResult train_distilled(const Dataset& data, std::span<const LayerSpec> arch,
                            const TrainConfig& cfg, const Dataset* validation = nullptr);

/// Soft labels softmax(Z(x) / T) for every example, one column per example.
Eigen::MatrixXd soft_labels(const Network& teacher, const Dataset& data, double temperature);

/// Fraction of examples whose predict() equals the label. Throws on empty data.
double accuracy(const Network& net, const Dataset& data);

}  // namespace rbc
