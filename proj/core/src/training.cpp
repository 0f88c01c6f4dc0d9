#include "rbc/training.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "rbc/attacks.hpp"
#include "rbc/error.hpp"
#include "rbc/parallel.hpp"
#include "rbc/random.hpp"

namespace rbc {

namespace {

// Either hard labels or a column-per-example soft-label matrix.
struct Targets {
  std::span<const std::size_t> hard;
  const Eigen::MatrixXd* soft = nullptr;
};

void check_config(const TrainConfig& cfg, TrainMode expected) {
  if (cfg.mode != expected)
    throw ParameterError("config mode is " + std::string(to_string(cfg.mode)) + ", expected " +
                         std::string(to_string(expected)));
  if (cfg.epochs == 0) throw ParameterError("epochs must be positive");
  if (cfg.batch_size == 0) throw ParameterError("batch_size must be positive");
  if (!(cfg.learning_rate >= 0.0) || !std::isfinite(cfg.learning_rate))
    throw ParameterError("learning_rate must be finite and non-negative");
  if (!(cfg.input_noise >= 0.0) || !std::isfinite(cfg.input_noise))
    throw ParameterError("input_noise must be finite and non-negative");
  const bool distilled = cfg.mode == TrainMode::distilled;
  if (distilled != cfg.distill_temperature.has_value())
    throw ParameterError("distill_temperature is required iff mode is distilled");
  if (distilled && !(*cfg.distill_temperature > 0.0))
    throw ParameterError("distill_temperature must be positive");
}

// Mini-batch SGD on loss_scale * cross-entropy against softmax(Z / temperature).
std::vector<EpochLog> sgd(Network& net, const Dataset& data, const Targets& targets,
                          const TrainConfig& cfg, double temperature, double loss_scale,
                          const Dataset* validation) {
  if (data.empty()) throw ParameterError("cannot train on an empty dataset");
  const auto n = static_cast<Eigen::Index>(data.feature_dim());
  const auto classes = static_cast<Eigen::Index>(net.class_count());
  Rng order_rng(derive_seed(cfg.seed, {2}));
  Rng noise_rng(derive_seed(cfg.seed, {4}));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<EpochLog> log;
  std::vector<Eigen::MatrixXd> acts;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double total_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const auto b = static_cast<Eigen::Index>(stop - start);
      Eigen::MatrixXd inputs(n, b);
      for (Eigen::Index c = 0; c < b; ++c) {
        const auto& f = data[order[start + static_cast<std::size_t>(c)]].features;
        inputs.col(c) = Eigen::Map<const Vector>(f.data(), n);
        if (cfg.input_noise > 0.0) {
          for (Eigen::Index j = 0; j < n; ++j) {
            const double v = inputs(j, c);
            inputs(j, c) = noise_rng.uniform(std::max(0.0, v - cfg.input_noise),
                                             std::min(1.0, v + cfg.input_noise));
          }
        }
      }
      forward_batch(net, inputs, acts);
      const Eigen::MatrixXd& z = acts.back();
      Eigen::MatrixXd dz(classes, b);
      for (Eigen::Index c = 0; c < b; ++c) {
        const std::size_t idx = order[start + static_cast<std::size_t>(c)];
        const Vector scaled = z.col(c) / temperature;
        const double top = scaled.maxCoeff();
        const double log_sum = top + std::log((scaled.array() - top).exp().sum());
        const Vector log_p = scaled.array() - log_sum;
        Vector q;
        if (targets.soft != nullptr) {
          q = targets.soft->col(static_cast<Eigen::Index>(idx));
        } else {
          q = Vector::Zero(classes);
          q[static_cast<Eigen::Index>(targets.hard[idx])] = 1.0;
        }
        total_loss -= q.dot(log_p);
        dz.col(c) = (log_p.array().exp().matrix() - q) * (loss_scale / temperature);
      }
      dz /= static_cast<double>(b);
      const Parameters grads = backward_batch(net, acts, dz);
      for (std::size_t k = 0; k < grads.size(); ++k) {
        net.params()[k].weight -= cfg.learning_rate * grads[k].weight;
        net.params()[k].bias -= cfg.learning_rate * grads[k].bias;
      }
    }
    const double mean_loss = total_loss / static_cast<double>(data.size());
    if (!std::isfinite(mean_loss))
      throw TrainingError("training diverged: non-finite loss in epoch " + std::to_string(epoch) +
                              " (last good epoch " + std::to_string(epoch - 1) + ")",
                          epoch, epoch - 1);
    EpochLog entry{epoch, mean_loss, std::nullopt};
    if (validation != nullptr && !validation->empty())
      entry.validation_accuracy = accuracy(net, *validation);
    log.push_back(entry);
  }
  return log;
}

std::vector<std::size_t> labels_of(const Dataset& data) {
  std::vector<std::size_t> labels(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) labels[i] = data[i].label;
  return labels;
}

void check_arch(const Dataset& data, const Network& net) {
  if (net.input_dim() != data.feature_dim())
    throw DimensionError("architecture input dim does not match dataset feature dim");
  if (net.class_count() != data.class_count())
    throw DimensionError("architecture emits " + std::to_string(net.class_count()) +
                         " logits, dataset has " + std::to_string(data.class_count()) +
                         " classes");
}

}  // namespace

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::standard: return "standard";
    case TrainMode::adversarial: return "adversarial";
    case TrainMode::distilled: return "distilled";
  }
  return "unknown";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "standard") return TrainMode::standard;
  if (name == "adversarial") return TrainMode::adversarial;
  if (name == "distilled") return TrainMode::distilled;
  throw ParameterError("unknown training mode '" + std::string(name) +
                       "' (expected standard, adversarial or distilled)");
}

TrainResult train_standard(const Dataset& data, std::span<const LayerSpec> arch,
                           const TrainConfig& cfg, const Dataset* validation) {
  check_config(cfg, TrainMode::standard);
  Network net = Network::glorot({arch.begin(), arch.end()}, derive_seed(cfg.seed, {1}));
  check_arch(data, net);
  const auto labels = labels_of(data);
  auto log = sgd(net, data, Targets{labels, nullptr}, cfg, 1.0, 1.0, validation);
  return TrainResult{std::move(net), std::move(log), {}, 0, 0};
}

TrainResult train_adversarial(const Dataset& data, std::span<const LayerSpec> arch,
                              const TrainConfig& cfg, const Dataset* validation) {
  check_config(cfg, TrainMode::adversarial);
  TrainConfig base_cfg = cfg;
  base_cfg.mode = TrainMode::standard;
  TrainResult base = train_standard(data, arch, base_cfg, validation);

  std::vector<AttackOutcome> twins(data.size());
  parallel_for(data.size(), cfg.threads, [&](std::size_t i) {
    twins[i] = deepfool(base.net, data[i].features, cfg.deepfool_max_iters, cfg.deepfool_overshoot);
  });

  std::vector<Example> augmented(data.begin(), data.end());
  std::size_t failures = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (twins[i].success)
      augmented.push_back({std::move(twins[i].adversarial), data[i].label});
    else
      ++failures;
  }
  const std::size_t added = augmented.size() - data.size();
  if (cfg.deepfool_max_iters == 0) failures = 0;
  const Dataset union_set(data.feature_dim(), data.class_count(), std::move(augmented));

  TrainResult result = train_standard(union_set, arch, base_cfg, validation);
  result.stage_one_log = std::move(base.log);
  result.adversarial_twins = added;
  result.deepfool_failures = failures;
  return result;
}

Eigen::MatrixXd soft_labels(const Network& teacher, const Dataset& data, double temperature) {
  Eigen::MatrixXd q(static_cast<Eigen::Index>(teacher.class_count()),
                    static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i)
    q.col(static_cast<Eigen::Index>(i)) =
        softmax_with_temperature(logits(teacher, data[i].features), temperature);
  return q;
}

TrainResult train_distilled(const Dataset& data, std::span<const LayerSpec> arch,
                            const TrainConfig& cfg, const Dataset* validation) {
  check_config(cfg, TrainMode::distilled);
  const double temperature = *cfg.distill_temperature;
  const auto labels = labels_of(data);

  Network teacher = Network::glorot({arch.begin(), arch.end()}, derive_seed(cfg.seed, {1}));
  check_arch(data, teacher);
  auto teacher_log = sgd(teacher, data, Targets{labels, nullptr}, cfg, temperature, temperature, validation);

  const Eigen::MatrixXd soft = soft_labels(teacher, data, temperature);

  TrainConfig student_cfg = cfg;
  student_cfg.seed = derive_seed(cfg.seed, {3});
  Network student =
      Network::glorot({arch.begin(), arch.end()}, derive_seed(student_cfg.seed, {1}));
  auto student_log = sgd(student, data, Targets{{}, &soft}, student_cfg, temperature, temperature, validation);

  return TrainResult{std::move(student), std::move(student_log), std::move(teacher_log), 0, 0};
}

double accuracy(const Network& net, const Dataset& data) {
  if (data.empty()) throw ParameterError("accuracy of an empty dataset is undefined");
  std::size_t correct = 0;
  for (const auto& e : data)
    if (predict(net, e.features) == e.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace rbc
