#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rbc {

using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class LayerKind : std::uint8_t { dense = 0, relu = 1, softmax_output = 2 };

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t in_dim = 0;   // dense only
  std::size_t out_dim = 0;  // dense only

  static LayerSpec dense(std::size_t in, std::size_t out) { return {LayerKind::dense, in, out}; }
  static LayerSpec relu() { return {LayerKind::relu, 0, 0}; }
  static LayerSpec softmax_output() { return {LayerKind::softmax_output, 0, 0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Dense -> ReLU -> ... -> Dense -> softmax-output for the given widths.
/// mlp_spec({784, 128, 128, 10}) is the desk-scale MNIST architecture.
std::vector<LayerSpec> mlp_spec(std::span<const std::size_t> widths);

/// Weight (out x in) and bias (out) of one dense layer.
struct DenseParams {
  RowMatrix weight;
  Vector bias;
};

/// One DenseParams per dense layer, in layer order. Gradients use the same shape.
using Parameters = std::vector<DenseParams>;

/// Layered feed-forward classifier. Logits are the output of the last dense
/// layer; a trailing softmax_output layer only marks where probabilities are
/// taken and has no parameters.
class Network {
 public:
  /// Validates the chain and allocates zero parameters.
  explicit Network(std::vector<LayerSpec> layers);

  /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  /// Draws come from Rng(seed), layer by layer, row-major.
  static Network glorot(std::vector<LayerSpec> layers, std::uint64_t seed);

  std::span<const LayerSpec> layers() const noexcept { return layers_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t class_count() const noexcept { return class_count_; }

  const Parameters& params() const noexcept { return params_; }
  Parameters& params() noexcept { return params_; }

  /// Index into params() for layer i, or -1 for non-dense layers.
  std::ptrdiff_t dense_index(std::size_t layer) const { return dense_index_[layer]; }

  std::size_t parameter_count() const;

  /// Rounds every parameter to the nearest float32, as a checkpoint stores it.
  void round_to_float32();

 private:
  std::vector<LayerSpec> layers_;
  std::vector<std::ptrdiff_t> dense_index_;
  Parameters params_;
  std::size_t input_dim_ = 0;
  std::size_t class_count_ = 0;
};

/// Activations entering each layer (activations[i] feeds layers()[i]), plus the
/// logits Z(x) and probabilities F(x) = softmax(Z(x)).
struct ForwardTrace {
  std::vector<Vector> activations;
  Vector logits;
  Vector probs;
};

/// Index of the largest entry; ties go to the lowest index. Every class argmax
/// in the toolkit goes through this function.
std::size_t argmax(std::span<const double> values);
std::size_t argmax(const Vector& values);

/// Numerically stable softmax (max-subtracted).
Vector softmax(const Vector& logits);
Vector softmax_with_temperature(const Vector& logits, double temperature);

ForwardTrace forward(const Network& net, std::span<const double> x);

/// Logits only; bit-identical to forward(net, x).logits.
Vector logits(const Network& net, std::span<const double> x);

/// argmax of the logits, which equals argmax of the probabilities.
std::size_t predict(const Network& net, std::span<const double> x);

/// Cross-entropy -log F_target(x).
double loss(const Network& net, std::span<const double> x, std::size_t target);

/// d loss / d x.
Vector input_gradient(const Network& net, std::span<const double> x, std::size_t target);

/// Vector-Jacobian product: (d logits / d x)^T * logit_grad, using a stored trace.
Vector backprop_input(const Network& net, const ForwardTrace& trace, const Vector& logit_grad);

/// L x n matrix whose row i is the gradient of Z_i with respect to x.
RowMatrix logit_jacobian(const Network& net, std::span<const double> x);

struct LabeledInput {
  std::span<const double> x;
  std::size_t target;
};

/// Mean cross-entropy gradient over the batch, one entry per dense layer.
Parameters param_gradient(const Network& net, std::span<const LabeledInput> batch);

/// Batched forward pass over the columns of `inputs` (n x B). activations[i]
/// feeds layer i; the last entry holds the logits (L x B). Used by training.
void forward_batch(const Network& net, const Eigen::MatrixXd& inputs,
                   std::vector<Eigen::MatrixXd>& activations);

/// Parameter gradient summed over the batch columns, given d loss / d logits
/// (L x B) and the activations from forward_batch.
Parameters backward_batch(const Network& net, const std::vector<Eigen::MatrixXd>& activations,
                          const Eigen::MatrixXd& logit_grad);

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint32_t epochs = 0;
  std::string mode;  // "standard" | "adversarial" | "distilled" | free text
  double temperature = 1.0;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint, little-endian:
///   "RBCN" | u32 version | u32 layer_count | per layer {u8 kind, u32 in, u32 out}
///   | u32 class_count | per dense layer {float32 weight[out*in] row-major, float32 bias[out]}
///   | u64 seed | u32 epochs | u32 mode_len | mode bytes | f64 temperature
void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const CheckpointMeta& meta);
std::pair<Network, CheckpointMeta> load_checkpoint(const std::filesystem::path& path);

}  // namespace rbc
