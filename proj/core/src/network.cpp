#include "rbc/network.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rbc/error.hpp"
#include "rbc/random.hpp"

namespace rbc {

namespace {

void check_input(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_dim())
    throw DimensionError("input has " + std::to_string(x.size()) + " features, network expects " +
                         std::to_string(net.input_dim()));
}

// The single code path for per-example inference. forward(), logits(),
// predict() and the region classifier all go through here, so their logits
// agree bit for bit.
void forward_into(const Network& net, std::span<const double> x, std::vector<Vector>& acts) {
  check_input(net, x);
  const auto layers = net.layers();
  acts.resize(layers.size() + 1);
  acts[0].resize(static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) acts[0][static_cast<Eigen::Index>(j)] = x[j];
  for (std::size_t i = 0; i < layers.size(); ++i) {
    switch (layers[i].kind) {
      case LayerKind::dense: {
        const auto& p = net.params()[static_cast<std::size_t>(net.dense_index(i))];
        acts[i + 1].resize(p.weight.rows());
        acts[i + 1].noalias() = p.weight * acts[i];
        acts[i + 1] += p.bias;
        break;
      }
      case LayerKind::relu:
        acts[i + 1] = acts[i].cwiseMax(0.0);
        break;
      case LayerKind::softmax_output:
        acts[i + 1] = acts[i];
        break;
    }
  }
}

}  // namespace

std::vector<LayerSpec> mlp_spec(std::span<const std::size_t> widths) {
  if (widths.size() < 2) throw ParameterError("mlp_spec needs at least input and output widths");
  std::vector<LayerSpec> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    layers.push_back(LayerSpec::dense(widths[i], widths[i + 1]));
    if (i + 2 < widths.size()) layers.push_back(LayerSpec::relu());
  }
  layers.push_back(LayerSpec::softmax_output());
  return layers;
}

Network::Network(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  std::size_t width = 0;
  bool seen_dense = false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& layer = layers_[i];
    switch (layer.kind) {
      case LayerKind::dense: {
        if (layer.in_dim == 0 || layer.out_dim == 0)
          throw DimensionError("dense layer " + std::to_string(i) + " has a zero dimension");
        if (seen_dense && layer.in_dim != width)
          throw DimensionError("dense layer " + std::to_string(i) + " expects " +
                               std::to_string(layer.in_dim) + " inputs but receives " +
                               std::to_string(width));
        if (!seen_dense) input_dim_ = layer.in_dim;
        seen_dense = true;
        width = layer.out_dim;
        dense_index_.push_back(static_cast<std::ptrdiff_t>(params_.size()));
        params_.push_back({RowMatrix::Zero(static_cast<Eigen::Index>(layer.out_dim),
                                           static_cast<Eigen::Index>(layer.in_dim)),
                           Vector::Zero(static_cast<Eigen::Index>(layer.out_dim))});
        break;
      }
      case LayerKind::relu:
        if (!seen_dense) throw DimensionError("relu before the first dense layer");
        dense_index_.push_back(-1);
        break;
      case LayerKind::softmax_output:
        if (i + 1 != layers_.size())
          throw DimensionError("softmax-output must be the final layer");
        dense_index_.push_back(-1);
        break;
    }
  }
  if (!seen_dense) throw DimensionError("network needs at least one dense layer");
  class_count_ = width;
  if (class_count_ < 2) throw DimensionError("network must emit at least 2 logits");
}

Network Network::glorot(std::vector<LayerSpec> layers, std::uint64_t seed) {
  Network net(std::move(layers));
  Rng rng(seed);
  for (auto& p : net.params_) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(p.weight.rows() + p.weight.cols()));
    for (Eigen::Index r = 0; r < p.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < p.weight.cols(); ++c)
        p.weight(r, c) = rng.uniform(-limit, limit);
  }
  return net;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.weight.size() + p.bias.size());
  return n;
}

void Network::round_to_float32() {
  auto round = [](double v) { return static_cast<double>(static_cast<float>(v)); };
  for (auto& p : params_) {
    p.weight = p.weight.unaryExpr(round);
    p.bias = p.bias.unaryExpr(round);
  }
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw DimensionError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

std::size_t argmax(const Vector& values) {
  return argmax(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

Vector softmax(const Vector& logits) {
  const double top = logits.maxCoeff();
  Vector e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

Vector softmax_with_temperature(const Vector& logits, double temperature) {
  if (!(temperature > 0.0))
    throw ParameterError("softmax temperature must be positive, got " +
                         std::to_string(temperature));
  if (temperature == 1.0) return softmax(logits);
  return softmax(logits / temperature);
}

ForwardTrace forward(const Network& net, std::span<const double> x) {
  ForwardTrace trace;
  forward_into(net, x, trace.activations);
  trace.logits = trace.activations.back();
  trace.probs = softmax(trace.logits);
  return trace;
}

Vector logits(const Network& net, std::span<const double> x) {
  thread_local std::vector<Vector> acts;
  forward_into(net, x, acts);
  return acts.back();
}

std::size_t predict(const Network& net, std::span<const double> x) {
  thread_local std::vector<Vector> acts;
  forward_into(net, x, acts);
  return argmax(acts.back());
}

double loss(const Network& net, std::span<const double> x, std::size_t target) {
  if (target >= net.class_count())
    throw RangeError("target " + std::to_string(target) + " >= class count " +
                     std::to_string(net.class_count()));
  const Vector z = logits(net, x);
  const double top = z.maxCoeff();
  const double log_sum = top + std::log((z.array() - top).exp().sum());
  return log_sum - z[static_cast<Eigen::Index>(target)];
}

Vector backprop_input(const Network& net, const ForwardTrace& trace, const Vector& logit_grad) {
  if (logit_grad.size() != static_cast<Eigen::Index>(net.class_count()))
    throw DimensionError("logit gradient length does not match class count");
  const auto layers = net.layers();
  Vector g = logit_grad;
  for (std::size_t i = layers.size(); i-- > 0;) {
    switch (layers[i].kind) {
      case LayerKind::dense: {
        const auto& p = net.params()[static_cast<std::size_t>(net.dense_index(i))];
        Vector next = p.weight.transpose() * g;
        g = std::move(next);
        break;
      }
      case LayerKind::relu:
        g = (trace.activations[i].array() > 0.0).select(g, 0.0);
        break;
      case LayerKind::softmax_output:
        break;
    }
  }
  return g;
}

Vector input_gradient(const Network& net, std::span<const double> x, std::size_t target) {
  if (target >= net.class_count())
    throw RangeError("target " + std::to_string(target) + " >= class count " +
                     std::to_string(net.class_count()));
  const ForwardTrace trace = forward(net, x);
  Vector dz = trace.probs;
  dz[static_cast<Eigen::Index>(target)] -= 1.0;
  return backprop_input(net, trace, dz);
}

RowMatrix logit_jacobian(const Network& net, std::span<const double> x) {
  const ForwardTrace trace = forward(net, x);
  const auto layers = net.layers();
  const auto classes = static_cast<Eigen::Index>(net.class_count());
  RowMatrix g = RowMatrix::Identity(classes, classes);
  for (std::size_t i = layers.size(); i-- > 0;) {
    switch (layers[i].kind) {
      case LayerKind::dense: {
        const auto& p = net.params()[static_cast<std::size_t>(net.dense_index(i))];
        RowMatrix next = g * p.weight;
        g = std::move(next);
        break;
      }
      case LayerKind::relu: {
        const auto& a = trace.activations[i];
        for (Eigen::Index c = 0; c < g.cols(); ++c)
          if (!(a[c] > 0.0)) g.col(c).setZero();
        break;
      }
      case LayerKind::softmax_output:
        break;
    }
  }
  return g;
}

void forward_batch(const Network& net, const Eigen::MatrixXd& inputs,
                   std::vector<Eigen::MatrixXd>& acts) {
  if (inputs.rows() != static_cast<Eigen::Index>(net.input_dim()))
    throw DimensionError("batch rows do not match network input dim");
  const auto layers = net.layers();
  acts.resize(layers.size() + 1);
  acts[0] = inputs;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    switch (layers[i].kind) {
      case LayerKind::dense: {
        const auto& p = net.params()[static_cast<std::size_t>(net.dense_index(i))];
        acts[i + 1].resize(p.weight.rows(), inputs.cols());
        acts[i + 1].noalias() = p.weight * acts[i];
        acts[i + 1].colwise() += p.bias;
        break;
      }
      case LayerKind::relu:
        acts[i + 1] = acts[i].cwiseMax(0.0);
        break;
      case LayerKind::softmax_output:
        acts[i + 1] = acts[i];
        break;
    }
  }
}

Parameters backward_batch(const Network& net, const std::vector<Eigen::MatrixXd>& acts,
                          const Eigen::MatrixXd& logit_grad) {
  const auto layers = net.layers();
  Parameters grads(net.params().size());
  Eigen::MatrixXd g = logit_grad;
  for (std::size_t i = layers.size(); i-- > 0;) {
    switch (layers[i].kind) {
      case LayerKind::dense: {
        const auto k = static_cast<std::size_t>(net.dense_index(i));
        const auto& p = net.params()[k];
        grads[k].weight.noalias() = g * acts[i].transpose();
        grads[k].bias = g.rowwise().sum();
        if (i > 0) {
          Eigen::MatrixXd next = p.weight.transpose() * g;
          g = std::move(next);
        }
        break;
      }
      case LayerKind::relu:
        g = (acts[i].array() > 0.0).select(g, 0.0);
        break;
      case LayerKind::softmax_output:
        break;
    }
  }
  return grads;
}

Parameters param_gradient(const Network& net, std::span<const LabeledInput> batch) {
  if (batch.empty()) throw ParameterError("param_gradient needs a non-empty batch");
  const auto n = static_cast<Eigen::Index>(net.input_dim());
  const auto b = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd inputs(n, b);
  for (Eigen::Index c = 0; c < b; ++c) {
    const auto& item = batch[static_cast<std::size_t>(c)];
    check_input(net, item.x);
    if (item.target >= net.class_count()) throw RangeError("batch target out of range");
    for (Eigen::Index r = 0; r < n; ++r) inputs(r, c) = item.x[static_cast<std::size_t>(r)];
  }
  std::vector<Eigen::MatrixXd> acts;
  forward_batch(net, inputs, acts);
  Eigen::MatrixXd dz(acts.back().rows(), b);
  for (Eigen::Index c = 0; c < b; ++c) {
    dz.col(c) = softmax(acts.back().col(c));
    dz(static_cast<Eigen::Index>(batch[static_cast<std::size_t>(c)].target), c) -= 1.0;
  }
  dz /= static_cast<double>(b);
  return backward_batch(net, acts, dz);
}

}  // namespace rbc
