#include <string>

#include "rbc/error.hpp"
#include "rbc/io.hpp"
#include "rbc/network.hpp"

namespace rbc {

void save_checkpoint(const std::filesystem::path& path, const Network& net,
                     const CheckpointMeta& meta) {
  ByteWriter out;
  out.raw("RBCN");
  out.u32(kCheckpointVersion);
  out.u32(static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& layer : net.layers()) {
    out.u8(static_cast<std::uint8_t>(layer.kind));
    out.u32(static_cast<std::uint32_t>(layer.in_dim));
    out.u32(static_cast<std::uint32_t>(layer.out_dim));
  }
  out.u32(static_cast<std::uint32_t>(net.class_count()));
  for (const auto& p : net.params()) {
    for (Eigen::Index r = 0; r < p.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < p.weight.cols(); ++c)
        out.f32(static_cast<float>(p.weight(r, c)));
    for (Eigen::Index r = 0; r < p.bias.size(); ++r) out.f32(static_cast<float>(p.bias[r]));
  }
  out.u64(meta.seed);
  out.u32(meta.epochs);
  out.u32(static_cast<std::uint32_t>(meta.mode.size()));
  out.raw(meta.mode);
  out.f64(meta.temperature);
  write_file_atomic(path, out.bytes());
}

std::pair<Network, CheckpointMeta> load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  ByteReader in(bytes);
  if (in.raw(4) != "RBCN") throw FormatError(path.string() + ": not a network checkpoint");
  const auto version = in.u32();
  if (version != kCheckpointVersion)
    throw VersionError(path.string() + ": checkpoint version " + std::to_string(version) +
                       ", this build reads version " + std::to_string(kCheckpointVersion));
  const auto layer_count = in.u32();
  std::vector<LayerSpec> layers(layer_count);
  for (auto& layer : layers) {
    const auto kind = in.u8();
    if (kind > static_cast<std::uint8_t>(LayerKind::softmax_output))
      throw FormatError(path.string() + ": unknown layer kind " + std::to_string(kind));
    layer.kind = static_cast<LayerKind>(kind);
    layer.in_dim = in.u32();
    layer.out_dim = in.u32();
  }
  Network net(std::move(layers));
  const auto classes = in.u32();
  if (classes != net.class_count())
    throw FormatError(path.string() + ": class count disagrees with layer specs");
  for (auto& p : net.params()) {
    for (Eigen::Index r = 0; r < p.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < p.weight.cols(); ++c) p.weight(r, c) = in.f32();
    for (Eigen::Index r = 0; r < p.bias.size(); ++r) p.bias[r] = in.f32();
  }
  CheckpointMeta meta;
  meta.seed = in.u64();
  meta.epochs = in.u32();
  meta.mode = in.raw(in.u32());
  meta.temperature = in.f64();
  return {std::move(net), std::move(meta)};
}

}  // namespace rbc
