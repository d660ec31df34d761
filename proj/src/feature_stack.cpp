#include "t2ibench/feature_stack.hpp"

#include <cmath>

#include "t2ibench/embedding.hpp"
#include "t2ibench/error.hpp"

namespace t2ibench {

void unit_normalize_channels(FeatureStack& stack) {
  for (auto& layer : stack.layers) {
    const std::size_t plane = static_cast<std::size_t>(layer.height) * layer.width;
    for (std::size_t site = 0; site < plane; ++site) {
      double norm2 = 0.0;
      for (std::size_t c = 0; c < layer.channels; ++c) {
        const double v = layer.values[c * plane + site];
        norm2 += v * v;
      }
      if (norm2 == 0.0) continue;
      const double inv = 1.0 / std::sqrt(norm2);
      for (std::size_t c = 0; c < layer.channels; ++c) {
        auto& v = layer.values[c * plane + site];
        v = static_cast<float>(v * inv);
      }
    }
  }
}

bool is_channel_normalized(const FeatureStack& stack, double tol) {
  for (const auto& layer : stack.layers) {
    const std::size_t plane = static_cast<std::size_t>(layer.height) * layer.width;
    for (std::size_t site = 0; site < plane; ++site) {
      double norm2 = 0.0;
      for (std::size_t c = 0; c < layer.channels; ++c) {
        const double v = layer.values[c * plane + site];
        norm2 += v * v;
      }
      if (norm2 != 0.0 && std::abs(std::sqrt(norm2) - 1.0) > tol) return false;
    }
  }
  return true;
}

FeatureStack decode_feature_stack(std::string_view bytes, const std::string& source) {
  auto need = [&](std::size_t offset, std::size_t n) {
    if (offset + n > bytes.size()) {
      throw Error(ErrorKind::kFormat, source + ": size mismatch: truncated feature stack");
    }
  };
  need(0, 8);
  if (bytes.substr(0, 4) != "LFS1") throw Error(ErrorKind::kFormat, source + ": bad magic");
  const std::uint32_t n_layers = le::get_u32(bytes, 4);
  std::size_t off = 8;
  FeatureStack stack;
  stack.layers.reserve(n_layers);
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    need(off, 12);
    FeatureLayer layer;
    layer.channels = le::get_u32(bytes, off);
    layer.height = le::get_u32(bytes, off + 4);
    layer.width = le::get_u32(bytes, off + 8);
    off += 12;
    const std::uint64_t count = static_cast<std::uint64_t>(layer.channels) * layer.height * layer.width;
    need(off, 4 * count);
    layer.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      const float v = le::get_f32(bytes, off + 4 * i);
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kFormat,
                    source + ": non-finite value in layer " + std::to_string(l));
      }
      layer.values[i] = v;
    }
    off += 4 * count;
    stack.layers.push_back(std::move(layer));
  }
  if (off != bytes.size()) {
    throw Error(ErrorKind::kFormat, source + ": size mismatch: trailing bytes after last layer");
  }
  return stack;
}

std::string encode_feature_stack(const FeatureStack& stack) {
  std::string out = "LFS1";
  le::put_u32(out, static_cast<std::uint32_t>(stack.layers.size()));
  for (const auto& layer : stack.layers) {
    le::put_u32(out, layer.channels);
    le::put_u32(out, layer.height);
    le::put_u32(out, layer.width);
    for (float v : layer.values) le::put_f32(out, v);
  }
  return out;
}

FeatureStack read_feature_stack(const std::filesystem::path& path) {
  auto stack = decode_feature_stack(read_file_bytes(path), path.string());
  unit_normalize_channels(stack);
  return stack;
}

void write_feature_stack(const std::filesystem::path& path, const FeatureStack& stack) {
  write_file_bytes(path, encode_feature_stack(stack));
}

}  // namespace t2ibench
