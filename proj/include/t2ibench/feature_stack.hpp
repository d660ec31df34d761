#pragma once

// Per-layer network activations used for perceptual distance, and the
// `.lfs` file format: magic "LFS1", u32 layer count, then per layer
// u32 C, H, W followed by C*H*W f32 little-endian values in C,H,W order.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace t2ibench {

struct FeatureLayer {
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> values;  // channel-major: values[(c * H + h) * W + w]

  float at(std::size_t c, std::size_t h, std::size_t w) const {
    return values[(c * height + h) * width + w];
  }
  friend bool operator==(const FeatureLayer&, const FeatureLayer&) = default;
};

struct FeatureStack {
  std::vector<FeatureLayer> layers;
  friend bool operator==(const FeatureStack&, const FeatureStack&) = default;
};

// Rescales every spatial site's channel vector to unit L2 norm. All-zero
// sites are left as zero.
void unit_normalize_channels(FeatureStack& stack);

// True when every site is unit-norm within `tol` or all-zero.
bool is_channel_normalized(const FeatureStack& stack, double tol = 1e-4);

FeatureStack decode_feature_stack(std::string_view bytes, const std::string& source = "<memory>");
std::string encode_feature_stack(const FeatureStack& stack);

// Reads an `.lfs` file and unit-normalizes its channels.
FeatureStack read_feature_stack(const std::filesystem::path& path);
void write_feature_stack(const std::filesystem::path& path, const FeatureStack& stack);

}  // namespace t2ibench
