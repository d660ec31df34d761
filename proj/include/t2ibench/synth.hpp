#pragma once

// Deterministic synthetic datasets with a known ranking: ground-truth CLIP
// rows are unit-normalized Gaussians and model m's generated embeddings are
// ground truth plus Gaussian noise of scale sigma(m), so model 0 is best.

#include <cstdint>
#include <filesystem>
#include <random>

#include "t2ibench/dataset.hpp"

namespace t2ibench {

struct SynthOptions {
  std::uint64_t seed = 7;
  std::size_t models = 3;
  std::size_t prompts = 16;
  std::uint32_t clip_dim = 32;
  std::uint32_t inception_dim = 8;
  double base_sigma = 0.05;   // noise of model 0
  double sigma_step = 0.15;   // added per model index
  // Noise multiplier of the metadata cohort relative to base (< 1 plants a
  // metadata advantage).
  double metadata_noise_scale = 0.7;
  LpipsSource lpips_source = LpipsSource::kScalarCsv;
};

double synth_sigma(const SynthOptions& opts, std::size_t model, PromptType pt);

// Standard normal draws from a std::mt19937_64 stream via Box-Muller, so the
// sequence is identical on every standard library.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next();
  double uniform();  // [0, 1)

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

EvaluationDataset make_synthetic_dataset(const SynthOptions& opts);
void write_synthetic_dataset(const std::filesystem::path& root, const SynthOptions& opts);

}  // namespace t2ibench
