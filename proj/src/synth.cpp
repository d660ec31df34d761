#include "t2ibench/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "t2ibench/error.hpp"
#include "t2ibench/promptgen.hpp"

namespace t2ibench {

double NormalStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double synth_sigma(const SynthOptions& opts, std::size_t model, PromptType pt) {
  const double sigma = opts.base_sigma + opts.sigma_step * static_cast<double>(model);
  return pt == PromptType::kMetadata ? sigma * opts.metadata_noise_scale : sigma;
}

namespace {

constexpr std::array<const char*, 3> kGenders = {"women", "men", "women"};
constexpr std::array<const char*, 4> kCategories = {"shirt", "dress", "trousers", "jacket"};
constexpr std::array<const char*, 3> kSleeves = {"short", "medium", "long"};
constexpr std::array<const char*, 3> kNecklines = {"lapel", "round", "v-shape"};
constexpr std::array<const char*, 3> kFabrics = {"cotton", "denim", "knitted"};

std::vector<float> gaussian_rows(NormalStream& rng, std::size_t rows, std::size_t dim, bool unit) {
  std::vector<float> out(rows * dim);
  for (std::size_t r = 0; r < rows; ++r) {
    double norm2 = 0.0;
    std::vector<double> v(dim);
    for (auto& x : v) {
      x = rng.next();
      norm2 += x * x;
    }
    const double scale = unit ? 1.0 / std::sqrt(norm2) : 1.0;
    for (std::size_t c = 0; c < dim; ++c) out[r * dim + c] = static_cast<float>(v[c] * scale);
  }
  return out;
}

std::vector<float> perturbed(NormalStream& rng, const std::vector<float>& base, double sigma) {
  std::vector<float> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    out[i] = static_cast<float>(base[i] + sigma * rng.next());
  }
  return out;
}

// Two small layers per image; a separate stream keeps the embedding draws
// identical whichever LPIPS source is chosen.
FeatureStack random_stack(NormalStream& rng) {
  FeatureStack s;
  s.layers.push_back({4, 2, 2, std::vector<float>(16)});
  s.layers.push_back({3, 1, 1, std::vector<float>(3)});
  for (auto& layer : s.layers) {
    for (auto& v : layer.values) v = static_cast<float>(rng.next());
  }
  unit_normalize_channels(s);
  return s;
}

FeatureStack perturbed_stack(NormalStream& rng, const FeatureStack& base, double sigma) {
  FeatureStack s = base;
  for (auto& layer : s.layers) {
    for (auto& v : layer.values) v = static_cast<float>(v + sigma * rng.next());
  }
  unit_normalize_channels(s);
  return s;
}

void add_feature_stacks(const SynthOptions& opts, EvaluationDataset& ds) {
  NormalStream rng(opts.seed ^ 0x5eedULL);
  for (const auto& p : ds.prompts) ds.gt_lpips_stacks.emplace(p.prompt_id, random_stack(rng));
  for (std::size_t m = 0; m < ds.models.size(); ++m) {
    for (auto pt : ds.prompt_types) {
      auto& cohort = ds.cohorts.at({ds.models[m], pt});
      const double sigma = synth_sigma(opts, m, pt);
      for (const auto& p : ds.prompts) {
        cohort.lpips_stacks.emplace(p.prompt_id, perturbed_stack(rng, ds.gt_lpips_stacks.at(p.prompt_id), sigma));
      }
    }
  }
}

}  // namespace

EvaluationDataset make_synthetic_dataset(const SynthOptions& opts) {
  if (opts.models == 0 || opts.prompts < 2 || opts.clip_dim == 0 || opts.inception_dim == 0) {
    throw Error(ErrorKind::kValidation, "synth needs models >= 1, prompts >= 2 and positive dims");
  }
  NormalStream rng(opts.seed);
  const std::size_t n = opts.prompts;
  const auto rows = static_cast<std::uint32_t>(n);

  EvaluationDataset ds;
  for (std::size_t m = 0; m < opts.models; ++m) ds.models.push_back("model_" + std::to_string(m));
  ds.prompt_types = {PromptType::kBase, PromptType::kMetadata};
  ds.dims = {opts.clip_dim, opts.inception_dim};
  ds.lpips_source = opts.lpips_source;
  if (opts.lpips_source != LpipsSource::kAbsent) ds.lpips_backbone = "synthetic";

  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "p%03zu", i);
    PromptRecord p;
    p.prompt_id = id;
    const char* category = kCategories[i % kCategories.size()];
    p.base_prompt = std::string("a person wears a ") + kFabrics[i % kFabrics.size()] + " " + category;
    p.attributes = {{"gender", kGenders[i % kGenders.size()]},
                    {"category", category},
                    {"sleeve length", kSleeves[i % kSleeves.size()]},
                    {"neckline", kNecklines[(i / 2) % kNecklines.size()]},
                    {"fabric", kFabrics[i % kFabrics.size()]}};
    AttributeSet attrs;
    for (const auto& [k, v] : p.attributes) attrs.set(k, v);
    p.metadata_prompt = build_metadata_prompt(p.base_prompt, attrs);
    p.gt_image_ref = "gt/" + p.prompt_id + ".jpg";
    ds.prompts.push_back(std::move(p));
  }

  const auto gt_clip = gaussian_rows(rng, n, opts.clip_dim, true);
  const auto gt_inception = gaussian_rows(rng, n, opts.inception_dim, false);
  ds.gt_clip.emplace(rows, opts.clip_dim, gt_clip, BlockKind::kClipImage);
  ds.gt_inception.emplace(rows, opts.inception_dim, gt_inception, BlockKind::kInception);
  ds.text_clip.emplace(PromptType::kBase,
                       EmbeddingBlock(rows, opts.clip_dim, perturbed(rng, gt_clip, 0.3), BlockKind::kClipText));
  ds.text_clip.emplace(PromptType::kMetadata,
                       EmbeddingBlock(rows, opts.clip_dim, perturbed(rng, gt_clip, 0.25), BlockKind::kClipText));

  for (std::size_t m = 0; m < opts.models; ++m) {
    for (auto pt : ds.prompt_types) {
      const CohortKey key{ds.models[m], pt};
      const double sigma = synth_sigma(opts, m, pt);
      CohortData cohort;
      cohort.files = default_cohort_files(key);
      const auto gen_clip = perturbed(rng, gt_clip, sigma);
      cohort.gen_clip.emplace(rows, opts.clip_dim, gen_clip, BlockKind::kClipImage);
      cohort.gen_inception.emplace(rows, opts.inception_dim, perturbed(rng, gt_inception, sigma),
                                   BlockKind::kInception);
      for (std::size_t i = 0; i < n; ++i) {
        PairRecord p;
        p.model = key.model;
        p.prompt_type = pt;
        p.prompt_id = ds.prompts[i].prompt_id;
        p.gen_image_ref = "gen/" + key.model + "/" + std::string(to_string(pt)) + "/" + p.prompt_id + ".png";
        p.gt_image_ref = ds.prompts[i].gt_image_ref;
        p.row_index = i;
        if (opts.lpips_source == LpipsSource::kScalarCsv) {
          double d2 = 0.0;
          for (std::size_t c = 0; c < opts.clip_dim; ++c) {
            const double d = static_cast<double>(gen_clip[i * opts.clip_dim + c]) - gt_clip[i * opts.clip_dim + c];
            d2 += d * d;
          }
          // Written with 6 decimals, so keep the in-memory value on that grid.
          p.lpips_value = std::round(0.5 * std::sqrt(d2) * 1e6) / 1e6;
        }
        ds.pairs.push_back(std::move(p));
      }
      ds.cohorts.emplace(key, std::move(cohort));
    }
  }
  if (opts.lpips_source == LpipsSource::kFeatureStacks) add_feature_stacks(opts, ds);
  return ds;
}

void write_synthetic_dataset(const std::filesystem::path& root, const SynthOptions& opts) {
  write_dataset(root, make_synthetic_dataset(opts));
}

}  // namespace t2ibench
