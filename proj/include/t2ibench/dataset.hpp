#pragma once

// Evaluation dataset: prompts, generated/ground-truth pairing and the
// embedding blocks of every (model, prompt_type) cohort.
//
// On-disk layout under a dataset root:
//   manifest.json          models, prompt types, dims, block file names
//   prompts.csv            prompt_id,base_prompt,metadata_prompt,gt_image,<attributes...>
//   gen_img_metadata.csv   model,prompt_type,prompt_id,gen_image,gt_image
//   *.emb                  embedding blocks (see embedding.hpp)
//   lpips CSVs or `.lfs` stacks per cohort, depending on lpips_source
//
// Row r of every block corresponds to row r of prompts.csv.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "t2ibench/embedding.hpp"
#include "t2ibench/feature_stack.hpp"

namespace t2ibench {

enum class PromptType { kBase, kMetadata };

std::string_view to_string(PromptType t);
PromptType parse_prompt_type(std::string_view s);

enum class LpipsSource { kScalarCsv, kFeatureStacks, kAbsent };

std::string_view to_string(LpipsSource s);
LpipsSource parse_lpips_source(std::string_view s);

inline constexpr std::uint32_t kDefaultClipDim = 512;
inline constexpr std::uint32_t kDefaultInceptionDim = 2048;

struct PromptRecord {
  std::string prompt_id;
  std::string base_prompt;
  std::string metadata_prompt;
  std::string gt_image_ref;
  std::vector<std::pair<std::string, std::string>> attributes;  // column order of prompts.csv

  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

struct PairRecord {
  std::string model;
  PromptType prompt_type = PromptType::kBase;
  std::string prompt_id;
  std::string gen_image_ref;
  std::string gt_image_ref;
  std::size_t row_index = 0;
  std::optional<double> lpips_value;

  friend bool operator==(const PairRecord&, const PairRecord&) = default;
};

struct CohortKey {
  std::string model;
  PromptType prompt_type = PromptType::kBase;

  friend auto operator<=>(const CohortKey&, const CohortKey&) = default;
};

std::string to_string(const CohortKey& key);

// File names a cohort's data is read from, relative to the dataset root.
struct CohortFiles {
  std::string gen_clip;
  std::string gen_inception;
  std::string lpips_csv;     // scalar_csv source
  std::string lpips_stacks;  // feature_stacks source: directory of <prompt_id>.lfs
  friend bool operator==(const CohortFiles&, const CohortFiles&) = default;
};

struct CohortData {
  CohortFiles files;
  std::optional<EmbeddingBlock> gen_clip;
  std::optional<EmbeddingBlock> gen_inception;
  std::map<std::string, FeatureStack> lpips_stacks;  // by prompt_id

  friend bool operator==(const CohortData&, const CohortData&) = default;
};

struct Dims {
  std::uint32_t clip = kDefaultClipDim;
  std::uint32_t inception = kDefaultInceptionDim;
  friend bool operator==(const Dims&, const Dims&) = default;
};

struct EvaluationDataset {
  std::filesystem::path root;
  std::vector<std::string> models;
  std::vector<PromptType> prompt_types;
  Dims dims;
  LpipsSource lpips_source = LpipsSource::kAbsent;
  std::string lpips_backbone;                     // recorded, never interpreted
  std::vector<std::vector<float>> lpips_weights;  // per layer; empty = unit weights

  std::vector<PromptRecord> prompts;
  std::vector<PairRecord> pairs;

  std::optional<EmbeddingBlock> gt_clip;
  std::optional<EmbeddingBlock> gt_inception;
  std::map<PromptType, EmbeddingBlock> text_clip;
  std::map<std::string, FeatureStack> gt_lpips_stacks;  // by prompt_id
  std::map<CohortKey, CohortData> cohorts;

  std::vector<CohortKey> cohort_keys() const;
  // Pairs of one cohort ordered by row index.
  std::vector<const PairRecord*> cohort_pairs(const CohortKey& key) const;
  std::optional<std::size_t> prompt_index(std::string_view prompt_id) const;

  friend bool operator==(const EvaluationDataset&, const EvaluationDataset&) = default;
};

EvaluationDataset load_dataset(const std::filesystem::path& root);

// Writes `ds` under `root` in the layout load_dataset reads, using each
// cohort's CohortFiles names (defaults when empty). LPIPS scalars come from
// PairRecord::lpips_value.
void write_dataset(const std::filesystem::path& root, const EvaluationDataset& ds);

// Default CohortFiles for a cohort.
CohortFiles default_cohort_files(const CohortKey& key);

enum class Severity { kWarning, kError };

std::string_view to_string(Severity s);

struct ValidationIssue {
  Severity severity;
  std::string location;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<ValidationIssue> issues;

  std::size_t count(Severity s) const;
};

ValidationReport validate_dataset(const EvaluationDataset& ds);

}  // namespace t2ibench
