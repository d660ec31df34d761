#pragma once

// Composite scoring of cohort metrics: min-max normalization (inverted for
// LPIPS and FID), the weighted score, leaderboard ranking, base-vs-metadata
// deltas and profile-based recommendation.

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "t2ibench/cohort_metrics.hpp"

namespace t2ibench {

enum class CohortScope { kAllRows, kPerPromptType };

std::string_view to_string(CohortScope s);
// Accepts "all_rows"/"all" and "per_prompt_type"/"per-prompt-type".
CohortScope parse_cohort_scope(std::string_view s);

struct WeightProfile {
  std::string name;
  double w_clip = 0.0;  // generated vs ground-truth CLIP cosine
  double w_lpips = 0.0;
  double w_fid = 0.0;
  double w_ret = 0.0;
  double w_clip_prompt = 0.0;  // prompt vs generated CLIP score
  CohortScope cohort_scope = CohortScope::kAllRows;

  std::array<double, 5> weights() const { return {w_clip, w_lpips, w_fid, w_ret, w_clip_prompt}; }
  double sum() const;
  // Throws ErrorKind::kValidation unless all weights >= 0 and sum to 1 within 1e-9.
  void validate() const;
  // Scaled so the weights sum to 1. Throws on negative weights or zero sum.
  WeightProfile renormalized() const;

  friend bool operator==(const WeightProfile&, const WeightProfile&) = default;
};

inline constexpr double kWeightSumTolerance = 1e-9;

WeightProfile paper_default_profile();
// Parses "clip,lpips,fid,ret,clip_prompt".
WeightProfile parse_weights(std::string_view csv, std::string name = "custom");

nlohmann::ordered_json to_json(const WeightProfile& p);
WeightProfile profile_from_json(const nlohmann::json& j);

struct NormalizedMetrics {
  std::optional<double> n_clip;
  std::optional<double> n_lpips;
  std::optional<double> n_fid;
  std::optional<double> n_ret;
  std::optional<double> n_clip_prompt;
  // Components of n_ret.
  std::optional<double> n_mrr;
  std::optional<double> n_recall;

  friend bool operator==(const NormalizedMetrics&, const NormalizedMetrics&) = default;
};

// (x - min) / (max - min), or (max - x) / (max - min) when inverted. A
// constant column maps to 0.5. Missing values stay missing and do not take
// part in min/max.
std::vector<std::optional<double>> min_max_normalize(std::span<const std::optional<double>> values,
                                                     bool invert);
std::vector<double> min_max_normalize(std::span<const double> values, bool invert);

double retrieval_composite(double mrr, double recall);

struct WeightedScore {
  double value = 0.0;
  bool partial = false;  // some weighted component was missing
};

WeightedScore weighted_score(const NormalizedMetrics& n, const WeightProfile& p);

inline constexpr const char* kFlagPartial = "partial";

struct LeaderboardEntry {
  RawMetricRow raw;
  NormalizedMetrics normalized;
  double weighted_score = 0.0;
  bool partial = false;

  // raw.flags plus "partial" when applicable.
  std::vector<std::string> flags() const;
};

struct Leaderboard {
  static constexpr std::string_view kTieBreak = "model name, then prompt_type, lexicographic";

  WeightProfile profile;
  std::vector<LeaderboardEntry> entries;
};

Leaderboard rank_models(std::span<const RawMetricRow> rows, const WeightProfile& p);

struct ModelDelta {
  std::string model;
  double base_score = 0.0;
  double metadata_score = 0.0;
  double delta = 0.0;  // metadata - base
  double d_clip_prompt = 0.0;
  double d_clip_cos = 0.0;
  std::optional<double> d_lpips;
  double d_fid = 0.0;
  double d_mrr = 0.0;
  double d_recall = 0.0;
};

struct DeltaReport {
  WeightProfile profile;
  std::vector<ModelDelta> models;  // sorted by model name
};

DeltaReport compare_prompt_types(std::span<const RawMetricRow> rows, const WeightProfile& p);

class ProfileRegistry {
 public:
  // paper-default, realism, semantic-fidelity, retrieval.
  static ProfileRegistry builtin();

  // Builtins plus every *.json under `dir` (single profile or {"profiles": [...]}),
  // read in file-name order. User profiles replace builtins of the same name.
  static ProfileRegistry with_user_dir(const std::filesystem::path& dir);

  void add(WeightProfile p);
  const WeightProfile& find(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;
  const std::vector<WeightProfile>& profiles() const { return profiles_; }

  nlohmann::ordered_json to_json() const;
  void merge_json(const nlohmann::json& doc);

 private:
  std::vector<WeightProfile> profiles_;
};

struct Recommendation {
  std::string model;
  PromptType prompt_type = PromptType::kBase;
  double weighted_score = 0.0;
  bool partial = false;
  std::string rationale;
};

Recommendation recommend(std::span<const RawMetricRow> rows, std::string_view task,
                         const ProfileRegistry& registry = ProfileRegistry::builtin());

}  // namespace t2ibench
