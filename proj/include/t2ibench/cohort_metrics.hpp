#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "t2ibench/dataset.hpp"
#include "t2ibench/retrieval.hpp"

namespace t2ibench {

inline constexpr std::size_t kDefaultRecallK = 3;

// Flag attached when the generated-image covariance is singular (n <= dim).
inline constexpr const char* kFlagFidRankDeficient = "fid_rank_deficient";

// Aggregated metrics of one (model, prompt_type) cohort.
struct RawMetricRow {
  std::string model;
  PromptType prompt_type = PromptType::kBase;
  double avg_clip_prompt = 0.0;  // [0, 100]
  double avg_clip_cos = 0.0;     // [-1, 1]
  std::optional<double> avg_lpips;
  double fid = 0.0;
  double mrr = 0.0;
  double recall_at_k = 0.0;
  std::size_t k = kDefaultRecallK;
  std::vector<std::string> flags;

  CohortKey key() const { return {model, prompt_type}; }
  friend bool operator==(const RawMetricRow&, const RawMetricRow&) = default;
};

struct CohortMetricOptions {
  std::size_t k = kDefaultRecallK;
  RetrievalDirection direction = RetrievalDirection::kGenToGt;
};

RawMetricRow compute_cohort_metrics(const EvaluationDataset& ds, const CohortKey& key,
                                    const CohortMetricOptions& opts = {});

// Every cohort of the dataset, evaluated on up to `workers` threads and
// returned in (model, prompt_type) order.
std::vector<RawMetricRow> evaluate_dataset(const EvaluationDataset& ds,
                                           const CohortMetricOptions& opts = {},
                                           unsigned workers = 1);

}  // namespace t2ibench
