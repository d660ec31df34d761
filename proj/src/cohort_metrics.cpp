#include "t2ibench/cohort_metrics.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "t2ibench/error.hpp"
#include "t2ibench/metrics.hpp"

namespace t2ibench {

RawMetricRow compute_cohort_metrics(const EvaluationDataset& ds, const CohortKey& key,
                                    const CohortMetricOptions& opts) {
  auto it = ds.cohorts.find(key);
  if (it == ds.cohorts.end()) {
    throw Error(ErrorKind::kNotFound, "cohort " + to_string(key) + " is absent from the dataset");
  }
  const CohortData& cohort = it->second;
  const auto pairs = ds.cohort_pairs(key);
  if (pairs.empty()) throw Error(ErrorKind::kDomain, "cohort " + to_string(key) + " has no pairs");
  const auto text = ds.text_clip.find(key.prompt_type);
  if (!cohort.gen_clip || !cohort.gen_inception || !ds.gt_clip || !ds.gt_inception ||
      text == ds.text_clip.end()) {
    throw Error(ErrorKind::kDomain, "cohort " + to_string(key) + " is missing embedding blocks");
  }
  const EmbeddingBlock& gen_clip = *cohort.gen_clip;
  const EmbeddingBlock& gt_clip = *ds.gt_clip;

  RawMetricRow row;
  row.model = key.model;
  row.prompt_type = key.prompt_type;
  row.k = opts.k;

  std::vector<std::size_t> rows;
  std::vector<std::pair<std::size_t, std::size_t>> retrieval_pairs;
  double sum_prompt = 0.0;
  double sum_cos = 0.0;
  double sum_lpips = 0.0;
  std::size_t n_lpips = 0;
  for (const PairRecord* p : pairs) {
    const std::size_t r = p->row_index;
    rows.push_back(r);
    retrieval_pairs.emplace_back(r, r);
    sum_prompt += clip_prompt_score(text->second.row(r), gen_clip.row(r));
    sum_cos += cosine_similarity(gen_clip.row(r), gt_clip.row(r));

    std::optional<double> lpips;
    if (ds.lpips_source == LpipsSource::kScalarCsv) {
      lpips = p->lpips_value;
    } else if (ds.lpips_source == LpipsSource::kFeatureStacks) {
      auto gen = cohort.lpips_stacks.find(p->prompt_id);
      auto gt = ds.gt_lpips_stacks.find(p->prompt_id);
      if (gen != cohort.lpips_stacks.end() && gt != ds.gt_lpips_stacks.end()) {
        lpips = lpips_distance(gen->second, gt->second, ds.lpips_weights);
      }
    }
    if (lpips) {
      sum_lpips += *lpips;
      ++n_lpips;
    }
  }
  const double n = static_cast<double>(pairs.size());
  row.avg_clip_prompt = sum_prompt / n;
  row.avg_clip_cos = sum_cos / n;
  if (n_lpips > 0) row.avg_lpips = sum_lpips / static_cast<double>(n_lpips);

  const GaussianStats gen_stats = gaussian_stats(*cohort.gen_inception, rows);
  const GaussianStats gt_stats = gaussian_stats(*ds.gt_inception);
  row.fid = frechet_distance(gen_stats, gt_stats);
  if (gen_stats.rank_deficient() || gt_stats.rank_deficient()) {
    row.flags.emplace_back(kFlagFidRankDeficient);
  }

  const SimilarityMatrix sim = similarity_matrix(gen_clip, gt_clip);
  const auto ranks = truth_ranks(sim, retrieval_pairs, opts.direction);
  row.mrr = mean_reciprocal_rank(ranks);
  row.recall_at_k = recall_at_k(ranks, opts.k);
  return row;
}

std::vector<RawMetricRow> evaluate_dataset(const EvaluationDataset& ds,
                                           const CohortMetricOptions& opts, unsigned workers) {
  const auto keys = ds.cohort_keys();
  std::vector<RawMetricRow> rows(keys.size());
  std::vector<std::exception_ptr> errors(keys.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      try {
        rows[i] = compute_cohort_metrics(ds, keys[i], opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads =
      std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(keys.size())));
  std::vector<std::thread> threads;
  for (unsigned t = 1; t < n_threads; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace t2ibench
