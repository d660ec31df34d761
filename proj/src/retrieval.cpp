#include "t2ibench/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "t2ibench/error.hpp"

namespace t2ibench {

SimilarityMatrix::SimilarityMatrix(std::size_t n_gen, std::size_t n_gt, std::vector<double> values)
    : n_gen_(n_gen), n_gt_(n_gt), values_(std::move(values)) {
  if (values_.size() != n_gen_ * n_gt_) {
    throw Error(ErrorKind::kDomain, "similarity matrix: value count does not match shape");
  }
  for (double v : values_) {
    if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
      throw Error(ErrorKind::kDomain, "similarity matrix: entries must be finite and in [-1, 1]");
    }
  }
}

std::vector<double> SimilarityMatrix::column(std::size_t j) const {
  std::vector<double> out(n_gen_);
  for (std::size_t i = 0; i < n_gen_; ++i) out[i] = at(i, j);
  return out;
}

namespace {

std::vector<double> row_norms(const EmbeddingBlock& b, const char* which) {
  std::vector<double> norms(b.rows());
  for (std::size_t r = 0; r < b.rows(); ++r) {
    double s = 0.0;
    for (float v : b.row(r)) s += static_cast<double>(v) * v;
    if (s == 0.0) {
      throw Error(ErrorKind::kDomain, std::string("similarity_matrix: zero-norm ") + which +
                                          " row " + std::to_string(r));
    }
    norms[r] = std::sqrt(s);
  }
  return norms;
}

}  // namespace

SimilarityMatrix similarity_matrix(const EmbeddingBlock& gen, const EmbeddingBlock& gt) {
  if (gen.dim() != gt.dim()) {
    throw Error(ErrorKind::kDomain, "similarity_matrix: dim mismatch (" + std::to_string(gen.dim()) +
                                        " vs " + std::to_string(gt.dim()) + ")");
  }
  const auto gen_norm = row_norms(gen, "generated");
  const auto gt_norm = row_norms(gt, "ground-truth");
  std::vector<double> values(static_cast<std::size_t>(gen.rows()) * gt.rows());
  for (std::size_t i = 0; i < gen.rows(); ++i) {
    const auto a = gen.row(i);
    for (std::size_t j = 0; j < gt.rows(); ++j) {
      const auto b = gt.row(j);
      double dot = 0.0;
      for (std::size_t c = 0; c < a.size(); ++c) dot += static_cast<double>(a[c]) * b[c];
      values[i * gt.rows() + j] = std::clamp(dot / (gen_norm[i] * gt_norm[j]), -1.0, 1.0);
    }
  }
  return SimilarityMatrix(gen.rows(), gt.rows(), std::move(values));
}

std::size_t rank_of_truth(std::span<const double> row, std::size_t true_index) {
  if (true_index >= row.size()) {
    throw Error(ErrorKind::kDomain, "rank_of_truth: index " + std::to_string(true_index) +
                                        " out of range for row of length " +
                                        std::to_string(row.size()));
  }
  const double truth = row[true_index];
  const auto greater = std::count_if(row.begin(), row.end(), [truth](double v) { return v > truth; });
  return 1 + static_cast<std::size_t>(greater);
}

double mean_reciprocal_rank(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw Error(ErrorKind::kDomain, "mean_reciprocal_rank: empty rank list");
  double sum = 0.0;
  for (std::size_t r : ranks) {
    if (r == 0) throw Error(ErrorKind::kDomain, "mean_reciprocal_rank: ranks must be >= 1");
    sum += 1.0 / static_cast<double>(r);
  }
  return sum / static_cast<double>(ranks.size());
}

double recall_at_k(std::span<const std::size_t> ranks, std::size_t k) {
  if (ranks.empty()) throw Error(ErrorKind::kDomain, "recall_at_k: empty rank list");
  if (k == 0) throw Error(ErrorKind::kDomain, "recall_at_k: k must be >= 1");
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

std::vector<std::size_t> truth_ranks(const SimilarityMatrix& sim,
                                     std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                     RetrievalDirection direction) {
  std::vector<std::size_t> ranks;
  ranks.reserve(pairs.size());
  if (direction == RetrievalDirection::kGenToGt) {
    for (const auto& [gen, gt] : pairs) {
      if (gen >= sim.n_gen()) throw Error(ErrorKind::kDomain, "truth_ranks: generated row out of range");
      ranks.push_back(rank_of_truth(sim.row(gen), gt));
    }
    return ranks;
  }
  // Pool for the reverse direction is the set of generated rows in `pairs`.
  std::vector<double> column(pairs.size());
  for (std::size_t q = 0; q < pairs.size(); ++q) {
    const std::size_t gt = pairs[q].second;
    if (gt >= sim.n_gt()) throw Error(ErrorKind::kDomain, "truth_ranks: ground-truth row out of range");
    for (std::size_t c = 0; c < pairs.size(); ++c) column[c] = sim.at(pairs[c].first, gt);
    ranks.push_back(rank_of_truth(column, q));
  }
  return ranks;
}

}  // namespace t2ibench
