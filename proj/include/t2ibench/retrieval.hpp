#pragma once

// Ground-truth retrieval: pairwise cosine similarity between generated and
// ground-truth embeddings, rank of the paired ground truth, MRR and Recall@K.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "t2ibench/embedding.hpp"

namespace t2ibench {

class SimilarityMatrix {
 public:
  SimilarityMatrix(std::size_t n_gen, std::size_t n_gt, std::vector<double> values);

  std::size_t n_gen() const { return n_gen_; }
  std::size_t n_gt() const { return n_gt_; }
  double at(std::size_t i, std::size_t j) const { return values_[i * n_gt_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * n_gt_, n_gt_);
  }
  std::vector<double> column(std::size_t j) const;
  std::span<const double> values() const { return values_; }

 private:
  std::size_t n_gen_;
  std::size_t n_gt_;
  std::vector<double> values_;
};

// Entry (i, j) = cosine(gen row i, gt row j).
SimilarityMatrix similarity_matrix(const EmbeddingBlock& gen, const EmbeddingBlock& gt);

// 1 + number of entries strictly greater than row[true_index]; ties count in
// the query's favour.
std::size_t rank_of_truth(std::span<const double> row, std::size_t true_index);

double mean_reciprocal_rank(std::span<const std::size_t> ranks);
double recall_at_k(std::span<const std::size_t> ranks, std::size_t k);

enum class RetrievalDirection {
  kGenToGt,  // query = generated image, pool = every ground-truth image
  kGtToGen,  // query = ground-truth image, pool = the cohort's generated images
};

// Rank of the true partner for each (gen_row, gt_row) pair.
std::vector<std::size_t> truth_ranks(const SimilarityMatrix& sim,
                                     std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                     RetrievalDirection direction = RetrievalDirection::kGenToGt);

}  // namespace t2ibench
