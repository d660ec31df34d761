#pragma once

// Pure metric kernels: cosine similarity, CLIP prompt score, LPIPS
// aggregation over feature stacks, Gaussian statistics, PSD matrix square
// root and the Frechet distance between Gaussians.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "t2ibench/embedding.hpp"
#include "t2ibench/feature_stack.hpp"

namespace t2ibench {

// a.b / (|a||b|), clamped to [-1, 1]. Throws on dim mismatch or zero norm.
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// 100 * max(0, cos(text, image)).
double clip_prompt_score(std::span<const float> text_emb, std::span<const float> img_emb);

using LayerWeights = std::vector<std::vector<float>>;

// sum_l 1/(H_l W_l) sum_{h,w} || w_l * (x_l[h,w] - y_l[h,w]) ||^2.
// Empty `weights` means unit weight on every channel.
double lpips_distance(const FeatureStack& x, const FeatureStack& y, const LayerWeights& weights = {});

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  std::size_t n = 0;

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  // Sample covariance has rank <= n - 1, so it is singular once n <= dim.
  bool rank_deficient() const { return n <= dim(); }
};

// Validates shape, symmetry and n >= 2.
GaussianStats make_gaussian_stats(Eigen::VectorXd mean, Eigen::MatrixXd cov, std::size_t n);

// Sample mean and unbiased (n-1) covariance, symmetrized as (C + C^T) / 2.
GaussianStats gaussian_stats(const EmbeddingBlock& block);
// Same over a subset of rows.
GaussianStats gaussian_stats(const EmbeddingBlock& block, std::span<const std::size_t> rows);

inline constexpr double kPsdNegTolerance = 1e-6;
inline constexpr double kFrechetNegTolerance = 1e-5;

// Symmetric PSD square root by eigendecomposition, eigenvalues clipped at 0.
// Eigenvalues below -neg_tolerance * max(1, lambda_max) are rejected.
Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& a, double neg_tolerance = kPsdNegTolerance);

// |mu1 - mu2|^2 + Tr(S1 + S2 - 2 (sqrt(S1) S2 sqrt(S1))^{1/2}).
double frechet_distance(const GaussianStats& s1, const GaussianStats& s2);

}  // namespace t2ibench
