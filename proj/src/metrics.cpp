#include "t2ibench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "t2ibench/error.hpp"

namespace t2ibench {

namespace {

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kDomain, "cosine_similarity: dim mismatch (" + std::to_string(a.size()) +
                                        " vs " + std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorKind::kDomain, "cosine_similarity: zero-norm vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double max_abs_asymmetry(const Eigen::MatrixXd& a) { return (a - a.transpose()).cwiseAbs().maxCoeff(); }

double symmetry_tolerance(const Eigen::MatrixXd& a) {
  return 1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff());
}

// Eigen-decomposes a symmetric matrix and clips its small negative eigenvalues.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> psd_eigen(const Eigen::MatrixXd& a, double neg_tolerance,
                                                         Eigen::VectorXd& clipped,
                                                         const char* what) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::kDomain, std::string(what) + ": matrix is not square");
  }
  if (a.size() > 0 && max_abs_asymmetry(a) > symmetry_tolerance(a)) {
    throw Error(ErrorKind::kDomain, std::string(what) + ": matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::kDomain, std::string(what) + ": eigendecomposition failed");
  }
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double scale = std::max(1.0, ev.size() ? ev.maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -neg_tolerance * scale) {
      throw Error(ErrorKind::kDomain, std::string(what) + ": not PSD (eigenvalue " +
                                          std::to_string(ev[i]) + ")");
    }
  }
  clipped = ev.cwiseMax(0.0);
  return solver;
}

}  // namespace

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  return cosine_impl(a, b);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  return cosine_impl(a, b);
}

double clip_prompt_score(std::span<const float> text_emb, std::span<const float> img_emb) {
  return 100.0 * std::max(0.0, cosine_similarity(text_emb, img_emb));
}

double lpips_distance(const FeatureStack& x, const FeatureStack& y, const LayerWeights& weights) {
  if (x.layers.size() != y.layers.size()) {
    throw Error(ErrorKind::kDomain, "lpips_distance: layer count mismatch");
  }
  if (!weights.empty() && weights.size() != x.layers.size()) {
    throw Error(ErrorKind::kDomain, "lpips_distance: weights cover " + std::to_string(weights.size()) +
                                        " layers, stacks have " + std::to_string(x.layers.size()));
  }
  double total = 0.0;
  for (std::size_t l = 0; l < x.layers.size(); ++l) {
    const auto& a = x.layers[l];
    const auto& b = y.layers[l];
    if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
      throw Error(ErrorKind::kDomain, "lpips_distance: shape mismatch in layer " + std::to_string(l));
    }
    if (!weights.empty() && weights[l].size() != a.channels) {
      throw Error(ErrorKind::kDomain,
                  "lpips_distance: layer " + std::to_string(l) + " weights have " +
                      std::to_string(weights[l].size()) + " channels, expected " +
                      std::to_string(a.channels));
    }
    const std::size_t plane = static_cast<std::size_t>(a.height) * a.width;
    if (plane == 0) continue;
    double layer_sum = 0.0;
    for (std::size_t c = 0; c < a.channels; ++c) {
      const double w = weights.empty() ? 1.0 : weights[l][c];
      for (std::size_t s = 0; s < plane; ++s) {
        const double d = w * (static_cast<double>(a.values[c * plane + s]) - b.values[c * plane + s]);
        layer_sum += d * d;
      }
    }
    total += layer_sum / static_cast<double>(plane);
  }
  return total;
}

GaussianStats make_gaussian_stats(Eigen::VectorXd mean, Eigen::MatrixXd cov, std::size_t n) {
  if (n < 2) throw Error(ErrorKind::kDomain, "gaussian stats need n >= 2 samples");
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw Error(ErrorKind::kDomain, "gaussian stats: covariance shape does not match mean");
  }
  if (cov.size() > 0 && max_abs_asymmetry(cov) > symmetry_tolerance(cov)) {
    throw Error(ErrorKind::kDomain, "gaussian stats: covariance is not symmetric");
  }
  return GaussianStats{std::move(mean), std::move(cov), n};
}

GaussianStats gaussian_stats(const EmbeddingBlock& block, std::span<const std::size_t> rows) {
  const std::size_t n = rows.size();
  if (n < 2) throw Error(ErrorKind::kDomain, "gaussian_stats: need at least 2 rows, got " + std::to_string(n));
  const Eigen::Index d = block.dim();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i] >= block.rows()) throw Error(ErrorKind::kDomain, "gaussian_stats: row out of range");
    const auto r = block.row(rows[i]);
    for (Eigen::Index c = 0; c < d; ++c) x(static_cast<Eigen::Index>(i), c) = r[c];
  }
  Eigen::VectorXd mean = x.colwise().mean().transpose();
  x.rowwise() -= mean.transpose();
  Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  cov = 0.5 * (cov + cov.transpose());
  return GaussianStats{std::move(mean), std::move(cov), n};
}

GaussianStats gaussian_stats(const EmbeddingBlock& block) {
  std::vector<std::size_t> rows(block.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return gaussian_stats(block, rows);
}

Eigen::MatrixXd matrix_sqrt_psd(const Eigen::MatrixXd& a, double neg_tolerance) {
  Eigen::VectorXd clipped;
  const auto solver = psd_eigen(a, neg_tolerance, clipped, "matrix_sqrt_psd");
  const Eigen::MatrixXd& v = solver.eigenvectors();
  Eigen::MatrixXd s = v * clipped.cwiseSqrt().asDiagonal() * v.transpose();
  return 0.5 * (s + s.transpose());
}

double frechet_distance(const GaussianStats& s1, const GaussianStats& s2) {
  if (s1.dim() != s2.dim()) {
    throw Error(ErrorKind::kDomain, "frechet_distance: dim mismatch (" + std::to_string(s1.dim()) +
                                        " vs " + std::to_string(s2.dim()) + ")");
  }
  const Eigen::MatrixXd root1 = matrix_sqrt_psd(s1.cov, kFrechetNegTolerance);
  Eigen::MatrixXd inner = root1 * s2.cov * root1;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::VectorXd clipped;
  psd_eigen(inner, kFrechetNegTolerance, clipped, "frechet_distance");
  // Eigenvalues at the rounding floor are numerically zero; their square
  // roots would otherwise inflate the cross term (rank-deficient inputs).
  const double floor = static_cast<double>(clipped.size()) * std::numeric_limits<double>::epsilon() *
                       (clipped.size() ? clipped.maxCoeff() : 0.0);
  const double tr_cross = (clipped.array() > floor).select(clipped.array().sqrt(), 0.0).sum();

  const double mean_term = (s1.mean - s2.mean).squaredNorm();
  const double tr1 = s1.cov.trace();
  const double tr2 = s2.cov.trace();
  const double d = mean_term + tr1 + tr2 - 2.0 * tr_cross;
  if (d >= 0.0) return d;
  const double slack = 1e-8 * std::max(1.0, tr1 + tr2);
  if (d > -slack) return 0.0;
  throw Error(ErrorKind::kDomain, "frechet_distance: negative result " + std::to_string(d));
}

}  // namespace t2ibench
