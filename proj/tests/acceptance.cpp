// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "t2ibench/cli.hpp"
#include "t2ibench/csv.hpp"
#include "t2ibench/embedding.hpp"
#include "t2ibench/format.hpp"
#include "t2ibench/metrics.hpp"
#include "t2ibench/promptgen.hpp"
#include "t2ibench/report.hpp"
#include "t2ibench/retrieval.hpp"
#include "t2ibench/scoring.hpp"
#include "test_util.hpp"

using namespace t2ibench;
using t2ibench::testing::TempDir;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;  // 0 = untimed
  std::function<Outcome()> run;
};

void require(Outcome& o, bool cond, const std::string& what) {
  if (!cond && o.pass) {
    o.pass = false;
    o.detail = what;
  }
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

Eigen::MatrixXd random_spd(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = n(rng);
  return a * a.transpose() + 1e-3 * Eigen::MatrixXd::Identity(d, d);
}

RawMetricRow random_row(std::mt19937_64& rng, const std::string& model, PromptType pt) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RawMetricRow r;
  r.model = model;
  r.prompt_type = pt;
  r.avg_clip_prompt = 20 + 20 * u(rng);
  r.avg_clip_cos = u(rng);
  r.avg_lpips = u(rng);
  r.fid = 100 * u(rng);
  r.mrr = 0.05 + 0.95 * u(rng);
  r.recall_at_k = u(rng);
  return r;
}

std::vector<std::string> order_of(const Leaderboard& b) {
  std::vector<std::string> out;
  for (const auto& e : b.entries) out.push_back(e.raw.model + "/" + std::string(to_string(e.raw.prompt_type)));
  return out;
}

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  if (out) *out = o.str();
  return code;
}

Outcome frechet_closed_form() {
  Outcome o;
  std::mt19937_64 rng(101);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> var(0.01, 4.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + t % 8;
    Eigen::VectorXd m1(d), m2(d), v1(d), v2(d);
    double closed = 0.0;
    for (int i = 0; i < d; ++i) {
      m1(i) = n(rng);
      m2(i) = n(rng);
      v1(i) = var(rng);
      v2(i) = var(rng);
      const double ds = std::sqrt(v1(i)) - std::sqrt(v2(i));
      closed += (m1(i) - m2(i)) * (m1(i) - m2(i)) + ds * ds;
    }
    const double f = frechet_distance(make_gaussian_stats(m1, v1.asDiagonal(), 16),
                                      make_gaussian_stats(m2, v2.asDiagonal(), 16));
    worst = std::max(worst, std::abs(f - closed));
  }
  require(o, worst <= 1e-8, "max error " + sci(worst));
  if (o.pass) o.detail = "max |error| " + sci(worst) + " <= 1e-8";
  return o;
}

Outcome sqrt_residual() {
  Outcome o;
  std::mt19937_64 rng(102);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + (t * 63) / 49;  // 1 .. 64
    const Eigen::MatrixXd a = random_spd(rng, d);
    const Eigen::MatrixXd s = matrix_sqrt_psd(a);
    worst = std::max(worst, (s * s - a).norm() / std::max(1.0, a.norm()));
  }
  require(o, worst <= 1e-8, "max residual " + sci(worst));
  if (o.pass) o.detail = "max relative residual " + sci(worst) + " <= 1e-8";
  return o;
}

Outcome fid_identity_symmetry() {
  Outcome o;
  std::mt19937_64 rng(103);
  const auto x = gaussian_stats(t2ibench::testing::random_block(rng, 64, 16, BlockKind::kInception));
  const auto y = gaussian_stats(t2ibench::testing::random_block(rng, 64, 16, BlockKind::kInception));
  const double self = frechet_distance(x, x);
  const double asym = std::abs(frechet_distance(x, y) - frechet_distance(y, x));
  require(o, self <= 1e-6, "FID(X,X) = " + sci(self));
  require(o, asym <= 1e-8, "asymmetry " + sci(asym));
  if (o.pass) o.detail = "FID(X,X) " + sci(self) + " <= 1e-6, asymmetry " + sci(asym) + " <= 1e-8";
  return o;
}

Outcome retrieval_oracle() {
  Outcome o;
  std::mt19937_64 rng(104);
  std::size_t ties = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(400);
    // Half the matrices on a coarse grid to force ties.
    for (auto& x : v) {
      x = t % 2 ? static_cast<double>(static_cast<int>(rng() % 9) - 4) / 4.0
                : std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    }
    const SimilarityMatrix sim(20, 20, v);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < 20; ++i) pairs.emplace_back(i, i);
    const auto ranks = truth_ranks(sim, pairs);
    double mrr = 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      std::vector<std::size_t> idx(20);
      std::iota(idx.begin(), idx.end(), 0);
      const auto row = sim.row(i);
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (row[a] != row[b]) return row[a] > row[b];
        if ((a == i) != (b == i)) return a == i;
        return a < b;
      });
      const std::size_t r = static_cast<std::size_t>(std::find(idx.begin(), idx.end(), i) - idx.begin()) + 1;
      for (std::size_t j = 0; j < 20; ++j) ties += j != i && row[j] == row[i];
      mrr += 1.0 / static_cast<double>(r);
      hits += r <= 3;
    }
    require(o, mean_reciprocal_rank(ranks) == mrr / 20.0, "MRR differs on matrix " + std::to_string(t));
    require(o, recall_at_k(ranks, 3) == static_cast<double>(hits) / 20.0,
            "Recall@3 differs on matrix " + std::to_string(t));
  }
  require(o, ties > 0, "no tie cases exercised");
  if (o.pass) o.detail = "200/200 matrices exact, " + std::to_string(ties) + " tied entries";
  return o;
}

Outcome normalization_invariance() {
  Outcome o;
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> u(-50.0, 50.0), pos(0.01, 100.0);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x(2 + rng() % 12);
    for (auto& v : x) v = u(rng);
    const double a = pos(rng), b = u(rng);
    std::vector<double> y = x;
    for (auto& v : y) v = a * v + b;
    for (bool inv : {false, true}) {
      const auto nx = min_max_normalize(x, inv);
      const auto ny = min_max_normalize(y, inv);
      for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(nx[i] - ny[i]));
    }
  }
  require(o, worst <= 1e-12, "affine error " + sci(worst));
  for (bool inv : {false, true}) {
    for (double v : min_max_normalize(std::vector<double>{3.5, 3.5, 3.5, 3.5}, inv)) {
      require(o, v == 0.5, "degenerate column not 0.5");
    }
  }
  // Rescale each raw column in turn.
  for (int t = 0; t < 200; ++t) {
    std::vector<RawMetricRow> rows;
    for (int m = 0; m < 4; ++m)
      for (auto pt : {PromptType::kBase, PromptType::kMetadata})
        rows.push_back(random_row(rng, "m" + std::to_string(m), pt));
    const auto before = order_of(rank_models(rows, paper_default_profile()));
    const double a = pos(rng), b = pos(rng);
    for (int col = 0; col < 6; ++col) {
      auto scaled = rows;
      for (auto& r : scaled) {
        switch (col) {
          case 0: r.avg_clip_prompt = a * r.avg_clip_prompt + b; break;
          case 1: r.avg_clip_cos = a * r.avg_clip_cos + b; break;
          case 2: r.avg_lpips = a * *r.avg_lpips + b; break;
          case 3: r.fid = a * r.fid + b; break;
          // MRR and recall must stay in range; scale down instead of shifting up.
          case 4: r.mrr = 0.5 * r.mrr + 0.01; break;
          case 5: r.recall_at_k = 0.9 * r.recall_at_k; break;
        }
      }
      require(o, order_of(rank_models(scaled, paper_default_profile())) == before,
              "order changed after rescaling column " + std::to_string(col));
    }
  }
  if (o.pass) o.detail = "max affine error " + sci(worst) + " <= 1e-12; degenerate -> 0.5; order stable";
  return o;
}

Outcome weighted_example() {
  Outcome o;
  NormalizedMetrics n;
  n.n_clip = 0.8;
  n.n_lpips = 0.6;
  n.n_fid = 0.5;
  n.n_ret = 0.4;
  n.n_clip_prompt = 1.0;
  const double s = weighted_score(n, paper_default_profile()).value;
  const double err = std::abs(s - 0.665);
  require(o, err <= 1e-12, "score " + std::to_string(s));
  if (o.pass) o.detail = "score " + fixed6(s) + ", |error| " + sci(err) + " <= 1e-12";
  return o;
}

Outcome end_to_end() {
  Outcome o;
  TempDir dir;
  std::vector<std::string> csvs;
  for (int run = 0; run < 2; ++run) {
    const std::string ds = (dir / ("ds" + std::to_string(run))).string();
    const std::string out = (dir / ("out" + std::to_string(run))).string();
    require(o, cli({"synth", "--seed", "7", "--out", ds}) == 0, "synth failed");
    require(o, cli({"evaluate", "--dataset", ds, "--out", out}) == 0, "evaluate failed");
    std::string ranked;
    require(o, cli({"rank", "--results", out + "/evaluation_results.csv"}, &ranked) == 0, "rank failed");
    csvs.push_back(read_file_bytes(out + "/evaluation_results.csv"));
    csvs.push_back(ranked);
  }
  if (!o.pass) return o;
  require(o, csvs[0] == csvs[2], "evaluation_results.csv differs between runs");
  require(o, csvs[1] == csvs[3], "rank output differs between runs");
  const auto table = csv::parse_table(csvs[0], "evaluation_results.csv");
  require(o, !table.rows.empty() && table.rows[0][0] == "model_0", "planted model not first");

  std::string deltas;
  require(o, cli({"compare", "--results", (dir / "out0" / "evaluation_results.csv").string()}, &deltas) == 0,
          "compare failed");
  const auto d = csv::parse_table(deltas, "compare");
  const auto c_delta = d.require_column("delta", "compare");
  for (const auto& row : d.rows) require(o, std::stod(row[c_delta]) > 0.0, "non-positive delta for " + row[0]);
  if (o.pass) {
    o.detail = "byte-identical reruns, first = " + table.rows[0][0] + "/" + table.rows[0][1] + ", " +
               std::to_string(d.rows.size()) + " positive deltas";
  }
  return o;
}

Outcome planted_fixture() {
  Outcome o;
  const auto rows = read_results_csv(T2IBENCH_TEST_DATA "/planted_rows.csv");
  const std::string got = results_csv(rank_models(rows, paper_default_profile()));
  require(o, got == read_file_bytes(T2IBENCH_TEST_DATA "/planted_results_golden.csv"),
          "leaderboard differs from the spreadsheet oracle");

  std::mt19937_64 rng(108);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  for (int t = 0; t < 1000; ++t) {
    std::vector<RawMetricRow> set{random_row(rng, "worse", PromptType::kBase), random_row(rng, "x", PromptType::kBase),
                                  random_row(rng, "y", PromptType::kMetadata)};
    RawMetricRow better = set[0];
    better.model = "better";
    better.avg_clip_prompt += u(rng);
    better.avg_clip_cos += u(rng);
    *better.avg_lpips -= u(rng);
    better.fid -= u(rng);
    better.mrr = std::min(1.0, better.mrr + u(rng));
    better.recall_at_k = std::min(1.0, better.recall_at_k + u(rng));
    set.push_back(better);
    const auto order = order_of(rank_models(set, paper_default_profile()));
    const auto pb = std::find(order.begin(), order.end(), "better/base");
    const auto pw = std::find(order.begin(), order.end(), "worse/base");
    require(o, pb < pw, "Pareto violation in trial " + std::to_string(t));
  }
  if (o.pass) o.detail = "golden CSV identical at 6 decimals; 1000/1000 Pareto pairs ordered";
  return o;
}

Outcome promptgen_golden() {
  Outcome o;
  TempDir dir;
  const std::string ann = T2IBENCH_TEST_DATA "/promptgen_annotations.csv";
  const std::string cap = T2IBENCH_TEST_DATA "/promptgen_captions.csv";
  generate_prompt_csv(ann, cap, dir / "p1.csv");
  generate_prompt_csv(ann, cap, dir / "p2.csv");
  const std::string p1 = read_file_bytes(dir / "p1.csv");
  require(o, p1 == read_file_bytes(T2IBENCH_TEST_DATA "/promptgen_golden.csv"), "prompts.csv differs from golden");
  require(o, p1 == read_file_bytes(dir / "p2.csv"), "re-run differs");
  const auto table = csv::parse_table(p1, "prompts.csv");
  for (const auto& row : table.rows) {
    require(o, row[2].rfind(row[1], 0) == 0, "base is not a prefix for " + row[0]);
    const auto first = row[2].find(kMetadataMarker);
    require(o, first == std::string::npos || row[2].find(kMetadataMarker, first + 1) == std::string::npos,
            "marker repeated for " + row[0]);
  }

  // Feed the generated metadata prompts back as captions: nothing changes.
  std::ostringstream caps;
  csv::write_row(caps, {"image_key", "caption", "gt_image"});
  for (const auto& row : table.rows) csv::write_row(caps, {row[0], row[2], row[3]});
  write_file_bytes(dir / "caps2.csv", caps.str());
  generate_prompt_csv(ann, dir / "caps2.csv", dir / "p3.csv");
  for (const auto& row : csv::read_table((dir / "p3.csv").string()).rows) {
    const auto it = std::find_if(table.rows.begin(), table.rows.end(), [&](const auto& r) { return r[0] == row[0]; });
    require(o, it != table.rows.end() && row[2] == (*it)[2], "metadata prompt re-augmented for " + row[0]);
  }
  if (o.pass) o.detail = std::to_string(table.rows.size()) + " rows byte-identical to golden; prefix and idempotence hold";
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "Frechet equals diagonal closed form (100 cases, dim <= 8, tol 1e-8)", 1.0, frechet_closed_form},
      {2, "matrix_sqrt_psd residual (50 SPD matrices up to dim 64, tol 1e-8)", 5.0, sqrt_residual},
      {3, "FID(X,X) <= 1e-6 on 64x16 and symmetry within 1e-8", 0.0, fid_identity_symmetry},
      {4, "MRR and Recall@3 exact vs sort oracle (200 20x20 matrices, ties)", 0.0, retrieval_oracle},
      {5, "normalization affine invariance (1e-12), degenerate 0.5, order invariance", 0.0, normalization_invariance},
      {6, "weighted_score((0.8,0.6,0.5,0.4,1.0), paper-default) = 0.665 (tol 1e-12)", 0.0, weighted_example},
      {7, "synth -> evaluate -> rank determinism, planted best first, positive deltas", 10.0, end_to_end},
      {8, "planted 6-row fixture matches spreadsheet oracle; Pareto over 1000 pairs", 0.0, planted_fixture},
      {9, "promptgen golden prompts.csv, base prefix, idempotence", 0.0, promptgen_golden},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail += " (runtime " + std::to_string(secs) + " s exceeds " + std::to_string(c.time_limit_s) + " s)";
    }
    failed += !o.pass;
    std::printf("%s [%d] %s: %s (%.3f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.title.c_str(), o.detail.c_str(), secs);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
