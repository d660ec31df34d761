#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "t2ibench/cohort_metrics.hpp"
#include "t2ibench/dataset.hpp"
#include "t2ibench/error.hpp"
#include "t2ibench/metrics.hpp"
#include "t2ibench/promptgen.hpp"
#include "t2ibench/report.hpp"
#include "t2ibench/retrieval.hpp"
#include "t2ibench/scoring.hpp"
#include "t2ibench/synth.hpp"

namespace py = pybind11;
using namespace t2ibench;

namespace {

using FloatRows = py::array_t<float, py::array::c_style | py::array::forcecast>;

EmbeddingBlock to_block(const FloatRows& a) {
  if (a.ndim() != 2) throw Error(ErrorKind::kDomain, "expected a 2-D array of shape (rows, dim)");
  const auto rows = static_cast<std::uint32_t>(a.shape(0));
  const auto dim = static_cast<std::uint32_t>(a.shape(1));
  return EmbeddingBlock(rows, dim, std::vector<float>(a.data(), a.data() + a.size()));
}

WeightProfile pick_profile(const std::optional<std::string>& profile, const std::optional<std::vector<double>>& weights,
                           const std::optional<std::filesystem::path>& profile_dir) {
  if (profile && weights) throw Error(ErrorKind::kValidation, "give either profile or weights, not both");
  if (weights) {
    if (weights->size() != 5) throw Error(ErrorKind::kValidation, "weights must have 5 entries");
    WeightProfile p{"custom", (*weights)[0], (*weights)[1], (*weights)[2], (*weights)[3], (*weights)[4]};
    p.validate();
    return p;
  }
  const auto reg = profile_dir ? ProfileRegistry::with_user_dir(*profile_dir) : ProfileRegistry::builtin();
  return reg.find(profile.value_or("paper-default"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the t2ibench text-to-image benchmark engine.";

  static py::exception<Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::enum_<PromptType>(m, "PromptType")
      .value("base", PromptType::kBase)
      .value("metadata", PromptType::kMetadata);

  m.def(
      "cosine_similarity",
      [](std::vector<double> a, std::vector<double> b) { return cosine_similarity(std::span(a), std::span(b)); },
      py::arg("a"), py::arg("b"));
  m.def(
      "clip_prompt_score",
      [](std::vector<float> text, std::vector<float> image) { return clip_prompt_score(text, image); },
      py::arg("text_emb"), py::arg("img_emb"));

  py::class_<GaussianStats>(m, "GaussianStats")
      .def(py::init(&make_gaussian_stats), py::arg("mean"), py::arg("cov"), py::arg("n"))
      .def_readonly("mean", &GaussianStats::mean)
      .def_readonly("cov", &GaussianStats::cov)
      .def_readonly("n", &GaussianStats::n)
      .def_property_readonly("rank_deficient", &GaussianStats::rank_deficient);
  m.def(
      "gaussian_stats", [](const FloatRows& x) { return gaussian_stats(to_block(x)); }, py::arg("features"),
      "Sample mean and unbiased covariance of a (rows, dim) array.");
  m.def("matrix_sqrt_psd", &matrix_sqrt_psd, py::arg("a"), py::arg("neg_tolerance") = kPsdNegTolerance);
  m.def("frechet_distance", &frechet_distance, py::arg("s1"), py::arg("s2"));
  m.def(
      "fid",
      [](const FloatRows& gen, const FloatRows& gt) {
        return frechet_distance(gaussian_stats(to_block(gen)), gaussian_stats(to_block(gt)));
      },
      py::arg("gen_features"), py::arg("gt_features"));

  m.def(
      "similarity_matrix",
      [](const FloatRows& gen, const FloatRows& gt) {
        const auto s = similarity_matrix(to_block(gen), to_block(gt));
        py::array_t<double> out({s.n_gen(), s.n_gt()});
        std::copy(s.values().begin(), s.values().end(), out.mutable_data());
        return out;
      },
      py::arg("gen"), py::arg("gt"));
  m.def(
      "rank_of_truth", [](std::vector<double> row, std::size_t i) { return rank_of_truth(row, i); }, py::arg("row"),
      py::arg("true_index"));
  m.def(
      "mean_reciprocal_rank", [](std::vector<std::size_t> ranks) { return mean_reciprocal_rank(ranks); },
      py::arg("ranks"));
  m.def(
      "recall_at_k", [](std::vector<std::size_t> ranks, std::size_t k) { return recall_at_k(ranks, k); },
      py::arg("ranks"), py::arg("k") = kDefaultRecallK);

  m.def(
      "min_max_normalize",
      [](std::vector<std::optional<double>> values, bool invert) { return min_max_normalize(values, invert); },
      py::arg("values"), py::arg("invert") = false);
  m.def(
      "weighted_score",
      [](std::vector<std::optional<double>> n, std::optional<std::string> profile,
         std::optional<std::vector<double>> weights) {
        if (n.size() != 5) throw Error(ErrorKind::kValidation, "expected 5 normalized components");
        NormalizedMetrics nm{n[0], n[1], n[2], n[3], n[4], std::nullopt, std::nullopt};
        const auto s = weighted_score(nm, pick_profile(profile, weights, std::nullopt));
        return py::make_tuple(s.value, s.partial);
      },
      py::arg("normalized"), py::arg("profile") = py::none(), py::arg("weights") = py::none(),
      "(n_clip, n_lpips, n_fid, n_ret, n_clip_prompt) -> (score, partial).");

  m.def(
      "build_metadata_prompt",
      [](const std::string& base, const std::vector<std::pair<std::string, std::string>>& attrs) {
        AttributeSet set;
        for (const auto& [k, v] : attrs) set.set(k, v);
        return build_metadata_prompt(base, set);
      },
      py::arg("base"), py::arg("attributes"));
  m.def("generate_prompt_csv", &generate_prompt_csv, py::arg("annotations"), py::arg("captions"), py::arg("out"));

  m.def(
      "write_synthetic_dataset",
      [](const std::filesystem::path& root, std::uint64_t seed, std::size_t models, std::size_t prompts,
         std::uint32_t clip_dim, std::uint32_t inception_dim, const std::string& lpips) {
        SynthOptions o;
        o.seed = seed;
        o.models = models;
        o.prompts = prompts;
        o.clip_dim = clip_dim;
        o.inception_dim = inception_dim;
        o.lpips_source = parse_lpips_source(lpips);
        write_synthetic_dataset(root, o);
      },
      py::arg("root"), py::arg("seed") = 7, py::arg("models") = 3, py::arg("prompts") = 16, py::arg("clip_dim") = 32,
      py::arg("inception_dim") = 8, py::arg("lpips") = "scalar_csv");
  m.def(
      "validate_dataset",
      [](const std::filesystem::path& root) {
        const auto r = validate_dataset(load_dataset(root));
        py::list issues;
        for (const auto& i : r.issues) {
          issues.append(py::make_tuple(std::string(to_string(i.severity)), i.location, i.message));
        }
        return py::make_tuple(r.ok, issues);
      },
      py::arg("root"));

  // Row-level results travel as the same JSON the service emits.
  m.def(
      "evaluate_dataset_json",
      [](const std::filesystem::path& root, std::size_t k, unsigned workers) {
        CohortMetricOptions o;
        o.k = k;
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (const auto& r : evaluate_dataset(load_dataset(root), o, workers)) rows.push_back(to_json(r));
        return rows.dump();
      },
      py::arg("root"), py::arg("k") = kDefaultRecallK, py::arg("workers") = 1);
  m.def(
      "rank_results",
      [](const std::filesystem::path& results, std::optional<std::string> profile,
         std::optional<std::vector<double>> weights, std::optional<std::filesystem::path> profile_dir,
         std::optional<std::string> cohort_scope) {
        auto p = pick_profile(profile, weights, profile_dir);
        if (cohort_scope) p.cohort_scope = parse_cohort_scope(*cohort_scope);
        const auto board = rank_models(read_results_csv(results), p);
        return py::make_tuple(results_csv(board), to_json(board).dump());
      },
      py::arg("results"), py::arg("profile") = py::none(), py::arg("weights") = py::none(),
      py::arg("profile_dir") = py::none(), py::arg("cohort_scope") = py::none(),
      "Ranks an evaluation_results.csv; returns (csv_text, leaderboard_json).");
  m.def(
      "evaluate_to_csv",
      [](const std::filesystem::path& root, const std::filesystem::path& out, std::optional<std::string> profile,
         std::optional<std::vector<double>> weights, unsigned workers) {
        const auto board =
            rank_models(evaluate_dataset(load_dataset(root), {}, workers), pick_profile(profile, weights, std::nullopt));
        return write_results_csv(board, out);
      },
      py::arg("root"), py::arg("out"), py::arg("profile") = py::none(), py::arg("weights") = py::none(),
      py::arg("workers") = 1);
  m.def(
      "profiles_json",
      [](std::optional<std::filesystem::path> dir) {
        return (dir ? ProfileRegistry::with_user_dir(*dir) : ProfileRegistry::builtin()).to_json().dump();
      },
      py::arg("profile_dir") = py::none());
}
