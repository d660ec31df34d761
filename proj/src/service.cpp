#include "t2ibench/service.hpp"

#include <algorithm>
#include <cstdlib>

#include <httplib.h>

#include "t2ibench/dataset.hpp"
#include "t2ibench/error.hpp"
#include "t2ibench/format.hpp"
#include "t2ibench/report.hpp"

namespace t2ibench {

using nlohmann::json;
using nlohmann::ordered_json;

std::shared_ptr<const Snapshot> load_snapshot(const SnapshotSource& source) {
  auto snap = std::make_shared<Snapshot>();
  snap->registry = ProfileRegistry::with_user_dir(source.profile_dir);
  if (!source.results_csv.empty()) {
    snap->rows = read_results_csv(source.results_csv);
    snap->summary["source"] = "results";
    snap->summary["path"] = source.results_csv.string();
  } else if (!source.dataset.empty()) {
    const auto ds = load_dataset(source.dataset);
    const auto report = validate_dataset(ds);
    if (!report.ok) {
      throw Error(ErrorKind::kDomain, "dataset " + source.dataset.string() + " failed validation (" +
                                          std::to_string(report.count(Severity::kError)) + " errors)");
    }
    snap->rows = evaluate_dataset(ds, source.metric_options);
    snap->summary["source"] = "dataset";
    snap->summary["path"] = source.dataset.string();
    snap->summary["prompts"] = ds.prompts.size();
    snap->summary["dims"] = ordered_json{{"clip", ds.dims.clip}, {"inception", ds.dims.inception}};
    snap->summary["lpips_source"] = std::string(to_string(ds.lpips_source));
  } else {
    throw Error(ErrorKind::kValidation, "snapshot source needs a results CSV or a dataset directory");
  }
  std::vector<std::string> models;
  std::vector<std::string> types;
  for (const auto& r : snap->rows) {
    if (std::find(models.begin(), models.end(), r.model) == models.end()) models.push_back(r.model);
    const std::string t(to_string(r.prompt_type));
    if (std::find(types.begin(), types.end(), t) == types.end()) types.push_back(t);
  }
  std::sort(models.begin(), models.end());
  std::sort(types.begin(), types.end());
  snap->summary["models"] = models;
  snap->summary["prompt_types"] = types;
  snap->summary["rows"] = snap->rows.size();
  return snap;
}

namespace {

HttpResponse json_response(int status, const ordered_json& body) {
  return HttpResponse{status, body.dump(), "application/json"};
}

HttpResponse error_response(int status, const std::string& message) {
  return json_response(status, ordered_json{{"error", message}, {"status", status}});
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kValidation: return 422;
    case ErrorKind::kNotFound: return 404;
    default: return 500;
  }
}

json parse_body(std::string_view body) {
  if (body.empty()) return json::object();
  try {
    json j = json::parse(body);
    if (!j.is_object()) throw Error(ErrorKind::kValidation, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("invalid JSON body: ") + e.what());
  }
}

// Resolves the weight profile of a request body; unknown profiles are request
// errors here rather than missing resources.
WeightProfile body_profile(const json& body, const ProfileRegistry& registry) {
  const bool renormalize = body.value("renormalize", false);
  WeightProfile p;
  if (body.contains("weights")) {
    const json& w = body.at("weights");
    try {
      if (w.is_array()) {
        if (w.size() != 5) throw Error(ErrorKind::kValidation, "weights array must have 5 entries");
        p = WeightProfile{"custom", w[0], w[1], w[2], w[3], w[4], CohortScope::kAllRows};
      } else if (w.is_object()) {
        p = WeightProfile{"custom", w.at("clip"), w.at("lpips"), w.at("fid"), w.at("ret"), w.at("clip_prompt"),
                          CohortScope::kAllRows};
      } else {
        throw Error(ErrorKind::kValidation, "weights must be an array or an object");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kValidation, std::string("invalid weights: ") + e.what());
    }
    if (body.contains("profile") && body.at("profile").is_string()) {
      p.name = body.at("profile").get<std::string>();
    }
  } else if (body.contains("profile")) {
    if (!body.at("profile").is_string()) throw Error(ErrorKind::kValidation, "profile must be a string");
    try {
      p = registry.find(body.at("profile").get<std::string>());
    } catch (const Error& e) {
      throw Error(ErrorKind::kValidation, e.what());
    }
  } else {
    p = registry.find("paper-default");
  }
  if (body.contains("cohort_scope")) {
    if (!body.at("cohort_scope").is_string()) {
      throw Error(ErrorKind::kValidation, "cohort_scope must be a string");
    }
    p.cohort_scope = parse_cohort_scope(body.at("cohort_scope").get<std::string>());
  }
  if (renormalize) p = p.renormalized();
  p.validate();
  return p;
}

std::vector<RawMetricRow> filter_rows(const std::vector<RawMetricRow>& rows, const json& body) {
  const std::string filter = body.contains("prompt_type") && body.at("prompt_type").is_string()
                                 ? body.at("prompt_type").get<std::string>()
                                 : std::string("both");
  if (filter == "both") return rows;
  const PromptType pt = parse_prompt_type(filter);
  std::vector<RawMetricRow> out;
  std::copy_if(rows.begin(), rows.end(), std::back_inserter(out),
               [pt](const RawMetricRow& r) { return r.prompt_type == pt; });
  if (out.empty()) throw Error(ErrorKind::kValidation, "no rows with prompt_type '" + filter + "'");
  return out;
}

}  // namespace

Service::Service(SnapshotSource source) : source_(std::move(source)), snapshot_(load_snapshot(source_)) {}

std::shared_ptr<const Snapshot> Service::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return snapshot_;
}

void Service::reload() {
  auto fresh = load_snapshot(source_);
  std::lock_guard<std::mutex> lock(mu_);
  snapshot_ = std::move(fresh);
}

HttpResponse Service::rank(const Snapshot& snap, std::string_view body_text) const {
  const json body = parse_body(body_text);
  const WeightProfile profile = body_profile(body, snap.registry);
  const auto rows = filter_rows(snap.rows, body);
  return json_response(200, to_json(rank_models(rows, profile)));
}

HttpResponse Service::recommend(const Snapshot& snap, std::string_view body_text) const {
  const json body = parse_body(body_text);
  std::string name = "paper-default";
  if (body.contains("profile")) {
    if (!body.at("profile").is_string()) throw Error(ErrorKind::kValidation, "profile must be a string");
    name = body.at("profile").get<std::string>();
  }
  Recommendation rec;
  try {
    rec = t2ibench::recommend(filter_rows(snap.rows, body), name, snap.registry);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kNotFound) throw Error(ErrorKind::kValidation, e.what());
    throw;
  }
  return json_response(200, ordered_json{{"profile", name},
                                         {"model", rec.model},
                                         {"prompt_type", std::string(to_string(rec.prompt_type))},
                                         {"weighted_score", round6(rec.weighted_score)},
                                         {"partial", rec.partial},
                                         {"rationale", rec.rationale}});
}

HttpResponse Service::chart(const Snapshot& snap, std::string_view kind_name, const QueryParams& query) const {
  const ChartKind kind = parse_chart_kind(kind_name);
  ChartOptions opts;
  if (auto it = query.find("top"); it != query.end()) {
    char* end = nullptr;
    const long top = std::strtol(it->second.c_str(), &end, 10);
    if (it->second.empty() || *end != '\0' || top < 1) {
      throw Error(ErrorKind::kValidation, "top must be a positive integer");
    }
    opts.top_n = static_cast<std::size_t>(top);
  }
  if (auto it = query.find("metric"); it != query.end()) opts.metric = it->second;
  std::string profile = "paper-default";
  if (auto it = query.find("profile"); it != query.end()) profile = it->second;
  const Leaderboard board = rank_models(snap.rows, snap.registry.find(profile));
  return json_response(200, to_json(chart_data(kind, board, opts), true));
}

HttpResponse Service::handle(std::string_view method, std::string_view path, const QueryParams& query,
                             std::string_view body) {
  const auto snap = snapshot();
  const bool get = method == "GET";
  const bool post = method == "POST";
  try {
    if (path == "/healthz") {
      if (!get) return error_response(405, "method not allowed");
      return json_response(200, ordered_json{{"status", "ok"}, {"rows", snap->rows.size()}});
    }
    if (path == "/api/models") {
      if (!get) return error_response(405, "method not allowed");
      return json_response(200, ordered_json{{"models", snap->summary.at("models")},
                                             {"prompt_types", snap->summary.at("prompt_types")},
                                             {"summary", snap->summary}});
    }
    if (path == "/api/results") {
      if (!get) return error_response(405, "method not allowed");
      ordered_json rows = ordered_json::array();
      for (const auto& r : snap->rows) rows.push_back(to_json(r));
      return json_response(200, ordered_json{{"rows", rows}});
    }
    if (path == "/api/profiles") {
      if (!get) return error_response(405, "method not allowed");
      return json_response(200, snap->registry.to_json());
    }
    if (path == "/api/rank") {
      if (!post) return error_response(405, "method not allowed");
      return rank(*snap, body);
    }
    if (path == "/api/recommend") {
      if (!post) return error_response(405, "method not allowed");
      return recommend(*snap, body);
    }
    if (path == "/api/reload") {
      if (!post) return error_response(405, "method not allowed");
      // Reload failures keep the current snapshot.
      reload();
      return json_response(200, ordered_json{{"status", "reloaded"}, {"rows", snapshot()->rows.size()}});
    }
    constexpr std::string_view kCharts = "/api/charts/";
    if (path.substr(0, kCharts.size()) == kCharts) {
      if (!get) return error_response(405, "method not allowed");
      return chart(*snap, path.substr(kCharts.size()), query);
    }
    return error_response(404, "no route for " + std::string(path));
  } catch (const Error& e) {
    return error_response(status_for(e.kind()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    QueryParams query;
    for (const auto& [k, v] : req.params) query[k] = v;
    const HttpResponse out = service_.handle(req.method, req.path, query, req.body);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server_->Get(".*", dispatch);
  server_->Post(".*", dispatch);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    throw Error(ErrorKind::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace t2ibench
