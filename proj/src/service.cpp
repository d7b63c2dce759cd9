#include "attackmap/service.hpp"

#include <algorithm>
#include <charconv>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "attackmap/ingest.hpp"
#include "attackmap/report.hpp"

namespace attackmap {

using nlohmann::json;
using nlohmann::ordered_json;

struct Service::Snapshot {
  Model model;
  PipelineOptions defaults;
  std::map<ProfileId, ModelAnalysis> baseline;  // per profile, plus "*"
};

namespace {

constexpr std::string_view kPrefix = "/api/v1/";

class HttpError : public Error {
 public:
  HttpError(int status, std::string code, const std::string& message, std::string subject = {})
      : Error(std::move(code), message), status_(status), subject_(std::move(subject)) {}
  int status() const { return status_; }
  const std::string& subject() const { return subject_; }

 private:
  int status_;
  std::string subject_;
};

HttpResponse json_response(int status, const ordered_json& body) {
  return {status, body.dump(2) + "\n", {{"Content-Type", "application/json"}}};
}

HttpResponse error_response(int status, std::string_view code, std::string_view message, std::string_view subject) {
  ordered_json body = {{"error", {{"status", status}, {"code", code}, {"message", message}, {"subject", subject}}}};
  return json_response(status, body);
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  while (!path.empty()) {
    auto slash = path.find('/');
    auto part = path.substr(0, slash);
    if (!part.empty()) parts.emplace_back(part);
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  return parts;
}

std::size_t positive_param(const HttpRequest& request, const char* name, std::size_t fallback) {
  auto it = request.query.find(name);
  if (it == request.query.end() || it->second.empty()) return fallback;
  std::size_t value = 0;
  const auto& text = it->second;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0)
    throw HttpError(400, "E-BAD-ARG", std::string(name) + " must be a positive integer", text);
  return value;
}

std::string profile_param(const HttpRequest& request) {
  auto it = request.query.find("profile");
  return it == request.query.end() || it->second.empty() ? std::string(kCombinedProfile) : it->second;
}

void require_profile(const Model& model, const std::string& profile) {
  if (profile != kCombinedProfile && !model.find_profile(profile))
    throw NotFoundError("E-UNKNOWN-ID", profile, "unknown profile '" + profile + "'");
}

void require_mapped_hazard(const Model& model, const std::string& hazard) {
  if (!model.find_hazard(hazard))
    throw NotFoundError("E-UNKNOWN-ID", hazard, "unknown hazard '" + hazard + "'");
  if (!model.find_mapping(hazard))
    throw NotFoundError("E-NO-MAPPING", hazard, "hazard '" + hazard + "' has no critical-asset mapping");
}

ModelAnalysis analysis_for(const Service::Snapshot& snap, const std::string& profile, std::size_t max_depth) {
  require_profile(snap.model, profile);
  if (max_depth == snap.defaults.max_depth) return snap.baseline.at(profile);
  PipelineOptions options = snap.defaults;
  options.max_depth = max_depth;
  return analyze_model(snap.model, profile, options);
}

ordered_json hazards_json(const Model& model) {
  ordered_json out = ordered_json::array();
  std::vector<const Hazard*> hazards;
  for (const auto& hazard : model.hazards) hazards.push_back(&hazard);
  std::sort(hazards.begin(), hazards.end(), [](auto* l, auto* r) { return natural_less(l->id, r->id); });
  for (const auto* hazard : hazards) {
    const auto resolved = resolve_losses(model, hazard->id);
    ordered_json entry = {{"id", hazard->id},
                          {"description", hazard->description},
                          {"associated", hazard->associated},
                          {"resolved_losses", std::vector<LossId>(resolved.begin(), resolved.end())},
                          {"weight", hazard_weight(model, hazard->id)}};
    auto parent = hazard_parent(hazard->id);
    entry["parent"] = parent ? ordered_json(*parent) : ordered_json(nullptr);
    const auto* mapping = model.find_mapping(hazard->id);
    entry["targets"] = mapping ? mapping->targets : std::vector<AssetId>{};
    out.push_back(std::move(entry));
  }
  return out;
}

ordered_json model_json(const Model& model) {
  return {{"metadata", {{"name", model.metadata.name}, {"version", model.metadata.version}}},
          {"counts",
           {{"losses", model.losses.size()},
            {"hazards", model.hazards.size()},
            {"assets", model.assets.size()},
            {"links", model.links.size()},
            {"protections", model.protections.size()},
            {"profiles", model.profiles.size()},
            {"mappings", model.mappings.size()}}},
          {"profiles", [&] {
             ordered_json profiles = ordered_json::array();
             for (const auto& p : model.profiles)
               profiles.push_back({{"id", p.id}, {"name", p.name}, {"tier", p.tier}, {"entry_assets", p.entry_assets}});
             return profiles;
           }()},
          {"protections", [&] {
             ordered_json protections = ordered_json::array();
             for (const auto& p : model.protections)
               protections.push_back({{"id", p.id}, {"name", p.name}, {"description", p.description}});
             return protections;
           }()}};
}

ordered_json assets_json(const Model& model) {
  ordered_json out = ordered_json::array();
  auto assets = model.assets;
  std::sort(assets.begin(), assets.end(), [](const Asset& l, const Asset& r) { return l.id < r.id; });
  for (const auto& asset : assets) {
    ordered_json attributes = ordered_json::object();
    for (const auto& [k, v] : asset.attributes) attributes[k] = v;
    out.push_back({{"id", asset.id},
                   {"name", asset.name},
                   {"layer", to_string(asset.layer)},
                   {"attributes", std::move(attributes)},
                   {"tags", asset.tags}});
  }
  return out;
}

ordered_json losses_json(const Model& model) {
  ordered_json out = ordered_json::array();
  auto losses = model.losses;
  std::sort(losses.begin(), losses.end(), [](const Loss& l, const Loss& r) { return natural_less(l.id, r.id); });
  for (const auto& loss : losses)
    out.push_back({{"id", loss.id}, {"description", loss.description}, {"weight", loss_weight(model, loss.id)}});
  return out;
}

HttpResponse whatif(const Service::Snapshot& snap, const HttpRequest& request) {
  json body;
  try {
    body = json::parse(request.body);
  } catch (const json::parse_error& e) {
    throw HttpError(400, "E-SYNTAX", std::string("malformed JSON body: ") + e.what());
  }
  if (!body.is_object()) throw HttpError(400, "E-SCHEMA", "what-if body must be a JSON object");
  for (const auto& [key, value] : body.items())
    if (key != "hazard" && key != "profile" && key != "scenario" && key != "max_depth" && key != "thin_threshold")
      throw HttpError(400, "E-SCHEMA", "unknown what-if field '" + key + "'", key);

  auto hazard_it = body.find("hazard");
  if (hazard_it == body.end() || !hazard_it->is_string())
    throw HttpError(400, "E-SCHEMA", "what-if body needs a string 'hazard'");
  const std::string hazard = hazard_it->get<std::string>();

  std::string profile(kCombinedProfile);
  if (auto it = body.find("profile"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) throw HttpError(400, "E-SCHEMA", "'profile' must be a string");
    profile = it->get<std::string>();
  }

  PipelineOptions options = snap.defaults;
  auto read_positive = [&](const char* key, std::size_t& slot) {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) return;
    if (!it->is_number_unsigned() || it->get<std::size_t>() == 0)
      throw HttpError(400, "E-BAD-ARG", std::string(key) + " must be a positive integer");
    slot = it->get<std::size_t>();
  };
  read_positive("max_depth", options.max_depth);
  read_positive("thin_threshold", options.thin_threshold);

  Scenario scenario;
  if (auto it = body.find("scenario"); it != body.end() && !it->is_null()) {
    try {
      scenario = parse_scenario(it->dump());
    } catch (const ModelError& e) {
      throw HttpError(400, e.code(), e.what());
    }
  }

  require_profile(snap.model, profile);
  require_mapped_hazard(snap.model, hazard);
  return json_response(200, delta_json(what_if(snap.model, hazard, profile, scenario, options)));
}

HttpResponse route(const Service::Snapshot& snap, const HttpRequest& request) {
  if (!request.path.starts_with(kPrefix) && request.path + "/" != kPrefix)
    throw HttpError(404, "E-NOT-FOUND", "no such endpoint", request.path);
  const auto parts = split_path(std::string_view(request.path).substr(std::min(request.path.size(), kPrefix.size())));
  const std::string& method = request.method;

  auto expect = [&](std::string_view allowed) {
    if (method != allowed)
      throw HttpError(405, "E-METHOD", "method " + method + " not allowed; use " + std::string(allowed),
                      request.path);
  };

  const std::size_t max_depth = positive_param(request, "max_depth", snap.defaults.max_depth);

  if (parts.size() == 1 && parts[0] == "model") {
    expect("GET");
    return json_response(200, model_json(snap.model));
  }
  if (parts.size() == 1 && parts[0] == "assets") {
    expect("GET");
    return json_response(200, assets_json(snap.model));
  }
  if (parts.size() == 1 && parts[0] == "losses") {
    expect("GET");
    return json_response(200, losses_json(snap.model));
  }
  if (parts.size() == 1 && parts[0] == "hazards") {
    expect("GET");
    return json_response(200, hazards_json(snap.model));
  }
  if (parts.size() == 3 && parts[0] == "hazards" && (parts[2] == "chains" || parts[2] == "coverage")) {
    expect("GET");
    const std::string& hazard = parts[1];
    const std::string profile = profile_param(request);
    require_profile(snap.model, profile);
    require_mapped_hazard(snap.model, hazard);
    const auto analysis = analysis_for(snap, profile, max_depth);
    const auto& chains = analysis.chains.at(hazard);
    if (parts[2] == "chains") {
      return json_response(200, {{"hazard", hazard},
                                 {"profile", profile},
                                 {"max_depth", max_depth},
                                 {"count", chains.size()},
                                 {"chains", chains_json(chains, snap.defaults.thin_threshold)}});
    }
    const std::size_t thin = positive_param(request, "thin_threshold", snap.defaults.thin_threshold);
    return json_response(200, {{"hazard", hazard},
                               {"profile", profile},
                               {"thin_threshold", thin},
                               {"coverage", coverage_json(coverage(chains, thin))}});
  }
  if (parts.size() == 2 && parts[0] == "graph" && parts[1] == "merged") {
    expect("GET");
    const std::string profile = profile_param(request);
    const auto analysis = analysis_for(snap, profile, max_depth);
    const auto graph = analysis.merged_graph();
    std::map<HazardId, CoverageReport, NaturalLess> per_hazard;
    for (const auto& [hazard, list] : analysis.chains) per_hazard[hazard] = coverage(list, snap.defaults.thin_threshold);
    const auto classes = edge_classes(graph, per_hazard);
    auto body = graph_json(graph);
    for (auto& edge : body["edges"]) {
      auto cls = classes.find({edge["from"].get<std::string>(), edge["to"].get<std::string>(),
                               edge["link"].get<std::string>()});
      edge["class"] = cls == classes.end() ? ordered_json(nullptr) : ordered_json(to_string(cls->second));
    }
    body["profile"] = profile;
    return json_response(200, body);
  }
  if (parts.size() == 2 && parts[0] == "protections" && parts[1] == "ranking") {
    expect("GET");
    const std::string profile = profile_param(request);
    auto body = ranking_json(analysis_for(snap, profile, max_depth).ranking);
    body["profile"] = profile;
    return json_response(200, body);
  }
  if (parts.size() == 1 && parts[0] == "whatif") {
    expect("POST");
    return whatif(snap, request);
  }
  throw HttpError(404, "E-NOT-FOUND", "no such endpoint", request.path);
}

}  // namespace

Service::Service(Model model, ServiceConfig config) : config_(std::move(config)) { reload(std::move(model)); }

Service::~Service() = default;

void Service::reload(Model model) {
  auto snap = std::make_shared<Snapshot>();
  snap->defaults = config_.defaults;
  snap->baseline.emplace(std::string(kCombinedProfile), analyze_model(model, kCombinedProfile, config_.defaults));
  for (const auto& profile : model.profiles)
    snap->baseline.emplace(profile.id, analyze_model(model, profile.id, config_.defaults));
  snap->model = std::move(model);
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(snap);
}

std::shared_ptr<const Service::Snapshot> Service::snapshot() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

HttpResponse Service::handle(const HttpRequest& request) const {
  HttpResponse response;
  if (request.method == "OPTIONS") {
    response.status = 204;
    response.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
    response.headers["Access-Control-Allow-Headers"] = "Content-Type";
  } else {
    const auto snap = snapshot();
    try {
      response = route(*snap, request);
    } catch (const HttpError& e) {
      response = error_response(e.status(), e.code(), e.what(), e.subject());
      if (e.status() == 405) response.headers["Allow"] = request.path.ends_with("whatif") ? "POST" : "GET";
    } catch (const NotFoundError& e) {
      response = error_response(404, e.code(), e.what(), e.subject());
    } catch (const InvalidArgumentError& e) {
      response = error_response(400, e.code(), e.what(), "");
    } catch (const ModelError& e) {
      response = error_response(400, e.code(), e.what(), "");
    } catch (const std::exception& e) {
      response = error_response(500, "E-INTERNAL", e.what(), "");
    }
  }
  if (!config_.cors_origin.empty()) response.headers["Access-Control-Allow-Origin"] = config_.cors_origin;
  return response;
}

struct HttpServer::Impl {
  const Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(const Service& service) : impl_(new Impl{service, {}}) {
  auto bridge = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request;
    request.method = req.method;
    request.path = req.path;
    request.body = req.body;
    for (const auto& [key, value] : req.params) request.query.emplace(key, value);
    const auto response = impl_->service.handle(request);
    res.status = response.status;
    for (const auto& [key, value] : response.headers)
      if (key != "Content-Type") res.set_header(key, value);
    if (!response.body.empty()) res.set_content(response.body, "application/json");
  };
  auto& server = impl_->server;
  server.Get(".*", bridge);
  server.Post(".*", bridge);
  server.Put(".*", bridge);
  server.Delete(".*", bridge);
  server.Patch(".*", bridge);
  server.Options(".*", bridge);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

std::pair<std::string, int> parse_listen_address(std::string_view address) {
  auto colon = address.rfind(':');
  if (colon == std::string_view::npos)
    throw InvalidArgumentError("E-BAD-ARG", "listen address must be host:port");
  std::string host(address.substr(0, colon));
  auto port_text = address.substr(colon + 1);
  int port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port < 0 || port > 65535)
    throw InvalidArgumentError("E-BAD-ARG", "invalid port in listen address '" + std::string(address) + "'");
  if (host.empty()) host = "0.0.0.0";
  return {host, port};
}

}  // namespace attackmap
