#include <doctest.h>

#include <atomic>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "attackmap/service.hpp"
#include "fixtures.hpp"

using namespace attackmap;
using nlohmann::json;

namespace {

const Service& sphere_service() {
  static const Service service(fixtures::sphere());
  return service;
}

HttpResponse get(const Service& s, std::string path, std::map<std::string, std::string> query = {}) {
  return s.handle({"GET", std::move(path), std::move(query), ""});
}

HttpResponse post(const Service& s, std::string path, std::string body) {
  return s.handle({"POST", std::move(path), {}, std::move(body)});
}

json body_of(const HttpResponse& r) { return json::parse(r.body); }

std::vector<std::string> paths(const json& chains) {
  std::vector<std::string> out;
  for (const auto& c : chains) out.push_back(c["path"]);
  return out;
}

}  // namespace

TEST_CASE("model, assets and losses") {
  const auto& s = sphere_service();
  auto r = get(s, "/api/v1/model");
  CHECK(r.status == 200);
  CHECK(r.headers.at("Content-Type") == "application/json");
  CHECK(r.headers.at("Access-Control-Allow-Origin") == "*");
  auto b = body_of(r);
  CHECK(b["counts"]["hazards"] == 23);
  CHECK(b["counts"]["losses"] == 5);
  CHECK(b["profiles"].size() == 2);

  b = body_of(get(s, "/api/v1/assets"));
  CHECK(b.size() == 8);
  CHECK(b[0]["id"] == "bare-metal-nodes");

  b = body_of(get(s, "/api/v1/losses"));
  REQUIRE(b.size() == 5);
  CHECK(b[0]["id"] == "L1");
  CHECK(b[0]["weight"] == 100);
}

TEST_CASE("hazards carry resolved losses") {
  const auto b = body_of(get(sphere_service(), "/api/v1/hazards"));
  CHECK(b.size() == 23);
  bool found = false;
  for (const auto& h : b)
    if (h["id"] == "H1.3") {
      found = true;
      CHECK(h["resolved_losses"] == json::array({"L1", "L2", "L3", "L4", "L5"}));
      CHECK(h["parent"] == "H1");
      CHECK(h["targets"] == json::array({"ops"}));
    }
  CHECK(found);
  CHECK(b[0]["parent"].is_null());
}

TEST_CASE("hazard chains and coverage") {
  const auto& s = sphere_service();
  auto r = get(s, "/api/v1/hazards/H3/chains", {{"profile", "researcher"}});
  REQUIRE(r.status == 200);
  auto b = body_of(r);
  CHECK(b["count"] == 2);
  CHECK(paths(b["chains"]) == std::vector<std::string>{"nodes->infrapod-db", "nodes->infrapod-server->infrapod-db"});
  CHECK(b["chains"][0]["class"] == "thin");
  CHECK(b["chains"][1]["class"] == "defended");

  b = body_of(get(s, "/api/v1/hazards/H1.3/chains"));
  CHECK(b["profile"] == "*");
  CHECK(b["count"] == 5);

  b = body_of(get(s, "/api/v1/hazards/H3/chains", {{"profile", "researcher"}, {"max_depth", "1"}}));
  CHECK(b["count"] == 1);

  b = body_of(get(s, "/api/v1/hazards/H3/coverage", {{"profile", "researcher"}, {"thin_threshold", "4"}}));
  CHECK(b["coverage"]["summary"]["thin"] == 2);
  b = body_of(get(s, "/api/v1/hazards/H5/coverage", {{"profile", "researcher"}}));
  CHECK(b["coverage"]["summary"]["unpreventable"] == 1);
  CHECK(b["coverage"]["detection_required"].size() == 1);
}

TEST_CASE("merged graph and ranking") {
  const auto& s = sphere_service();
  auto b = body_of(get(s, "/api/v1/graph/merged", {{"profile", "researcher"}}));
  CHECK(b["hazard"] == "merged");
  CHECK(b["profile"] == "researcher");
  bool direct = false;
  for (const auto& e : b["edges"])
    if (e["from"] == "nodes" && e["to"] == "infrapod-db") {
      direct = true;
      CHECK(e["class"] == "thin");
      CHECK(e["protections"] == json::array({"db-auth"}));
    }
  CHECK(direct);

  b = body_of(get(s, "/api/v1/protections/ranking"));
  CHECK(b["entries"][0]["protection"] == "ops-ssh-linux");
  CHECK(b["greedy_cut"] == json::array({"ops-ssh-linux", "db-auth"}));
}

TEST_CASE("what-if requests") {
  const auto& s = sphere_service();
  auto r = post(s, "/api/v1/whatif",
                R"({"hazard": "H3", "profile": "researcher", "scenario": {"disabled_protections": ["db-auth"]}})");
  REQUIRE(r.status == 200);
  auto b = body_of(r);
  REQUIRE(b["class_changes"].size() == 1);
  CHECK(b["class_changes"][0]["path"] == "nodes->infrapod-db");
  CHECK(b["class_changes"][0]["from"] == "thin");
  CHECK(b["class_changes"][0]["to"] == "unprotected");
  CHECK(b["scenario_result"]["detection_required"].size() == 1);

  b = body_of(post(s, "/api/v1/whatif", R"({"hazard": "H3", "profile": "researcher"})"));
  CHECK(b["unchanged"] == true);

  b = body_of(post(s, "/api/v1/whatif",
                   R"({"hazard": "H1.3", "scenario": {"zero_day_links": [{"a": "nodes", "b": "ops"}]}})"));
  REQUIRE(b["new_chains"].size() == 1);
  CHECK(b["new_chains"][0]["path"] == "nodes->ops");

  // The baseline is untouched by earlier scenarios.
  b = body_of(get(s, "/api/v1/hazards/H3/chains", {{"profile", "researcher"}}));
  CHECK(b["chains"][0]["class"] == "thin");
}

TEST_CASE("error statuses") {
  const auto& s = sphere_service();
  auto check_error = [](const HttpResponse& r, int status, std::string_view code) {
    CHECK(r.status == status);
    const auto b = body_of(r);
    CHECK(b["error"]["status"] == status);
    CHECK(b["error"]["code"] == code);
  };
  auto r = get(s, "/api/v1/hazards/H99/chains", {{"profile", "researcher"}});
  check_error(r, 404, "E-UNKNOWN-ID");
  CHECK(body_of(r)["error"]["subject"] == "H99");
  check_error(get(s, "/api/v1/hazards/H6/chains"), 404, "E-NO-MAPPING");
  check_error(get(s, "/api/v1/hazards/H3/chains", {{"profile", "ghost"}}), 404, "E-UNKNOWN-ID");
  check_error(get(s, "/api/v1/nothing"), 404, "E-NOT-FOUND");
  check_error(get(s, "/elsewhere"), 404, "E-NOT-FOUND");
  check_error(get(s, "/api/v1/hazards/H3/chains", {{"max_depth", "0"}}), 400, "E-BAD-ARG");
  check_error(get(s, "/api/v1/hazards/H3/chains", {{"max_depth", "x"}}), 400, "E-BAD-ARG");

  check_error(post(s, "/api/v1/whatif", "{not json"), 400, "E-SYNTAX");
  check_error(post(s, "/api/v1/whatif", "[]"), 400, "E-SCHEMA");
  check_error(post(s, "/api/v1/whatif", R"({"profile": "researcher"})"), 400, "E-SCHEMA");
  check_error(post(s, "/api/v1/whatif", R"({"hazard": "H3", "scenario": {"compromized": []}})"), 400, "E-SCHEMA");
  check_error(post(s, "/api/v1/whatif", R"({"hazard": "H3", "max_depth": -1})"), 400, "E-BAD-ARG");
  check_error(post(s, "/api/v1/whatif", R"({"hazard": "H99"})"), 404, "E-UNKNOWN-ID");
  check_error(post(s, "/api/v1/whatif", R"({"hazard": "H3", "scenario": {"compromised": ["ghost"]}})"), 404,
              "E-UNKNOWN-ID");
  check_error(post(s, "/api/v1/whatif", R"({"hazard": "H3", "scenario": {"zero_day_links": [{"a": "ops", "b": "ops"}]}})"),
              400, "E-SELF-LINK");

  r = get(s, "/api/v1/whatif");
  check_error(r, 405, "E-METHOD");
  CHECK(r.headers.at("Allow") == "POST");
  r = post(s, "/api/v1/hazards", "{}");
  check_error(r, 405, "E-METHOD");
  CHECK(r.headers.at("Allow") == "GET");

  r = s.handle({"OPTIONS", "/api/v1/whatif", {}, ""});
  CHECK(r.status == 204);
  CHECK(r.headers.at("Access-Control-Allow-Origin") == "*");
}

TEST_CASE("configured CORS origin") {
  ServiceConfig config;
  config.cors_origin = "http://localhost:5173";
  Service s(fixtures::sphere_partial(), config);
  CHECK(get(s, "/api/v1/model").headers.at("Access-Control-Allow-Origin") == "http://localhost:5173");
  config.cors_origin.clear();
  Service closed(fixtures::sphere_partial(), config);
  CHECK(get(closed, "/api/v1/model").headers.count("Access-Control-Allow-Origin") == 0);
}

TEST_CASE("identical requests give identical bodies") {
  const auto& s = sphere_service();
  const HttpRequest a{"GET", "/api/v1/hazards/H1.3/chains", {{"profile", "researcher"}}, ""};
  const HttpRequest w{"POST", "/api/v1/whatif", {}, R"({"hazard": "H3", "scenario": {"compromised": ["infrapod-server"]}})"};
  const auto first = s.handle(a).body;
  const auto wfirst = s.handle(w).body;
  s.handle({"POST", "/api/v1/whatif", {}, R"({"hazard": "H1.3", "scenario": {"disabled_protections": ["ops-ssh-linux"]}})"});
  CHECK(s.handle(a).body == first);
  CHECK(s.handle(w).body == wfirst);
}

TEST_CASE("reload swaps the snapshot") {
  Service s(fixtures::sphere_partial());
  CHECK(body_of(get(s, "/api/v1/model"))["counts"]["assets"] == 3);
  s.reload(fixtures::sphere());
  CHECK(body_of(get(s, "/api/v1/model"))["counts"]["assets"] == 8);
}

TEST_CASE("concurrent what-if requests over HTTP") {
  Service service(fixtures::sphere());
  HttpServer server(service);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread loop([&] { server.listen_after_bind(); });

  const std::vector<std::string> bodies = {
      R"({"hazard": "H3", "profile": "researcher", "scenario": {"disabled_protections": ["db-auth"]}})",
      R"({"hazard": "H3", "profile": "researcher", "scenario": {"compromised": ["infrapod-server"]}})",
      R"({"hazard": "H1.3", "scenario": {"zero_day_links": [{"a": "nodes", "b": "ops"}]}})",
      R"({"hazard": "H1.3", "scenario": {"disabled_protections": ["ops-ssh-linux"]}})",
  };
  std::vector<std::string> expected;
  for (const auto& b : bodies) expected.push_back(service.handle({"POST", "/api/v1/whatif", {}, b}).body);
  const std::string chains = service.handle({"GET", "/api/v1/hazards/H3/chains", {{"profile", "researcher"}}, ""}).body;

  std::atomic<int> mismatches{0}, failures{0};
  std::vector<std::thread> clients;
  for (int t = 0; t < 8; ++t)
    clients.emplace_back([&, t] {
      httplib::Client client("127.0.0.1", port);
      client.set_keep_alive(true);
      for (int i = 0; i < 12; ++i) {
        const std::size_t k = static_cast<std::size_t>(t + i) % bodies.size();
        auto res = client.Post("/api/v1/whatif", bodies[k], "application/json");
        if (!res || res->status != 200) {
          ++failures;
          continue;
        }
        if (res->body != expected[k]) ++mismatches;
        auto get_res = client.Get("/api/v1/hazards/H3/chains?profile=researcher");
        if (!get_res || get_res->status != 200)
          ++failures;
        else if (get_res->body != chains)
          ++mismatches;
      }
    });
  for (auto& c : clients) c.join();

  httplib::Client client("127.0.0.1", port);
  auto res = client.Get("/api/v1/hazards/H99/chains?profile=researcher");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(res->get_header_value("Content-Type") == "application/json");

  server.stop();
  loop.join();
  CHECK(failures == 0);
  CHECK(mismatches == 0);
}

TEST_CASE("listen address parsing") {
  CHECK(parse_listen_address("127.0.0.1:8080") == std::pair<std::string, int>{"127.0.0.1", 8080});
  CHECK(parse_listen_address(":9000") == std::pair<std::string, int>{"0.0.0.0", 9000});
  CHECK_THROWS_AS(parse_listen_address("localhost"), InvalidArgumentError);
  CHECK_THROWS_AS(parse_listen_address("localhost:http"), InvalidArgumentError);
  CHECK_THROWS_AS(parse_listen_address("localhost:70000"), InvalidArgumentError);
}
