#include "doctest.h"

#include "oracles.hpp"
#include "teamrep/cli.hpp"
#include "teamrep/kernel.hpp"
#include "teamrep/service.hpp"

#include "httplib.h"
#include "json.hpp"

#include <filesystem>
#include <sstream>
#include <thread>

using namespace teamrep;
using namespace teamrep::testing;
using json = nlohmann::json;

namespace {

const std::filesystem::path kFixtures = TEAMREP_FIXTURES;

ApiService toy_service(bool with_catalog = true) {
  LabeledNetwork net = load_network(kFixtures / "toy_edges.tsv", kFixtures / "toy_skills.tsv");
  TeamCatalog cat = with_catalog ? load_teams(kFixtures / "toy_teams.tsv", net) : TeamCatalog{};
  return ApiService(std::move(net), std::move(cat));
}

std::string cli_out(std::vector<std::string> args) {
  args.insert(args.begin(), {"teamrep", "recommend", "--network",
                             (kFixtures / "toy_edges.tsv").string(), "--skills",
                             (kFixtures / "toy_skills.tsv").string(), "--format", "json"});
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

std::string cli_stats() {
  const std::vector<std::string> args{"teamrep", "ingest", "--network",
                                      (kFixtures / "toy_edges.tsv").string(), "--skills",
                                      (kFixtures / "toy_skills.tsv").string(), "--teams",
                                      (kFixtures / "toy_teams.tsv").string(), "--format", "json"};
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

// Server on a free port for the lifetime of the object.
struct LiveServer {
  explicit LiveServer(const ApiService& s) : http(s) {
    port = http.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    worker = std::thread([this] { http.listen(); });
    http.wait_until_ready();
  }
  ~LiveServer() {
    http.stop();
    worker.join();
  }
  HttpFrontend http;
  int port = -1;
  std::thread worker;
};

}  // namespace

TEST_CASE("stats") {
  const ApiService svc = toy_service();
  const ApiResponse r = svc.handle("GET", "/v1/network/stats", "");
  CHECK(r.status == 200);
  CHECK(r.body == "{\"l\":3,\"m\":7,\"n\":6,\"team_count\":2}\n");
  CHECK(r.body == cli_stats());
  CHECK(toy_service(false).stats().body == "{\"l\":3,\"m\":7,\"n\":6,\"team_count\":0}\n");
  CHECK(svc.handle("POST", "/v1/network/stats", "").status == 405);
  CHECK(svc.handle("GET", "/v1/nothing", "").status == 404);
}

TEST_CASE("recommend matches the CLI byte for byte") {
  const ApiService svc = toy_service();
  for (const char* algo : {"basic", "fast_exact", "fast_approx"}) {
    for (const char* leaving : {"alice", "bob", "carol"}) {
      const json req{{"team", {"alice", "bob", "carol"}}, {"leaving", leaving}, {"algo", algo}};
      const ApiResponse r = svc.recommend(req.dump());
      CHECK(r.status == 200);
      CHECK(r.body == cli_out({"--team", "alice,bob,carol", "--leaving", leaving, "--algo", algo}));
    }
  }
  const ApiResponse by_id = svc.recommend(R"({"team":"grant1","leaving":"carol"})");
  CHECK(by_id.body == cli_out({"--team-id", "grant1", "--teams",
                               (kFixtures / "toy_teams.tsv").string(), "--leaving", "carol"}));
  const json body = json::parse(by_id.body);
  CHECK(body["recommendations"][0]["candidate"] == "dave");
  CHECK(body["rank_r"].is_null());
  CHECK(body["algorithm"] == "basic");
  CHECK(body.contains("decay"));

  const json approx = json::parse(
      svc.recommend(R"({"team":"grant1","leaving":"carol","algo":"approx","rank_r":1})").body);
  CHECK(approx["rank_r"] == 1);
  const json one = json::parse(svc.recommend(R"({"team":"grant1","leaving":"carol","top_k":1})").body);
  CHECK(one["recommendations"].size() == 1);
  const json many = json::parse(svc.recommend(R"({"team":"grant1","leaving":"carol","top_k":40})").body);
  CHECK(many["recommendations"].size() == 2);
}

TEST_CASE("recommend errors") {
  const ApiService svc = toy_service();
  auto status = [&](const char* body) { return svc.recommend(body).status; };
  CHECK(status("not json") == 400);
  CHECK(status(R"({"team":["alice","zoe"],"leaving":"alice"})") == 400);
  CHECK(status(R"({"team":["alice","alice","bob"],"leaving":"alice"})") == 400);
  CHECK(status(R"({"team":["alice","bob"],"leaving":"carol"})") == 422);
  CHECK(status(R"({"team":["alice"],"leaving":"alice"})") == 400);
  CHECK(status(R"({"team":"grant1","leaving":"carol","algo":"quantum"})") == 400);
  CHECK(status(R"({"team":"grant1","leaving":"carol","top_k":0})") == 400);
  CHECK(status(R"({"team":"grant1","leaving":"carol","algo":"approx","rank_r":9})") == 400);
  CHECK(status(R"({"team":"grant9","leaving":"carol"})") == 400);
  CHECK(status(R"({"team":"grant1","leaving":"carol","decay":-1})") == 400);
  CHECK(status(R"({"team":"grant1","leaving":"carol","decay":5})") == 503);
  const ApiResponse empty = svc.recommend(R"({"team":["erin","frank"],"leaving":"erin"})");
  CHECK(empty.status == 409);
  CHECK(json::parse(empty.body)["status"] == "no_candidates");
  CHECK(json::parse(svc.recommend("{}").body).contains("error"));
}

TEST_CASE("what-if") {
  const ApiService svc = toy_service();
  const LabeledNetwork& net = svc.network();
  const std::vector<NodeIndex> members{net.index_of("alice"), net.index_of("bob"),
                                       net.index_of("carol")};
  const TeamGraph team = team_subgraph(net, members, net.index_of("carol"));

  SUBCASE("clone: the modified subgraph equals the original") {
    const ApiResponse r = svc.whatif(R"({"team":"grant1","leaving":"carol","candidate":"dave"})");
    REQUIRE(r.status == 200);
    const json j = json::parse(r.body);
    json orig = j["original_subgraph"], mod = j["modified_subgraph"];
    CHECK(mod["members"] == json{"alice", "bob", "dave"});
    CHECK(orig["members"] == json{"alice", "bob", "carol"});
    // same edges and skills once dave is read as carol
    std::string mod_text = mod.dump();
    for (auto pos = mod_text.find("dave"); pos != std::string::npos; pos = mod_text.find("dave")) {
      mod_text.replace(pos, 4, "carol");
    }
    CHECK(json::parse(mod_text) == orig);
    const double c = j["decay"].get<double>();
    CHECK(relative_difference(j["kernel_score"].get<double>(), oracle_kernel_solve(team, team, c)) <
          1e-12);
    CHECK(j["recommendations"][0]["candidate"] == "dave");
    CHECK(j["rank_r"].is_null());
  }
  SUBCASE("isolated candidate: the modified last member has no edges") {
    const ApiResponse r = svc.whatif(R"({"team":"grant1","leaving":"carol","candidate":"frank"})");
    REQUIRE(r.status == 200);
    const json j = json::parse(r.body);
    for (const auto& e : j["modified_subgraph"]["edges"]) {
      CHECK(e["source"] != "frank");
      CHECK(e["target"] != "frank");
    }
    CHECK(j["modified_subgraph"]["edges"].size() == 1);  // alice-bob
    const double c = j["decay"].get<double>();
    const TeamGraph swapped = oracle_swap(net, team, net.index_of("frank"));
    CHECK(relative_difference(j["kernel_score"].get<double>(), oracle_kernel_solve(team, swapped, c)) <
          1e-12);
    KernelParams p;
    p.auto_decay = false;
    p.decay_c = c;
    CHECK(j["kernel_score"].get<double>() == kernel_direct(team, swapped, p).value);
  }
  SUBCASE("errors") {
    CHECK(svc.whatif(R"({"team":"grant1","leaving":"carol","candidate":"bob"})").status == 422);
    CHECK(svc.whatif(R"({"team":"grant1","leaving":"carol"})").status == 400);
    CHECK(svc.whatif(R"({"team":"grant1","leaving":"carol","candidate":"zoe"})").status == 400);
    CHECK(svc.whatif(R"({"team":"grant1","leaving":"dave","candidate":"erin"})").status == 422);
  }
  SUBCASE("identical requests give identical bodies") {
    const char* req = R"({"team":"grant1","leaving":"carol","candidate":"erin","algo":"approx"})";
    const ApiResponse a = svc.whatif(req), b = svc.whatif(req);
    CHECK(a.body == b.body);
    CHECK(json::parse(a.body)["rank_r"] == 2);
  }
}

TEST_CASE("over HTTP: parity, CORS and preflight") {
  const ApiService svc = toy_service();
  LiveServer server(svc);
  httplib::Client client("127.0.0.1", server.port);

  const std::string req = R"({"team":["alice","bob","carol"],"leaving":"carol","algo":"exact"})";
  const auto res = client.Post("/v1/recommend", req, "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->body == cli_out({"--team", "alice,bob,carol", "--leaving", "carol", "--algo", "exact"}));
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(res->get_header_value("Content-Type") == "application/json");

  const auto stats = client.Get("/v1/network/stats");
  REQUIRE(stats);
  CHECK(stats->body == cli_stats());

  const auto pre = client.Options("/v1/whatif");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  const auto bad = client.Post("/v1/recommend", R"({"team":["alice","bob"],"leaving":"carol"})",
                               "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 422);
}
