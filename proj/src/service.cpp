#include "teamrep/service.hpp"

#include "teamrep/errors.hpp"
#include "teamrep/json_io.hpp"

#include "httplib.h"
#include "json.hpp"

#include <algorithm>
#include <set>

namespace teamrep {

using json = nlohmann::json;

namespace {

// Request problems that map straight to an HTTP status.
struct HttpError {
  int status;
  std::string message;
};

ApiResponse error_response(int status, const std::string& message) {
  return {status, dump_body({{"error", message}, {"status", status}})};
}

json parse_body(std::string_view body) {
  json j = json::parse(body.begin(), body.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw HttpError{400, "request body must be a JSON object"};
  return j;
}

NodeIndex resolve(const LabeledNetwork& net, const json& v, const char* field) {
  if (!v.is_string()) throw HttpError{400, std::string(field) + " must be a node id string"};
  const auto idx = net.find(v.get<std::string>());
  if (!idx) throw HttpError{400, "unknown node id '" + v.get<std::string>() + "'"};
  return *idx;
}

std::vector<NodeIndex> resolve_team(const LabeledNetwork& net, const TeamCatalog& catalog,
                                    const json& req) {
  if (!req.contains("team")) throw HttpError{400, "missing field 'team'"};
  const json& team = req["team"];
  std::vector<NodeIndex> members;
  if (team.is_string()) {
    const auto it = catalog.teams.find(team.get<std::string>());
    if (it == catalog.teams.end()) throw HttpError{400, "unknown team id '" + team.get<std::string>() + "'"};
    for (const auto& id : it->second) members.push_back(net.index_of(id));
  } else if (team.is_array()) {
    for (const json& id : team) members.push_back(resolve(net, id, "team entries"));
  } else {
    throw HttpError{400, "team must be a list of node ids or a catalog team id"};
  }
  if (std::set<NodeIndex>(members.begin(), members.end()).size() != members.size()) {
    throw HttpError{400, "team lists a member twice"};
  }
  return members;
}

// Common fields of /recommend and /whatif.
ReplacementQuery parse_query(const LabeledNetwork& net, const TeamCatalog& catalog, const json& req) {
  ReplacementQuery q;
  q.team_members = resolve_team(net, catalog, req);
  if (!req.contains("leaving")) throw HttpError{400, "missing field 'leaving'"};
  q.leaver = resolve(net, req["leaving"], "leaving");
  if (std::find(q.team_members.begin(), q.team_members.end(), q.leaver) == q.team_members.end()) {
    throw HttpError{422, "leaving member '" + net.id(q.leaver) + "' is not in the team"};
  }
  if (q.team_members.size() < 2) throw HttpError{400, "a team needs at least 2 members"};

  const std::string algo = req.value("algo", std::string("basic"));
  const auto parsed = parse_algorithm(algo);
  if (!parsed) throw HttpError{400, "unknown algo '" + algo + "'"};
  q.algorithm = *parsed;

  if (req.contains("top_k")) {
    const json& k = req["top_k"];
    if (!k.is_number_integer() || k.get<long long>() < 1) {
      throw HttpError{400, "top_k must be a positive integer"};
    }
    q.top_k = k.get<std::size_t>();
  }
  if (req.contains("rank_r") && !req["rank_r"].is_null()) {
    const json& r = req["rank_r"];
    if (!r.is_number_integer() || r.get<long long>() < 0 ||
        r.get<std::size_t>() > q.team_members.size()) {
      throw HttpError{400, "rank_r must be an integer in [0, team size]"};
    }
    q.rank_r = r.get<int>();
  }
  if (req.contains("decay")) {
    const json& d = req["decay"];
    if (d.is_string() && d.get<std::string>() == "auto") {
      q.params.auto_decay = true;
    } else if (d.is_number() && d.get<double>() >= 0.0) {
      q.params.auto_decay = false;
      q.params.decay_c = d.get<double>();
    } else {
      throw HttpError{400, "decay must be a nonnegative number or \"auto\""};
    }
  }
  return q;
}

template <class Fn>
ApiResponse guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const HttpError& e) {
    return error_response(e.status, e.message);
  } catch (const NonConvergenceError& e) {
    return error_response(503, e.what());
  } catch (const ReferenceError& e) {
    return error_response(400, e.what());
  } catch (const Error& e) {
    return error_response(400, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

}  // namespace

ApiService::ApiService(LabeledNetwork net, TeamCatalog catalog, ScoringOptions options)
    : net_(std::move(net)), catalog_(std::move(catalog)), options_(options) {}

ApiResponse ApiService::handle(std::string_view method, std::string_view path,
                               std::string_view body) const {
  if (path == "/v1/network/stats") {
    if (method != "GET") return error_response(405, "use GET");
    return stats();
  }
  if (path == "/v1/recommend") {
    if (method != "POST") return error_response(405, "use POST");
    return recommend(body);
  }
  if (path == "/v1/whatif") {
    if (method != "POST") return error_response(405, "use POST");
    return whatif(body);
  }
  return error_response(404, "no route " + std::string(path));
}

ApiResponse ApiService::stats() const { return {200, dump_body(stats_json(net_, catalog_))}; }

ApiResponse ApiService::recommend(std::string_view body) const {
  return guarded([&] {
    const json req = parse_body(body);
    const ReplacementQuery q = parse_query(net_, catalog_, req);
    const RecommendResult result = teamrep::recommend(net_, q, options_);
    const int status = result.status == RecommendStatus::no_candidates ? 409 : 200;
    return ApiResponse{status, dump_body(recommendation_json(net_, q, result))};
  });
}

ApiResponse ApiService::whatif(std::string_view body) const {
  return guarded([&] {
    const json req = parse_body(body);
    ReplacementQuery q = parse_query(net_, catalog_, req);
    if (!req.contains("candidate")) throw HttpError{400, "missing field 'candidate'"};
    const NodeIndex cand = resolve(net_, req["candidate"], "candidate");
    if (std::find(q.team_members.begin(), q.team_members.end(), cand) != q.team_members.end()) {
      throw HttpError{422, "candidate '" + net_.id(cand) + "' is already in the team"};
    }

    const TeamGraph original = query_team(net_, q);
    const TeamGraph modified = replace_member(net_, original, cand);
    // One decay for the clicked candidate and the list beside it.
    std::vector<NodeIndex> pool = prune_candidates(net_, q.team_members, q.leaver);
    if (!std::binary_search(pool.begin(), pool.end(), cand)) {
      pool.insert(std::lower_bound(pool.begin(), pool.end(), cand), cand);
    }
    const double c = query_decay(net_, original, pool, q.params);
    q.params.auto_decay = false;
    q.params.decay_c = c;
    const int rank = q.algorithm == Algorithm::fast_approx
                         ? q.rank_r.value_or(default_rank(original.size()))
                         : 0;
    const std::vector<NodeIndex> one{cand};
    const double score =
        score_candidates(net_, original, one, q.algorithm, rank, q.params, options_).front();
    const RecommendResult list = teamrep::recommend(net_, q, options_);

    json out{{"algorithm", std::string(to_string(q.algorithm))},
             {"candidate", net_.id(cand)},
             {"decay", c},
             {"kernel_score", score},
             {"leaving", net_.id(q.leaver)},
             {"modified_subgraph", subgraph_json(net_, modified)},
             {"original_subgraph", subgraph_json(net_, original)},
             {"rank_r", q.algorithm == Algorithm::fast_approx ? json(rank) : json(nullptr)},
             {"recommendations", recommendation_json(net_, q, list)["recommendations"]}};
    return ApiResponse{200, dump_body(out)};
  });
}

HttpFrontend::HttpFrontend(const ApiService& service, std::string allow_origin)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  server_->set_default_headers({{"Access-Control-Allow-Origin", allow_origin},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"}});
  auto reply = [this](const httplib::Request& req, httplib::Response& res) {
    const ApiResponse r = service_.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  };
  server_->Get(R"(/v1/.*)", reply);
  server_->Post(R"(/v1/.*)", reply);
  server_->Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
}

HttpFrontend::~HttpFrontend() { stop(); }

int HttpFrontend::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpFrontend::listen() { return server_->listen_after_bind(); }

void HttpFrontend::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void HttpFrontend::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace teamrep
