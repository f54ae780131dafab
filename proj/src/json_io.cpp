#include "teamrep/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace teamrep {

using json = nlohmann::json;

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

json recommendation_json(const LabeledNetwork& net, const ReplacementQuery& query,
                         const RecommendResult& result) {
  json team = json::array();
  for (NodeIndex m : query.team_members) team.push_back(net.id(m));
  json items = json::array();
  for (const Recommendation& r : result.items) {
    items.push_back({{"candidate", net.id(r.candidate)},
                     {"method", std::string(to_string(r.method))},
                     {"rank", r.rank},
                     {"score", round_significant(r.score)}});
  }
  return {{"algorithm", std::string(to_string(result.algorithm))},
          {"candidates_evaluated", result.candidates_evaluated},
          {"decay", result.decay_c},
          {"leaving", net.id(query.leaver)},
          {"rank_r", result.rank_r ? json(*result.rank_r) : json(nullptr)},
          {"recommendations", std::move(items)},
          {"status", result.status == RecommendStatus::ok ? "ok" : "no_candidates"},
          {"team", std::move(team)}};
}

std::string dump_body(const json& j) { return j.dump() + "\n"; }

json subgraph_json(const LabeledNetwork& net, const TeamGraph& g) {
  json members = json::array();
  for (NodeIndex m : g.members) members.push_back(net.id(m));
  json edges = json::array();
  const auto t = static_cast<Eigen::Index>(g.size());
  for (Eigen::Index a = 0; a < t; ++a) {
    for (Eigen::Index b = a + 1; b < t; ++b) {
      if (g.adjacency(a, b) == 0.0) continue;
      edges.push_back({{"source", net.id(g.members[static_cast<std::size_t>(a)])},
                       {"target", net.id(g.members[static_cast<std::size_t>(b)])},
                       {"weight", g.adjacency(a, b)}});
    }
  }
  json skills = json::object();
  for (Eigen::Index a = 0; a < t; ++a) {
    json row = json::object();
    for (Eigen::Index j = 0; j < g.skills.cols(); ++j) {
      if (g.skills(a, j) != 0.0) row[net.skill_names()[static_cast<std::size_t>(j)]] = g.skills(a, j);
    }
    skills[net.id(g.members[static_cast<std::size_t>(a)])] = std::move(row);
  }
  return {{"edges", std::move(edges)}, {"members", std::move(members)}, {"skills", std::move(skills)}};
}

nlohmann::json stats_json(const LabeledNetwork& net, const TeamCatalog& catalog) {
  return {{"l", net.l()}, {"m", net.m()}, {"n", net.n()}, {"team_count", catalog.teams.size()}};
}

}  // namespace teamrep
