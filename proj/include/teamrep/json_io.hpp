#pragma once

#include "teamrep/network.hpp"
#include "teamrep/replacement.hpp"

#include "json.hpp"

#include <string>

namespace teamrep {

/// Scores are written rounded to this many significant digits so that runs
/// whose scores agree to round-off serialize identically.
inline constexpr int kScoreDigits = 12;

double round_significant(double value, int digits = kScoreDigits);

/// Recommendation payload shared by the CLI and the HTTP service. Keys are
/// sorted, ids are external.
nlohmann::json recommendation_json(const LabeledNetwork& net, const ReplacementQuery& query,
                                   const RecommendResult& result);

/// Compact serialization plus a trailing newline.
std::string dump_body(const nlohmann::json& j);

/// members / edges / skills of a team graph, external ids only.
nlohmann::json subgraph_json(const LabeledNetwork& net, const TeamGraph& g);

/// {n, m, l, team_count}; shared by `teamrep ingest` and GET /v1/network/stats.
nlohmann::json stats_json(const LabeledNetwork& net, const TeamCatalog& catalog);

}  // namespace teamrep
