#pragma once

#include "teamrep/kernel.hpp"
#include "teamrep/network.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace teamrep {

enum class Algorithm { basic, fast_exact, fast_approx };

std::string_view to_string(Algorithm a) noexcept;
/// Accepts basic | fast_exact | exact | fast_approx | approx.
std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept;

struct ReplacementQuery {
  std::vector<NodeIndex> team_members;
  NodeIndex leaver = 0;
  std::size_t top_k = 10;
  Algorithm algorithm = Algorithm::basic;
  /// fast_approx only; defaults to min(t - 1, 10).
  std::optional<int> rank_r;
  KernelParams params;
  /// Score the leaver as its own replacement (calibration ceiling).
  bool include_leaver = false;
  /// Restrict scoring to candidates adjacent to a retained member.
  bool prune = true;
};

struct Recommendation {
  NodeIndex candidate = 0;
  double score = 0.0;
  std::size_t rank = 0;  // 1-based
  Algorithm method = Algorithm::basic;
};

enum class RecommendStatus { ok, no_candidates };

struct RecommendResult {
  std::vector<Recommendation> items;
  RecommendStatus status = RecommendStatus::ok;
  std::size_t candidates_evaluated = 0;
  double decay_c = 0.0;
  Algorithm algorithm = Algorithm::basic;
  std::optional<int> rank_r;
};

struct ScoringOptions {
  /// Worker threads for the candidate loop; 1 keeps it serial.
  int threads = 1;
};

/// Scores within this relative distance are ties, ordered by node index.
inline constexpr double kTieTolerance = 1e-9;

/// Nodes outside the team with a positive-weight edge to some retained member,
/// ascending.
std::vector<NodeIndex> prune_candidates(const LabeledNetwork& net,
                                        std::span<const NodeIndex> team_members, NodeIndex leaver);

/// Every node outside the team, ascending (the unpruned candidate set).
std::vector<NodeIndex> all_outside_candidates(const LabeledNetwork& net,
                                              std::span<const NodeIndex> team_members);

/// Per-candidate inputs of the fast scorers.
struct CandidateData {
  Eigen::VectorXd edges;   // t - 1
  Eigen::VectorXd skills;  // l
};
CandidateData candidate_data(const LabeledNetwork& net, const TeamGraph& team, NodeIndex candidate);

/// Decay shared by every candidate of a query. Auto: 0.9 over the largest
/// guard bound among (G(T), G(T_{p->q})) for q in `candidates`.
double query_decay(const LabeledNetwork& net, const TeamGraph& team,
                   std::span<const NodeIndex> candidates, const KernelParams& params);

/// Validates a query and resolves its team graph (leaver last).
TeamGraph query_team(const LabeledNetwork& net, const ReplacementQuery& query);

int default_rank(std::size_t team_size) noexcept;

/// Scores `candidates` against `team`. params must carry a fixed decay.
/// Runs the candidate loop across options.threads workers; the result is
/// independent of the thread count.
std::vector<double> score_candidates(const LabeledNetwork& net, const TeamGraph& team,
                                     std::span<const NodeIndex> candidates, Algorithm algorithm,
                                     int rank_r, const KernelParams& params,
                                     const ScoringOptions& options = {});

/// Sorts by score descending with the tie rule and keeps the first top_k.
std::vector<Recommendation> rank_candidates(std::span<const NodeIndex> candidates,
                                            std::span<const double> scores, std::size_t top_k,
                                            Algorithm method);

RecommendResult recommend(const LabeledNetwork& net, const ReplacementQuery& query,
                          const ScoringOptions& options = {});
RecommendResult recommend_basic(const LabeledNetwork& net, ReplacementQuery query,
                                const ScoringOptions& options = {});
RecommendResult recommend_fast_exact(const LabeledNetwork& net, ReplacementQuery query,
                                     const ScoringOptions& options = {});
RecommendResult recommend_fast_approx(const LabeledNetwork& net, ReplacementQuery query,
                                      const ScoringOptions& options = {});

}  // namespace teamrep
