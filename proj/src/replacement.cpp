#include "teamrep/replacement.hpp"

#include "teamrep/errors.hpp"
#include "teamrep/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <omp.h>

namespace teamrep {

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::basic: return "basic";
    case Algorithm::fast_exact: return "fast_exact";
    case Algorithm::fast_approx: return "fast_approx";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept {
  if (name == "basic") return Algorithm::basic;
  if (name == "fast_exact" || name == "exact") return Algorithm::fast_exact;
  if (name == "fast_approx" || name == "approx") return Algorithm::fast_approx;
  return std::nullopt;
}

std::vector<NodeIndex> prune_candidates(const LabeledNetwork& net,
                                        std::span<const NodeIndex> team_members,
                                        NodeIndex leaver) {
  const std::unordered_set<NodeIndex> team(team_members.begin(), team_members.end());
  std::vector<char> seen(net.n(), 0);
  std::vector<NodeIndex> out;
  for (NodeIndex member : team_members) {
    if (member == leaver) continue;
    net.for_each_neighbor(member, [&](NodeIndex j, double w) {
      if (w > 0.0 && !seen[j] && !team.contains(j)) {
        seen[j] = 1;
        out.push_back(j);
      }
    });
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeIndex> all_outside_candidates(const LabeledNetwork& net,
                                              std::span<const NodeIndex> team_members) {
  const std::unordered_set<NodeIndex> team(team_members.begin(), team_members.end());
  std::vector<NodeIndex> out;
  out.reserve(net.n());
  for (NodeIndex i = 0; i < net.n(); ++i) {
    if (!team.contains(i)) out.push_back(i);
  }
  return out;
}

CandidateData candidate_data(const LabeledNetwork& net, const TeamGraph& team,
                             NodeIndex candidate) {
  return {candidate_edge_weights(net, team, candidate),
          net.skills().row(static_cast<Eigen::Index>(candidate)).transpose()};
}

namespace {

// G(T_{p->q}) from candidate data; also valid when q is the leaver itself.
TeamGraph with_candidate(const TeamGraph& team, const CandidateData& data, NodeIndex candidate) {
  const auto t = static_cast<Eigen::Index>(team.size());
  TeamGraph g = team;
  g.members.back() = candidate;
  g.adjacency.row(t - 1).head(t - 1) = data.edges.transpose();
  g.adjacency.col(t - 1).head(t - 1) = data.edges;
  g.adjacency(t - 1, t - 1) = 0.0;
  g.skills.row(t - 1) = data.skills.transpose();
  return g;
}

KernelParams fixed_decay(KernelParams params, double c) {
  params.decay_c = c;
  params.auto_decay = false;
  return params;
}

// Holds the per-query state of one algorithm; score() is thread-safe.
class CandidateScorer {
 public:
  CandidateScorer(const LabeledNetwork& net, const TeamGraph& team, Algorithm algorithm,
                  int rank_r, const KernelParams& params)
      : net_(net), team_(team), algorithm_(algorithm), params_(params) {
    if (params.auto_decay) throw ArgumentError("candidate scoring needs a resolved decay");
    if (algorithm == Algorithm::fast_exact) {
      cache_ = build_precompute_cache(team, params);
    } else if (algorithm == Algorithm::fast_approx) {
      factors_ = build_lowrank_factors(team, rank_r);
      work_ = make_approx_workspace(team, factors_, params);
    }
  }

  double score(NodeIndex candidate) const {
    const CandidateData data = candidate_data(net_, team_, candidate);
    switch (algorithm_) {
      case Algorithm::basic:
        return kernel_direct(team_, with_candidate(team_, data, candidate), params_).value;
      case Algorithm::fast_exact:
        return kernel_fast_exact(team_, cache_, data.edges, data.skills, params_).value;
      case Algorithm::fast_approx:
        return kernel_fast_approx(team_, factors_, work_, data.edges, data.skills).value;
    }
    return 0.0;
  }

 private:
  const LabeledNetwork& net_;
  const TeamGraph& team_;
  Algorithm algorithm_;
  KernelParams params_;
  PrecomputeCache cache_;
  LowRankFactors factors_;
  ApproxWorkspace work_;
};

}  // namespace

double query_decay(const LabeledNetwork& net, const TeamGraph& team,
                   std::span<const NodeIndex> candidates, const KernelParams& params) {
  if (!params.auto_decay) {
    if (!(params.decay_c >= 0.0) || !std::isfinite(params.decay_c)) {
      throw ArgumentError("decay c must be a finite nonnegative number");
    }
    return params.decay_c;
  }
  const auto t = static_cast<Eigen::Index>(team.size());
  const Eigen::Index last = t - 1;
  const Eigen::MatrixXd& a1 = team.adjacency;
  Eigen::MatrixXd lc_skills = team.skills;
  lc_skills.row(last).setZero();
  const Eigen::VectorXd lc = label_product(team.skills, lc_skills);
  const double lc_max = lc.size() ? lc.maxCoeff() : 0.0;
  const double a1_rows = max_row_sum(a1);
  const Eigen::VectorXd ac_rows = a1.rowwise().sum() - a1.col(last);

  double bound = 0.0;
  for (NodeIndex q : candidates) {
    const CandidateData data = candidate_data(net, team, q);
    const Eigen::VectorXd d = team.skills * data.skills;
    double a2_rows = data.edges.sum();
    for (Eigen::Index a = 0; a < last; ++a) a2_rows = std::max(a2_rows, ac_rows(a) + data.edges(a));
    const double lmax = std::max(lc_max, d.size() ? d.maxCoeff() : 0.0);
    bound = std::max(bound, lmax * a1_rows * a2_rows);
  }
  return auto_decay_for_bound(bound);
}

TeamGraph query_team(const LabeledNetwork& net, const ReplacementQuery& query) {
  if (query.top_k < 1) throw ArgumentError("top_k must be at least 1");
  for (NodeIndex m : query.team_members) {
    if (m >= net.n()) throw ArgumentError("team member index out of range");
  }
  if (query.leaver >= net.n()) throw ArgumentError("leaver index out of range");
  TeamGraph team = team_subgraph(net, query.team_members, query.leaver);
  if (query.rank_r && (*query.rank_r < 0 || static_cast<std::size_t>(*query.rank_r) > team.size())) {
    throw ArgumentError("rank_r must lie in [0, t]");
  }
  return team;
}

int default_rank(std::size_t team_size) noexcept {
  return static_cast<int>(std::min<std::size_t>(team_size - 1, 10));
}

std::vector<double> score_candidates(const LabeledNetwork& net, const TeamGraph& team,
                                     std::span<const NodeIndex> candidates, Algorithm algorithm,
                                     int rank_r, const KernelParams& params,
                                     const ScoringOptions& options) {
  if (options.threads <= 1) {
    return reference::score_candidates_serial(net, team, candidates, algorithm, rank_r, params);
  }
  const CandidateScorer scorer(net, team, algorithm, rank_r, params);
  std::vector<double> scores(candidates.size(), 0.0);
  const auto count = static_cast<std::ptrdiff_t>(candidates.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4) num_threads(options.threads)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      scores[static_cast<std::size_t>(i)] = scorer.score(candidates[static_cast<std::size_t>(i)]);
    } catch (...) {
#pragma omp critical(teamrep_score_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return scores;
}

std::vector<Recommendation> rank_candidates(std::span<const NodeIndex> candidates,
                                            std::span<const double> scores, std::size_t top_k,
                                            Algorithm method) {
  if (candidates.size() != scores.size()) throw ArgumentError("one score per candidate");
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  });
  // Chain consecutive near-equal scores into tie groups; each group is
  // ordered by node index so round-off never decides the ranking.
  std::size_t begin = 0;
  while (begin < order.size()) {
    std::size_t end = begin + 1;
    while (end < order.size()) {
      const double prev = scores[order[end - 1]];
      const double cur = scores[order[end]];
      const double scale = std::max(std::abs(prev), std::abs(cur));
      if (std::abs(prev - cur) > kTieTolerance * scale) break;
      ++end;
    }
    std::sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
              order.begin() + static_cast<std::ptrdiff_t>(end),
              [&](std::size_t a, std::size_t b) { return candidates[a] < candidates[b]; });
    begin = end;
  }
  const std::size_t keep = std::min(top_k, order.size());
  std::vector<Recommendation> out;
  out.reserve(keep);
  for (std::size_t r = 0; r < keep; ++r) {
    out.push_back({candidates[order[r]], scores[order[r]], r + 1, method});
  }
  return out;
}

RecommendResult recommend(const LabeledNetwork& net, const ReplacementQuery& query,
                          const ScoringOptions& options) {
  const TeamGraph team = query_team(net, query);
  std::vector<NodeIndex> candidates = query.prune
                                          ? prune_candidates(net, query.team_members, query.leaver)
                                          : all_outside_candidates(net, query.team_members);
  if (query.include_leaver) {
    candidates.insert(std::lower_bound(candidates.begin(), candidates.end(), query.leaver),
                      query.leaver);
  }

  RecommendResult result;
  result.algorithm = query.algorithm;
  if (query.algorithm == Algorithm::fast_approx) {
    result.rank_r = query.rank_r.value_or(default_rank(team.size()));
  }
  result.decay_c = query_decay(net, team, candidates, query.params);
  result.candidates_evaluated = candidates.size();
  if (candidates.empty()) {
    result.status = RecommendStatus::no_candidates;
    return result;
  }
  const KernelParams params = fixed_decay(query.params, result.decay_c);
  const std::vector<double> scores = score_candidates(
      net, team, candidates, query.algorithm, result.rank_r.value_or(0), params, options);
  result.items = rank_candidates(candidates, scores, query.top_k, query.algorithm);
  return result;
}

RecommendResult recommend_basic(const LabeledNetwork& net, ReplacementQuery query,
                                const ScoringOptions& options) {
  query.algorithm = Algorithm::basic;
  return recommend(net, query, options);
}

RecommendResult recommend_fast_exact(const LabeledNetwork& net, ReplacementQuery query,
                                     const ScoringOptions& options) {
  query.algorithm = Algorithm::fast_exact;
  return recommend(net, query, options);
}

RecommendResult recommend_fast_approx(const LabeledNetwork& net, ReplacementQuery query,
                                      const ScoringOptions& options) {
  query.algorithm = Algorithm::fast_approx;
  return recommend(net, query, options);
}

namespace reference {

std::vector<double> score_candidates_serial(const LabeledNetwork& net, const TeamGraph& team,
                                            std::span<const NodeIndex> candidates,
                                            Algorithm algorithm, int rank_r,
                                            const KernelParams& params) {
  const CandidateScorer scorer(net, team, algorithm, rank_r, params);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (NodeIndex q : candidates) scores.push_back(scorer.score(q));
  return scores;
}

std::vector<double> score_candidates_refactor(const LabeledNetwork& net, const TeamGraph& team,
                                              std::span<const NodeIndex> candidates, int rank_r,
                                              const KernelParams& params,
                                              const ScoringOptions& options) {
  if (params.auto_decay) throw ArgumentError("candidate scoring needs a resolved decay");
  std::vector<double> scores(candidates.size(), 0.0);
  const auto count = static_cast<std::ptrdiff_t>(candidates.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4) num_threads(std::max(1, options.threads))
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const NodeIndex q = candidates[static_cast<std::size_t>(i)];
      const TeamGraph g2 = with_candidate(team, candidate_data(net, team, q), q);
      scores[static_cast<std::size_t>(i)] = kernel_independent_lowrank(team, g2, rank_r, params);
    } catch (...) {
#pragma omp critical(teamrep_score_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return scores;
}

}  // namespace reference

}  // namespace teamrep
