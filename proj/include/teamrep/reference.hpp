#pragma once

// Serial reference paths. They are slower or more literal than the production
// scorers and exist to cross-check them in tests and benchmarks.

#include "teamrep/kernel.hpp"
#include "teamrep/network.hpp"
#include "teamrep/replacement.hpp"

#include <span>
#include <vector>

namespace teamrep::reference {

/// Exact update kernel with every factor of the update (P, Q, X1, X2, Y1, Y2)
/// materialized densely and Z^{-1} applied as a full matrix. O(t^6) per call.
double kernel_fast_exact_dense(const TeamGraph& team, const Eigen::VectorXd& candidate_edges,
                               const Eigen::VectorXd& candidate_skills, const KernelParams& params);

/// Approximate kernel through one plain (r+2)^2 x (r+2)^2 solve per call,
/// without the block elimination of kernel_fast_approx.
double kernel_fast_approx_full(const TeamGraph& team, const LowRankFactors& factors,
                               const ApproxWorkspace& work, const Eigen::VectorXd& candidate_edges,
                               const Eigen::VectorXd& candidate_skills);

/// Kernel computed the way a generic low-rank pairwise method would inside a
/// replacement loop: both graphs factorized independently to rank r for every
/// call, nothing shared across candidates.
double kernel_independent_lowrank(const TeamGraph& g1, const TeamGraph& g2, int rank_r,
                                  const KernelParams& params);

/// Plain loop over candidates with no threading.
std::vector<double> score_candidates_serial(const LabeledNetwork& net, const TeamGraph& team,
                                            std::span<const NodeIndex> candidates,
                                            Algorithm algorithm, int rank_r,
                                            const KernelParams& params);

/// Baseline for the approximate scorer: kernel_independent_lowrank per candidate.
std::vector<double> score_candidates_refactor(const LabeledNetwork& net, const TeamGraph& team,
                                              std::span<const NodeIndex> candidates, int rank_r,
                                              const KernelParams& params,
                                              const ScoringOptions& options = {});

}  // namespace teamrep::reference
