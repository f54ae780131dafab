#pragma once

// Labeled random-walk graph kernel between two team graphs of equal size t:
//
//   Ker(G1, G2) = y' (I - c Lx (A1 (x) A2))^{-1} Lx x,   x = x1 (x) x2,  y = y1 (x) y2,
//   Lx = sum_k diag(L1(:,k)) (x) diag(L2(:,k)).
//
// Both adjacencies are symmetric, so the transposes A1' (x) A2' of the general
// definition are dropped. Product-graph state (a, b), a in G1 and b in G2, lives
// at flat index a * t + b.

#include "teamrep/network.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>

namespace teamrep {

enum class Method { direct, series, fast_exact, fast_approx };

std::string_view to_string(Method m) noexcept;

struct KernelParams {
  /// Decay factor c. Ignored while auto_decay is set.
  double decay_c = 0.0;
  /// Pick c = 0.9 / guard bound for the instance (see guard_bound).
  bool auto_decay = true;
  /// Per-graph start/stop weights; uniform 1/t when unset. Not renormalized.
  std::optional<Eigen::VectorXd> start_1, start_2, stop_1, stop_2;
  double series_tol = 1e-12;
  int series_max_iter = 10000;
  /// Attempt the dense solve even when the convergence guard fails.
  bool allow_guard_violation = false;
};

struct KernelValue {
  double value = 0.0;
  Method method = Method::direct;
  bool converged = true;
  double decay_c = 0.0;
  int iterations = 0;
  std::string diagnostic;
};

/// Diagonal of Lx: entry a * t + b is the skill dot product L1(a,:) . L2(b,:).
Eigen::VectorXd label_product(const Eigen::MatrixXd& skills_1, const Eigen::MatrixXd& skills_2);

/// Upper bound on the spectral radius of Lx (A1 (x) A2):
/// max(Lx) * maxrowsum(A1) * maxrowsum(A2). The kernel series converges when
/// c * bound < 1.
double guard_bound(const TeamGraph& g1, const TeamGraph& g2);
double max_row_sum(const Eigen::MatrixXd& a);

/// c = 0.9 / bound, or 0.9 when the bound is zero (any c converges then).
double auto_decay_for_bound(double bound) noexcept;

/// Returns params.decay_c, or the automatic choice for this pair.
double resolve_decay(const TeamGraph& g1, const TeamGraph& g2, const KernelParams& params);

/// Start (x) and stop (y) vectors of the product graph, each of length t^2.
Eigen::VectorXd product_start(const KernelParams& params, Eigen::Index t);
Eigen::VectorXd product_stop(const KernelParams& params, Eigen::Index t);

/// One dense t^2 x t^2 solve. The oracle every fast path is checked against.
/// Throws NonConvergenceError when the guard fails (unless allowed) or the
/// system is numerically singular.
KernelValue kernel_direct(const TeamGraph& g1, const TeamGraph& g2, const KernelParams& params);

/// Truncated power series sum_z c^z y' (Lx (A1 (x) A2))^z Lx x. Stops when a
/// term falls below series_tol times the running sum. Non-convergence is
/// reported through KernelValue::converged, never thrown.
KernelValue kernel_series(const TeamGraph& g1, const TeamGraph& g2, const KernelParams& params);

/// Candidate-invariant quantities for scoring replacements of the last member
/// of one team by the matrix inversion lemma.
///
/// With Ac / Lc the team adjacency / skills with the leaver zeroed:
///   Z = I - c Lcx (A1 (x) Ac),   Lcx = sum_j diag(L1(:,j)) (x) diag(Lc(:,j)),
///   R = Lcx x,  b = y' Z^{-1} R,  left_row = c y' Z^{-1}.
struct PrecomputeCache {
  Eigen::MatrixXd z_inv;     // t^2 x t^2
  Eigen::VectorXd r_vec;     // R
  double b_scalar = 0.0;     // y' Z^{-1} R
  Eigen::RowVectorXd left_row;  // c y' Z^{-1}

  // Derived blocks reused by every candidate.
  Eigen::VectorXd zinv_r;        // Z^{-1} R
  Eigen::MatrixXd zinv_slot;     // Z^{-1}(:, (a, last)) for a = 0..t-1, t^2 x t
  Eigen::MatrixXd zinv_lc_a1;    // Z^{-1} Lcx (A1 (x) I), t^2 x t^2
  Eigen::MatrixXd zinv_p;        // Z^{-1} P, t^2 x l t
  Eigen::VectorXd start, stop;   // product-graph x and y
  double lc_max = 0.0;           // max entry of Lcx, for the per-candidate guard
  Eigen::RowVectorXd stop_zinv_p;      // y' Z^{-1} P
  Eigen::RowVectorXd stop_zinv_lc_a1;  // y' Z^{-1} Lcx (A1 (x) I)
  Eigen::RowVectorXd stop_zinv_slot;   // y' Z^{-1}(:, (a, last))

  // Identity of the instance the cache was built for.
  std::vector<NodeIndex> members;
  Eigen::MatrixXd team_adjacency;
  Eigen::MatrixXd team_skills;
  double decay_c = 0.0;
};

/// Throws ArgumentError if params.auto_decay is set (the decay must be fixed
/// across candidates) and NonConvergenceError when Z is singular.
PrecomputeCache build_precompute_cache(const TeamGraph& team, const KernelParams& params);

/// Ker(G(T), G(T_{p->q})) through the rank-(l+4)t update of Z.
/// candidate_edges: weights to the retained members in team order (t-1).
/// candidate_skills: the candidate's skill row (l).
KernelValue kernel_fast_exact(const TeamGraph& team, const PrecomputeCache& cache,
                              const Eigen::VectorXd& candidate_edges,
                              const Eigen::VectorXd& candidate_skills,
                              const KernelParams& params);

/// Rank-r symmetric eigendecomposition of Ac plus the leaver's rank-2 factors.
struct LowRankFactors {
  Eigen::MatrixXd u;       // t x r
  Eigen::VectorXd lambda;  // r, sorted by descending magnitude
  Eigen::MatrixXd v;       // r x t, Lambda U'
  int rank_r = 0;
  Eigen::VectorXd w1;      // leaver weights into the team, last entry 0
  Eigen::MatrixXd e1;      // t x 2, [w1, s]
  Eigen::MatrixXd f1;      // 2 x t, [s'; w1']
  /// Frobenius norm of the dropped part of the spectrum.
  double truncation_error = 0.0;

  std::vector<NodeIndex> members;
  Eigen::MatrixXd team_adjacency;
};

/// Eigenvalues are ranked by magnitude, ties keep the lower solver index.
LowRankFactors build_lowrank_factors(const TeamGraph& team, int rank_r);

/// Approximate kernel with A1 ~ [U,E1][V;F1] and A2 ~ [U,E2][V;F2] and an
/// (r+2)^2 inner solve. Exact when U Lambda U' reproduces Ac.
KernelValue kernel_fast_approx(const TeamGraph& team, const LowRankFactors& factors,
                               const Eigen::VectorXd& candidate_edges,
                               const Eigen::VectorXd& candidate_skills,
                               const KernelParams& params);

/// Candidate-invariant pieces of the approximate kernel, computed once per
/// (team, factors, params). kernel_fast_approx builds one internally.
struct ApproxWorkspace {
  Eigen::MatrixXd x1;                  // [U, E1], t x (r+2)
  Eigen::MatrixXd y1;                  // [V; F1], (r+2) x t
  std::vector<Eigen::MatrixXd> inner_1;  // Y1 L1^(j) X1
  std::vector<Eigen::RowVectorXd> left_1;  // y1' L1^(j) X1
  std::vector<Eigen::VectorXd> right_1;    // Y1 L1^(j) x1
  Eigen::VectorXd scalar_1;                // y1' L1^(j) x1
  Eigen::VectorXd x2, y2;                  // per-graph start/stop of G2
  double decay_c = 0.0;

  // Blocks of G2's side that do not depend on the candidate. V(:, last) = 0,
  // so V L2^(j) U = V Lc^(j) U and the inner-system block coupling two U
  // indices of G2 is fixed; its inverse is formed here once.
  Eigen::RowVectorXd u_last;                 // U(last, :)
  std::vector<Eigen::MatrixXd> v_lc;         // V diag(Lc(:,j)), r x t
  std::vector<Eigen::MatrixXd> lc_u;         // diag(Lc(:,j)) U, t x r
  std::vector<Eigen::VectorXd> v_lc_x2;      // V diag(Lc(:,j)) x2
  std::vector<Eigen::RowVectorXd> y2_lc_u;   // y2' diag(Lc(:,j)) U
  Eigen::VectorXd y2_lc_x2;                  // y2' diag(Lc(:,j)) x2, per j
  Eigen::MatrixXd lc;                        // team skills, leaver row zeroed
  Eigen::MatrixXd g_uu;                      // (I - c W_UU)^{-1}, q r x q r
};

ApproxWorkspace make_approx_workspace(const TeamGraph& team, const LowRankFactors& factors,
                                      const KernelParams& params);

KernelValue kernel_fast_approx(const TeamGraph& team, const LowRankFactors& factors,
                               const ApproxWorkspace& work,
                               const Eigen::VectorXd& candidate_edges,
                               const Eigen::VectorXd& candidate_skills);

}  // namespace teamrep
