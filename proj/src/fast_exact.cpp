// Exact replacement scoring by the matrix inversion lemma.
//
// For candidate q with edge vector w (into the retained members, last entry 0)
// and skill row lq, the new team differs from the leaver-zeroed team only in
// its last row/column and last skill row:
//
//   A2 = Ac + E F,            E = [w, s], F = [s'; w']
//   Lx = Lcx + P Q,           P = [L1^(j) (x) s]_j, Q = [I (x) lq(j) s']_j
//   I - c Lx (A1 (x) A2) = Z - c X Y,
//   X = [P, X1, X2],  X1 = Lcx (A1 (x) E),  X2 = P Q (A1 (x) E)
//   Y = [Y1; Y2; Y2], Y1 = Q (A1 (x) Ac),   Y2 = I (x) F
//
// so Ker = b + y' r' + c y' Z^{-1} X M Y (Z^{-1} R + r') with
// M = (I - c Y Z^{-1} X)^{-1} of size (l+4)t and r' = Z^{-1} P Q x.
//
// Nothing of size t^2 x t^2 is formed per candidate: every block of Z^{-1} X
// is a column combination of cached blocks, and Y only reads two contractions
// of each t x t slab.

#include "teamrep/errors.hpp"
#include "teamrep/kernel.hpp"

#include <cmath>
#include <sstream>

namespace teamrep {

namespace {

Eigen::MatrixXd zero_last_row(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out = a;
  out.row(out.rows() - 1).setZero();
  return out;
}

Eigen::MatrixXd zero_last(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out = zero_last_row(a);
  out.col(out.cols() - 1).setZero();
  return out;
}

}  // namespace

PrecomputeCache build_precompute_cache(const TeamGraph& team, const KernelParams& params) {
  if (params.auto_decay) {
    throw ArgumentError("precompute cache needs a fixed decay shared by all candidates");
  }
  if (team.size() < 2) throw ArgumentError("precompute cache needs a team of at least 2");
  const double c = params.decay_c;
  if (!(c >= 0.0) || !std::isfinite(c)) throw ArgumentError("decay c must be finite and >= 0");

  const auto t = static_cast<Eigen::Index>(team.size());
  const auto l = team.skills.cols();
  const Eigen::Index n2 = t * t;
  const Eigen::Index last = t - 1;
  const Eigen::MatrixXd& a1 = team.adjacency;
  const Eigen::MatrixXd ac = zero_last(a1);
  const Eigen::MatrixXd lc_skills = zero_last_row(team.skills);
  const Eigen::VectorXd lc = label_product(team.skills, lc_skills);

  const double bound = (lc.size() ? lc.maxCoeff() : 0.0) * max_row_sum(a1) * max_row_sum(ac);
  if (c * bound >= 1.0 && !params.allow_guard_violation) {
    std::ostringstream os;
    os << "convergence guard violated for (A1, Ac): c * bound = " << c * bound;
    throw NonConvergenceError(os.str());
  }

  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n2, n2);
  for (Eigen::Index a = 0; a < t; ++a) {
    for (Eigen::Index a2 = 0; a2 < t; ++a2) {
      const double w = a1(a, a2);
      if (w == 0.0) continue;
      z.block(a * t, a2 * t, t, t).noalias() -= (c * w) * (lc.segment(a * t, t).asDiagonal() * ac);
    }
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(z);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "Z is singular (rcond " << rcond << ")";
    throw NonConvergenceError(os.str());
  }

  PrecomputeCache cache;
  cache.z_inv = lu.inverse();
  cache.start = product_start(params, t);
  cache.stop = product_stop(params, t);
  cache.r_vec = lc.cwiseProduct(cache.start);
  cache.zinv_r = cache.z_inv * cache.r_vec;
  cache.b_scalar = cache.stop.dot(cache.zinv_r);
  cache.left_row = c * (cache.stop.transpose() * cache.z_inv);

  cache.zinv_slot.resize(n2, t);
  for (Eigen::Index a = 0; a < t; ++a) cache.zinv_slot.col(a) = cache.z_inv.col(a * t + last);

  // H(:, a' t + b) = sum_a Z^{-1}(:, a t + b) lc(a t + b) A1(a, a')
  cache.zinv_lc_a1.resize(n2, n2);
  Eigen::MatrixXd slab(n2, t);
  Eigen::MatrixXd mixed(n2, t);
  for (Eigen::Index b = 0; b < t; ++b) {
    for (Eigen::Index a = 0; a < t; ++a) slab.col(a) = cache.z_inv.col(a * t + b) * lc(a * t + b);
    mixed.noalias() = slab * a1;
    for (Eigen::Index a2 = 0; a2 < t; ++a2) cache.zinv_lc_a1.col(a2 * t + b) = mixed.col(a2);
  }

  // Z^{-1} P: column j t + a' is L1(a', j) Z^{-1}(:, a' t + last).
  cache.zinv_p.resize(n2, l * t);
  for (Eigen::Index j = 0; j < l; ++j) {
    for (Eigen::Index a = 0; a < t; ++a) {
      cache.zinv_p.col(j * t + a) = team.skills(a, j) * cache.zinv_slot.col(a);
    }
  }
  cache.stop_zinv_p = cache.stop.transpose() * cache.zinv_p;
  cache.stop_zinv_lc_a1 = cache.stop.transpose() * cache.zinv_lc_a1;
  cache.stop_zinv_slot = cache.stop.transpose() * cache.zinv_slot;

  cache.members = team.members;
  cache.team_adjacency = team.adjacency;
  cache.team_skills = team.skills;
  cache.decay_c = c;
  cache.lc_max = lc.size() ? lc.maxCoeff() : 0.0;
  return cache;
}

KernelValue kernel_fast_exact(const TeamGraph& team, const PrecomputeCache& cache,
                              const Eigen::VectorXd& candidate_edges,
                              const Eigen::VectorXd& candidate_skills,
                              const KernelParams& params) {
  const auto t = static_cast<Eigen::Index>(team.size());
  const auto l = team.skills.cols();
  if (cache.members != team.members || cache.team_adjacency != team.adjacency ||
      cache.team_skills != team.skills) {
    throw ContractError("precompute cache was built for a different team");
  }
  if (params.auto_decay || params.decay_c != cache.decay_c) {
    throw ContractError("precompute cache was built for a different decay");
  }
  if (product_start(params, t) != cache.start || product_stop(params, t) != cache.stop) {
    throw ContractError("precompute cache was built for different start/stop vectors");
  }
  if (candidate_edges.size() != t - 1) throw ArgumentError("candidate_edges must have t-1 entries");
  if (candidate_skills.size() != l) throw ArgumentError("candidate_skills must have l entries");

  const double c = cache.decay_c;
  const Eigen::Index last = t - 1;
  const Eigen::MatrixXd& a1 = team.adjacency;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(t);
  w.head(t - 1) = candidate_edges;
  const Eigen::VectorXd d = team.skills * candidate_skills;  // diagonal of PQ at (a, last)

  if (!params.allow_guard_violation) {
    Eigen::VectorXd rows2 = a1.rowwise().sum() - a1.col(last) + w;
    rows2(last) = w.sum();
    const double lmax = std::max(cache.lc_max, d.size() ? d.maxCoeff() : 0.0);
    const double bound = lmax * max_row_sum(a1) * rows2.maxCoeff();
    if (c * bound >= 1.0) {
      std::ostringstream os;
      os << "convergence guard violated: c * bound = " << c * bound;
      throw NonConvergenceError(os.str());
    }
  }

  const Eigen::Index lt = l * t;
  const Eigen::Index k = lt + 4 * t;
  const Eigen::Index x1_off = lt;
  const Eigen::Index x2_off = lt + 2 * t;

  // Z^{-1} X, column blocks [P | X1 | X2], with (a', k) ordered a' * 2 + k.
  Eigen::MatrixXd zx(t * t, k);
  zx.leftCols(lt) = cache.zinv_p;
  const Eigen::MatrixXd g2 = cache.zinv_slot * (d.asDiagonal() * a1);
  const double e_last_w = w(last);  // E(last, :) = [w(last), 1]
  for (Eigen::Index a = 0; a < t; ++a) {
    zx.col(x1_off + 2 * a).noalias() = cache.zinv_lc_a1.middleCols(a * t, t) * w;
    zx.col(x1_off + 2 * a + 1) = cache.zinv_lc_a1.col(a * t + last);
    zx.col(x2_off + 2 * a) = e_last_w * g2.col(a);
    zx.col(x2_off + 2 * a + 1) = g2.col(a);
  }

  // Y applied to the columns of Z^{-1} X. Ac has a zero last column, so the
  // Y1 = Q (A1 (x) Ac) rows vanish; Y2 reads V(a, last) and sum_b w(b) V(a, b).
  Eigen::MatrixXd yzx = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index a = 0; a < t; ++a) {
    const auto slab = zx.middleRows(a * t, t);
    yzx.row(lt + 2 * a) = slab.row(last);
    yzx.row(lt + 2 * a + 1).noalias() = w.transpose() * slab;
  }
  yzx.middleRows(lt + 2 * t, 2 * t) = yzx.middleRows(lt, 2 * t);

  Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(k, k);
  inner.noalias() -= c * yzx;

  // u = Z^{-1} R + r',  r' = Z^{-1} P Q x
  Eigen::VectorXd pqx(t);
  for (Eigen::Index a = 0; a < t; ++a) pqx(a) = d(a) * cache.start(a * t + last);
  const Eigen::VectorXd r_prime = cache.zinv_slot * pqx;
  const Eigen::VectorXd u = cache.zinv_r + r_prime;
  Eigen::VectorXd yu = Eigen::VectorXd::Zero(k);
  for (Eigen::Index a = 0; a < t; ++a) {
    yu(lt + 2 * a) = u(a * t + last);
    yu(lt + 2 * a + 1) = w.dot(u.segment(a * t, t));
  }
  yu.segment(lt + 2 * t, 2 * t) = yu.segment(lt, 2 * t);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(inner);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "inner update system is singular (rcond " << rcond << ")";
    throw NonConvergenceError(os.str());
  }
  const Eigen::VectorXd m_yu = lu.solve(yu);

  // y' Z^{-1} X from the cached stop rows.
  Eigen::RowVectorXd yzx_row(k);
  yzx_row.head(lt) = cache.stop_zinv_p;
  const Eigen::RowVectorXd y_g2 = cache.stop_zinv_slot * (d.asDiagonal() * a1);
  for (Eigen::Index a = 0; a < t; ++a) {
    yzx_row(x1_off + 2 * a) = cache.stop_zinv_lc_a1.segment(a * t, t).dot(w.transpose());
    yzx_row(x1_off + 2 * a + 1) = cache.stop_zinv_lc_a1(a * t + last);
    yzx_row(x2_off + 2 * a) = e_last_w * y_g2(a);
    yzx_row(x2_off + 2 * a + 1) = y_g2(a);
  }

  KernelValue out;
  out.value = cache.b_scalar + cache.stop.dot(r_prime) + c * yzx_row.dot(m_yu);
  out.method = Method::fast_exact;
  out.decay_c = c;
  out.iterations = 1;
  if (!std::isfinite(out.value)) throw NonConvergenceError("kernel value is not finite");
  return out;
}

}  // namespace teamrep
