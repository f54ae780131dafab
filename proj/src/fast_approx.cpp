// Approximate replacement scoring from one rank-r eigendecomposition of Ac.
//
//   A1 ~ X1 Y1,  X1 = [U, E1], Y1 = [V; F1]
//   A2 ~ X2 Y2,  X2 = [U, E2], Y2 = [V; F2]
//
// and with q = r + 2,
//
//   Ker ~ sum_j (y1' L1j x1)(y2' L2j x2) + c S M T,
//   S = sum_j y1' L1j X1 (x) y2' L2j X2,   T = sum_j Y1 L1j x1 (x) Y2 L2j x2,
//   M = (I - c W)^{-1},  W = sum_j Y1 L1j X1 (x) Y2 L2j X2     (q^2 x q^2).
//
// Split G2's index into the U part (r) and the E part (2). Ac has a zero last
// row and column, so V(:, last) = 0 and V L2j U = V Lcj U: the U-by-U block
// of I - cW is the same for every candidate. Its inverse is built once, and
// each candidate only solves the 2q x 2q Schur complement.

#include "teamrep/errors.hpp"
#include "teamrep/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace teamrep {

namespace {

Eigen::VectorXd per_graph_vector(const std::optional<Eigen::VectorXd>& v, Eigen::Index t) {
  if (!v) return Eigen::VectorXd::Constant(t, 1.0 / static_cast<double>(t));
  if (v->size() != t || (v->array() < 0.0).any()) {
    throw ArgumentError("start/stop vectors must be nonnegative with one entry per member");
  }
  return *v;
}

void check_factors(const TeamGraph& team, const LowRankFactors& factors) {
  if (factors.members != team.members || factors.team_adjacency != team.adjacency) {
    throw ContractError("low-rank factors were built for a different team");
  }
}

}  // namespace

LowRankFactors build_lowrank_factors(const TeamGraph& team, int rank_r) {
  const auto t = static_cast<Eigen::Index>(team.size());
  if (t < 2) throw ArgumentError("low-rank factors need a team of at least 2");
  if (rank_r < 0 || rank_r > t) {
    throw ArgumentError("rank_r must lie in [0, t] (got " + std::to_string(rank_r) + ")");
  }
  const Eigen::Index last = t - 1;
  // Ac is the retained block padded by a zero row and column; decompose the
  // block and append e_last with eigenvalue 0. Eigenvectors then vanish
  // exactly in the last slot.
  const Eigen::MatrixXd block = team.adjacency.topLeftCorner(last, last);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(block);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "eigensolver failed on the " << last << "x" << last << " retained-member adjacency"
       << " (Frobenius norm " << block.norm() << ")";
    throw NonConvergenceError(os.str());
  }
  Eigen::VectorXd evals(t);
  Eigen::MatrixXd evecs = Eigen::MatrixXd::Zero(t, t);
  evals.head(last) = solver.eigenvalues();
  evals(last) = 0.0;
  evecs.topLeftCorner(last, last) = solver.eigenvectors();
  evecs(last, last) = 1.0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(t));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(evals(a)) > std::abs(evals(b));
  });

  LowRankFactors f;
  f.rank_r = rank_r;
  f.u.resize(t, rank_r);
  f.lambda.resize(rank_r);
  for (int i = 0; i < rank_r; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    f.u.col(i) = evecs.col(src);
    f.lambda(i) = evals(src);
  }
  double dropped = 0.0;
  for (Eigen::Index i = rank_r; i < t; ++i) {
    const double lam = evals(order[static_cast<std::size_t>(i)]);
    dropped += lam * lam;
  }
  f.truncation_error = std::sqrt(dropped);
  f.v = f.lambda.asDiagonal() * f.u.transpose();

  f.w1 = team.adjacency.col(last);
  f.w1(last) = 0.0;
  const Eigen::VectorXd s = Eigen::VectorXd::Unit(t, last);
  f.e1.resize(t, 2);
  f.e1 << f.w1, s;
  f.f1.resize(2, t);
  f.f1 << s.transpose(), f.w1.transpose();
  f.members = team.members;
  f.team_adjacency = team.adjacency;
  return f;
}

ApproxWorkspace make_approx_workspace(const TeamGraph& team, const LowRankFactors& factors,
                                      const KernelParams& params) {
  check_factors(team, factors);
  if (params.auto_decay) {
    throw ArgumentError("approximate scoring needs a fixed decay shared by all candidates");
  }
  if (!(params.decay_c >= 0.0) || !std::isfinite(params.decay_c)) {
    throw ArgumentError("decay c must be finite and >= 0");
  }
  const auto t = static_cast<Eigen::Index>(team.size());
  const auto l = team.skills.cols();
  const Eigen::Index r = factors.rank_r;
  const Eigen::Index q = r + 2;
  const double c = params.decay_c;

  ApproxWorkspace work;
  work.decay_c = c;
  work.x1.resize(t, q);
  work.x1 << factors.u, factors.e1;
  work.y1.resize(q, t);
  work.y1 << factors.v, factors.f1;
  const Eigen::VectorXd x1 = per_graph_vector(params.start_1, t);
  const Eigen::VectorXd y1 = per_graph_vector(params.stop_1, t);
  work.x2 = per_graph_vector(params.start_2, t);
  work.y2 = per_graph_vector(params.stop_2, t);

  work.lc = team.skills;
  work.lc.row(t - 1).setZero();
  work.u_last = factors.u.row(t - 1);
  work.scalar_1.resize(l);
  work.y2_lc_x2.resize(l);
  Eigen::MatrixXd a_uu = Eigen::MatrixXd::Identity(q * r, q * r);
  for (Eigen::Index j = 0; j < l; ++j) {
    const auto lj = team.skills.col(j);
    const auto lcj = work.lc.col(j);
    work.inner_1.push_back(work.y1 * lj.asDiagonal() * work.x1);
    work.left_1.push_back(y1.cwiseProduct(lj).transpose() * work.x1);
    work.right_1.push_back(work.y1 * lj.cwiseProduct(x1));
    work.scalar_1(j) = y1.dot(lj.cwiseProduct(x1));

    work.v_lc.push_back(factors.v * lcj.asDiagonal());
    work.lc_u.push_back(lcj.asDiagonal() * factors.u);
    work.v_lc_x2.push_back(work.v_lc.back() * work.x2);
    work.y2_lc_u.push_back(work.y2.cwiseProduct(lcj).transpose() * factors.u);
    work.y2_lc_x2(j) = work.y2.dot(lcj.cwiseProduct(work.x2));

    const Eigen::MatrixXd b2_uu = work.v_lc.back() * factors.u;
    const Eigen::MatrixXd& b1 = work.inner_1.back();
    for (Eigen::Index k1 = 0; k1 < q; ++k1) {
      for (Eigen::Index i1 = 0; i1 < q; ++i1) {
        if (b1(i1, k1) == 0.0) continue;
        a_uu.block(i1 * r, k1 * r, r, r).noalias() -= (c * b1(i1, k1)) * b2_uu;
      }
    }
  }
  if (r > 0) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a_uu);
    if (!(lu.rcond() > 1e-14)) {
      std::ostringstream os;
      os << "candidate-invariant block of the low-rank system is singular (rcond " << lu.rcond()
         << ")";
      throw NonConvergenceError(os.str());
    }
    work.g_uu = lu.inverse();
  }
  return work;
}

KernelValue kernel_fast_approx(const TeamGraph& team, const LowRankFactors& factors,
                               const ApproxWorkspace& work,
                               const Eigen::VectorXd& candidate_edges,
                               const Eigen::VectorXd& candidate_skills) {
  check_factors(team, factors);
  const auto t = static_cast<Eigen::Index>(team.size());
  const auto l = team.skills.cols();
  if (candidate_edges.size() != t - 1) throw ArgumentError("candidate_edges must have t-1 entries");
  if (candidate_skills.size() != l) throw ArgumentError("candidate_skills must have l entries");
  const Eigen::Index last = t - 1;
  const Eigen::Index r = factors.rank_r;
  const Eigen::Index q = r + 2;
  const Eigen::Index nu = q * r;  // U part: index i1 * r + i2
  const Eigen::Index ne = 2 * q;  // E part: index i1 * 2 + e
  const double c = work.decay_c;
  const double x2_last = work.x2(last), y2_last = work.y2(last);

  // G2's E part: X2 columns [w2, s] (e = 0, 1), Y2 rows [s'; w2'] (e = 0, 1).
  //   B2j(U, w2) = V Lcj w2      B2j(U, s) = 0
  //   B2j(s', U) = lq_j U(last,:)   B2j(w2', U) = w2' Lcj U
  //   B2j(E, E)  = [[0, lq_j], [w2' Lcj w2, 0]]
  Eigen::MatrixXd bw = Eigen::MatrixXd::Zero(nu, q);     // -B / c, w2 columns only
  Eigen::MatrixXd cm = Eigen::MatrixXd::Zero(ne, nu);    // -C / c
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(ne, ne);
  Eigen::VectorXd t_u = Eigen::VectorXd::Zero(nu), t_e = Eigen::VectorXd::Zero(ne);
  Eigen::RowVectorXd s_u = Eigen::RowVectorXd::Zero(nu), s_e = Eigen::RowVectorXd::Zero(ne);
  double base = 0.0;

  const Eigen::VectorXd w2 = candidate_edges;  // length t - 1; last slot is 0
  Eigen::VectorXd vw(r);
  Eigen::RowVectorXd wu(r), su_j(r);
  for (Eigen::Index j = 0; j < l; ++j) {
    const double lq = candidate_skills(j);
    const auto lcj = work.lc.col(j).head(last);
    const auto sj = static_cast<std::size_t>(j);
    const Eigen::MatrixXd& b1 = work.inner_1[sj];
    const Eigen::RowVectorXd& left = work.left_1[sj];
    const Eigen::VectorXd& right = work.right_1[sj];

    vw.noalias() = work.v_lc[sj].leftCols(last) * w2;
    wu.noalias() = w2.transpose() * work.lc_u[sj].topRows(last);
    const double wlw = w2.dot(lcj.cwiseProduct(w2));
    const double wlx = w2.dot(lcj.cwiseProduct(work.x2.head(last)));
    const double ylw = w2.dot(lcj.cwiseProduct(work.y2.head(last)));
    su_j = work.y2_lc_u[sj] + (lq * y2_last) * work.u_last;

    for (Eigen::Index k1 = 0; k1 < q; ++k1) {
      for (Eigen::Index i1 = 0; i1 < q; ++i1) {
        const double b = b1(i1, k1);
        if (b == 0.0) continue;
        bw.col(k1).segment(i1 * r, r) += b * vw;
        cm.row(i1 * 2).segment(k1 * r, r) += (b * lq) * work.u_last;
        cm.row(i1 * 2 + 1).segment(k1 * r, r) += b * wu;
        d(i1 * 2, k1 * 2 + 1) -= c * b * lq;
        d(i1 * 2 + 1, k1 * 2) -= c * b * wlw;
      }
    }
    for (Eigen::Index i1 = 0; i1 < q; ++i1) {
      t_u.segment(i1 * r, r) += right(i1) * work.v_lc_x2[sj];
      t_e(i1 * 2) += right(i1) * lq * x2_last;
      t_e(i1 * 2 + 1) += right(i1) * wlx;
      s_u.segment(i1 * r, r) += left(i1) * su_j;
      s_e(i1 * 2) += left(i1) * ylw;
      s_e(i1 * 2 + 1) += left(i1) * lq * y2_last;
    }
    base += work.scalar_1(j) * (work.y2_lc_x2(j) + lq * y2_last * x2_last);
  }

  // [A B; C D] [zU; zE] = [tU; tE] with A^{-1} = g_uu, B = -c bw (on the w2
  // columns of E), C = -c cm.
  Eigen::MatrixXd gb = Eigen::MatrixXd::Zero(nu, ne);  // A^{-1} B
  Eigen::VectorXd gt = Eigen::VectorXd::Zero(nu);      // A^{-1} tU
  if (r > 0) {
    const Eigen::MatrixXd gbw = -c * (work.g_uu * bw);
    for (Eigen::Index k1 = 0; k1 < q; ++k1) gb.col(k1 * 2) = gbw.col(k1);
    gt.noalias() = work.g_uu * t_u;
  }
  Eigen::MatrixXd schur = d;
  schur.noalias() += c * (cm * gb);
  const Eigen::VectorXd rhs = t_e + c * (cm * gt);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(schur);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "low-rank inner system is singular (Schur complement rcond " << rcond << ")";
    throw NonConvergenceError(os.str());
  }
  const Eigen::VectorXd z_e = lu.solve(rhs);
  const Eigen::VectorXd z_u = gt - gb * z_e;

  KernelValue out;
  out.value = base + c * (s_u.dot(z_u) + s_e.dot(z_e));
  out.method = Method::fast_approx;
  out.decay_c = c;
  out.iterations = 1;
  if (!std::isfinite(out.value)) throw NonConvergenceError("kernel value is not finite");
  return out;
}

KernelValue kernel_fast_approx(const TeamGraph& team, const LowRankFactors& factors,
                               const Eigen::VectorXd& candidate_edges,
                               const Eigen::VectorXd& candidate_skills,
                               const KernelParams& params) {
  const ApproxWorkspace work = make_approx_workspace(team, factors, params);
  return kernel_fast_approx(team, factors, work, candidate_edges, candidate_skills);
}

}  // namespace teamrep
