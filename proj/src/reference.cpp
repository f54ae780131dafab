#include "teamrep/reference.hpp"

#include "teamrep/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace teamrep::reference {

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Eigen::VectorXd per_graph(const std::optional<Eigen::VectorXd>& v, Eigen::Index t) {
  return v ? *v : Eigen::VectorXd::Constant(t, 1.0 / static_cast<double>(t));
}

double inner_solve(const Eigen::MatrixXd& inner, const Eigen::RowVectorXd& left,
                   const Eigen::VectorXd& right) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(inner);
  if (!(lu.rcond() > 1e-14)) {
    std::ostringstream os;
    os << "reference inner system is singular (rcond " << lu.rcond() << ")";
    throw NonConvergenceError(os.str());
  }
  return left.dot(lu.solve(right));
}

// Rank-r eigenfactors A ~ U (Lambda U'), largest magnitudes first.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> eigen_factors(const Eigen::MatrixXd& a, int rank_r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw NonConvergenceError("eigensolver failed");
  const Eigen::VectorXd& evals = solver.eigenvalues();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(a.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return std::abs(evals(x)) > std::abs(evals(y));
  });
  Eigen::MatrixXd u(a.rows(), rank_r);
  Eigen::MatrixXd v(rank_r, a.rows());
  for (int i = 0; i < rank_r; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    u.col(i) = solver.eigenvectors().col(src);
    v.row(i) = evals(src) * solver.eigenvectors().col(src).transpose();
  }
  return {u, v};
}

}  // namespace

double kernel_fast_exact_dense(const TeamGraph& team, const Eigen::VectorXd& candidate_edges,
                               const Eigen::VectorXd& candidate_skills, const KernelParams& params) {
  if (params.auto_decay) throw ArgumentError("dense reference needs a fixed decay");
  const auto t = static_cast<Eigen::Index>(team.size());
  const auto l = team.skills.cols();
  const Eigen::Index last = t - 1;
  const double c = params.decay_c;
  const Eigen::MatrixXd& a1 = team.adjacency;

  Eigen::MatrixXd ac = a1;
  ac.row(last).setZero();
  ac.col(last).setZero();
  Eigen::MatrixXd lc_skills = team.skills;
  lc_skills.row(last).setZero();
  const Eigen::MatrixXd lcx = label_product(team.skills, lc_skills).asDiagonal();

  Eigen::VectorXd w = Eigen::VectorXd::Zero(t);
  w.head(t - 1) = candidate_edges;
  const Eigen::VectorXd s = Eigen::VectorXd::Unit(t, last);
  Eigen::MatrixXd e(t, 2), f(2, t);
  e << w, s;
  f << s.transpose(), w.transpose();

  Eigen::MatrixXd p(t * t, l * t), q(l * t, t * t);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(t, t);
  for (Eigen::Index j = 0; j < l; ++j) {
    p.middleCols(j * t, t) = kron(team.skills.col(j).asDiagonal().toDenseMatrix(), s);
    q.middleRows(j * t, t) = kron(eye, candidate_skills(j) * s.transpose());
  }

  const Eigen::MatrixXd z = Eigen::MatrixXd::Identity(t * t, t * t) - c * lcx * kron(a1, ac);
  const Eigen::MatrixXd x1 = lcx * kron(a1, e);
  const Eigen::MatrixXd x2 = p * q * kron(a1, e);
  const Eigen::MatrixXd y1 = q * kron(a1, ac);
  const Eigen::MatrixXd y2 = kron(eye, f);

  Eigen::MatrixXd x(t * t, l * t + 4 * t), y(l * t + 4 * t, t * t);
  x << p, x1, x2;
  y << y1, y2, y2;

  const Eigen::MatrixXd z_inv = z.inverse();
  const Eigen::VectorXd start = product_start(params, t);
  const Eigen::VectorXd stop = product_stop(params, t);
  const Eigen::VectorXd r = lcx * start;
  const Eigen::VectorXd r_prime = z_inv * (p * (q * start));
  const Eigen::VectorXd u = z_inv * r + r_prime;

  const Eigen::MatrixXd inner =
      Eigen::MatrixXd::Identity(x.cols(), x.cols()) - c * (y * z_inv * x);
  const Eigen::RowVectorXd left = stop.transpose() * z_inv * x;
  return stop.dot(z_inv * r) + stop.dot(r_prime) + c * inner_solve(inner, left, y * u);
}

double kernel_independent_lowrank(const TeamGraph& g1, const TeamGraph& g2, int rank_r,
                                  const KernelParams& params) {
  const auto t = static_cast<Eigen::Index>(g1.size());
  if (g2.size() != g1.size()) throw ArgumentError("graphs must have the same size");
  if (rank_r < 1 || rank_r > t) throw ArgumentError("rank_r must lie in [1, t]");
  const double c = resolve_decay(g1, g2, params);
  const auto l = g1.skills.cols();
  const Eigen::Index r = rank_r;

  const auto [u1, v1] = eigen_factors(g1.adjacency, rank_r);
  const auto [u2, v2] = eigen_factors(g2.adjacency, rank_r);
  const Eigen::VectorXd x1 = per_graph(params.start_1, t), x2 = per_graph(params.start_2, t);
  const Eigen::VectorXd y1 = per_graph(params.stop_1, t), y2 = per_graph(params.stop_2, t);

  Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(r * r, r * r);
  Eigen::RowVectorXd left = Eigen::RowVectorXd::Zero(r * r);
  Eigen::VectorXd right = Eigen::VectorXd::Zero(r * r);
  double base = 0.0;
  for (Eigen::Index j = 0; j < l; ++j) {
    const auto l1 = g1.skills.col(j);
    const auto l2 = g2.skills.col(j);
    inner -= c * kron(v1 * l1.asDiagonal() * u1, v2 * l2.asDiagonal() * u2);
    left += kron(y1.cwiseProduct(l1).transpose() * u1, y2.cwiseProduct(l2).transpose() * u2);
    right += kron(v1 * l1.cwiseProduct(x1), v2 * l2.cwiseProduct(x2));
    base += y1.dot(l1.cwiseProduct(x1)) * y2.dot(l2.cwiseProduct(x2));
  }
  return base + c * inner_solve(inner, left, right);
}

double kernel_fast_approx_full(const TeamGraph& team, const LowRankFactors& factors,
                               const ApproxWorkspace& work, const Eigen::VectorXd& candidate_edges,
                               const Eigen::VectorXd& candidate_skills) {
  // Materialize X2 = [U, w2, s], Y2 = [V; s'; w2'] and solve the whole
  // (r+2)^2 system at once.
  const auto t = static_cast<Eigen::Index>(team.size());
  const auto l = team.skills.cols();
  const Eigen::Index last = t - 1, q = factors.rank_r + 2;
  const double c = work.decay_c;
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(t);
  w2.head(last) = candidate_edges;
  const Eigen::VectorXd s = Eigen::VectorXd::Unit(t, last);
  Eigen::MatrixXd x2(t, q), y2(q, t);
  x2 << factors.u, w2, s;
  y2 << factors.v, s.transpose(), w2.transpose();
  Eigen::MatrixXd skills2 = team.skills;
  skills2.row(last) = candidate_skills.transpose();

  Eigen::MatrixXd inner = Eigen::MatrixXd::Identity(q * q, q * q);
  Eigen::RowVectorXd left = Eigen::RowVectorXd::Zero(q * q);
  Eigen::VectorXd right = Eigen::VectorXd::Zero(q * q);
  double base = 0.0;
  for (Eigen::Index j = 0; j < l; ++j) {
    const auto sj = static_cast<std::size_t>(j);
    const Eigen::VectorXd l2 = skills2.col(j);
    inner -= c * kron(work.inner_1[sj], y2 * l2.asDiagonal() * x2);
    left += kron(work.left_1[sj], work.y2.cwiseProduct(l2).transpose() * x2);
    right += kron(work.right_1[sj], y2 * l2.cwiseProduct(work.x2));
    base += work.scalar_1(j) * work.y2.dot(l2.cwiseProduct(work.x2));
  }
  return base + c * inner_solve(inner, left, right);
}

}  // namespace teamrep::reference
