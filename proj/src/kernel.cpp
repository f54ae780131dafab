#include "teamrep/kernel.hpp"

#include "teamrep/errors.hpp"

#include <cmath>
#include <sstream>

namespace teamrep {

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::direct: return "direct";
    case Method::series: return "series";
    case Method::fast_exact: return "fast_exact";
    case Method::fast_approx: return "fast_approx";
  }
  return "unknown";
}

Eigen::VectorXd label_product(const Eigen::MatrixXd& skills_1, const Eigen::MatrixXd& skills_2) {
  if (skills_1.cols() != skills_2.cols()) {
    throw ArgumentError("label_product: skill dimensions differ");
  }
  const Eigen::Index t1 = skills_1.rows();
  const Eigen::Index t2 = skills_2.rows();
  // (L1 L2')(a, b) is the dot product of skill rows; flatten row-major.
  const Eigen::MatrixXd dots = skills_1 * skills_2.transpose();
  Eigen::VectorXd out(t1 * t2);
  for (Eigen::Index a = 0; a < t1; ++a) {
    for (Eigen::Index b = 0; b < t2; ++b) out(a * t2 + b) = dots(a, b);
  }
  return out;
}

double max_row_sum(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  return a.rowwise().sum().maxCoeff();
}

double guard_bound(const TeamGraph& g1, const TeamGraph& g2) {
  const Eigen::VectorXd lx = label_product(g1.skills, g2.skills);
  const double lmax = lx.size() == 0 ? 0.0 : lx.maxCoeff();
  return lmax * max_row_sum(g1.adjacency) * max_row_sum(g2.adjacency);
}

double auto_decay_for_bound(double bound) noexcept {
  return bound > 0.0 ? 0.9 / bound : 0.9;
}

double resolve_decay(const TeamGraph& g1, const TeamGraph& g2, const KernelParams& params) {
  if (params.auto_decay) return auto_decay_for_bound(guard_bound(g1, g2));
  if (!(params.decay_c >= 0.0) || !std::isfinite(params.decay_c)) {
    throw ArgumentError("decay c must be a finite nonnegative number");
  }
  return params.decay_c;
}

namespace {

Eigen::VectorXd per_graph(const std::optional<Eigen::VectorXd>& v, Eigen::Index t,
                          const char* name) {
  if (!v) return Eigen::VectorXd::Constant(t, 1.0 / static_cast<double>(t));
  if (v->size() != t) {
    throw ArgumentError(std::string(name) + " must have one entry per team member");
  }
  if ((v->array() < 0.0).any()) throw ArgumentError(std::string(name) + " must be nonnegative");
  return *v;
}

Eigen::VectorXd kron(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

void check_pair(const TeamGraph& g1, const TeamGraph& g2) {
  if (g1.size() != g2.size()) throw ArgumentError("kernel: graphs must have the same size t");
  if (g1.size() == 0) throw ArgumentError("kernel: empty graph");
  if (g1.skills.cols() != g2.skills.cols()) {
    throw ArgumentError("kernel: graphs must share the skill dimension l");
  }
}

std::string guard_message(double c, double bound) {
  std::ostringstream os;
  os.precision(6);
  os << "convergence guard violated: c * bound = " << c << " * " << bound << " = " << c * bound
     << " >= 1";
  return os.str();
}

}  // namespace

Eigen::VectorXd product_start(const KernelParams& params, Eigen::Index t) {
  return kron(per_graph(params.start_1, t, "start_1"), per_graph(params.start_2, t, "start_2"));
}

Eigen::VectorXd product_stop(const KernelParams& params, Eigen::Index t) {
  return kron(per_graph(params.stop_1, t, "stop_1"), per_graph(params.stop_2, t, "stop_2"));
}

KernelValue kernel_direct(const TeamGraph& g1, const TeamGraph& g2, const KernelParams& params) {
  check_pair(g1, g2);
  const auto t = static_cast<Eigen::Index>(g1.size());
  const double c = resolve_decay(g1, g2, params);
  const double bound = guard_bound(g1, g2);
  if (c * bound >= 1.0 && !params.allow_guard_violation) {
    throw NonConvergenceError(guard_message(c, bound));
  }

  const Eigen::VectorXd lx = label_product(g1.skills, g2.skills);
  const Eigen::Index n2 = t * t;
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n2, n2);
  for (Eigen::Index a = 0; a < t; ++a) {
    for (Eigen::Index a2 = 0; a2 < t; ++a2) {
      const double w = g1.adjacency(a, a2);
      if (w == 0.0) continue;
      system.block(a * t, a2 * t, t, t).noalias() -=
          (c * w) * (lx.segment(a * t, t).asDiagonal() * g2.adjacency);
    }
  }
  const Eigen::VectorXd rhs = lx.cwiseProduct(product_start(params, t));
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    std::ostringstream os;
    os << "singular kernel system (rcond " << rcond << "); guard c * bound = " << c * bound;
    throw NonConvergenceError(os.str());
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  KernelValue out;
  out.value = product_stop(params, t).dot(sol);
  out.method = Method::direct;
  out.decay_c = c;
  out.iterations = 1;
  if (!std::isfinite(out.value)) throw NonConvergenceError("kernel value is not finite");
  return out;
}

KernelValue kernel_series(const TeamGraph& g1, const TeamGraph& g2, const KernelParams& params) {
  check_pair(g1, g2);
  if (!(params.series_tol > 0.0)) throw ArgumentError("series_tol must be positive");
  if (params.series_max_iter < 1) throw ArgumentError("series_max_iter must be positive");
  const auto t = static_cast<Eigen::Index>(g1.size());
  const double c = resolve_decay(g1, g2, params);
  const double bound = guard_bound(g1, g2);
  const bool guard_ok = c * bound < 1.0;

  const Eigen::VectorXd lx = label_product(g1.skills, g2.skills);
  const Eigen::VectorXd y = product_stop(params, t);
  Eigen::VectorXd v = lx.cwiseProduct(product_start(params, t));
  Eigen::MatrixXd next(t, t);

  KernelValue out;
  out.method = Method::series;
  out.decay_c = c;
  double acc = y.dot(v);
  int iter = 1;
  bool settled = false;
  while (iter < params.series_max_iter) {
    // Column-major view: view(b, a) = v[a * t + b], so (A1 (x) A2) v is A2 view A1.
    Eigen::Map<const Eigen::MatrixXd> view(v.data(), t, t);
    next.noalias() = g2.adjacency * view * g1.adjacency;
    v = c * lx.cwiseProduct(Eigen::Map<const Eigen::VectorXd>(next.data(), t * t));
    const double term = y.dot(v);
    acc += term;
    ++iter;
    if (!std::isfinite(acc)) break;
    if (std::abs(term) <= params.series_tol * std::abs(acc)) {
      settled = true;
      break;
    }
  }
  if (params.series_max_iter == 1) settled = (c == 0.0);
  out.value = acc;
  out.iterations = iter;
  out.converged = settled && guard_ok && std::isfinite(acc);
  if (!guard_ok) {
    out.diagnostic = guard_message(c, bound);
  } else if (!out.converged) {
    out.diagnostic = "series did not settle within " + std::to_string(params.series_max_iter) +
                     " terms";
  }
  return out;
}

}  // namespace teamrep
