// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
// Exit status is the number of failed criteria (capped at 1).

#include "instances.hpp"
#include "oracles.hpp"
#include "teamrep/bench.hpp"
#include "teamrep/cli.hpp"
#include "teamrep/kernel.hpp"
#include "teamrep/reference.hpp"
#include "teamrep/replacement.hpp"
#include "teamrep/service.hpp"
#include "teamrep/synthetic.hpp"

#include "httplib.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <thread>

using namespace teamrep;
using namespace teamrep::testing;

namespace {

constexpr int kInstances = 200;
constexpr double kExactTol = 1e-10;
constexpr double kApproxTol = 1e-8;
constexpr double kSeriesTol = 1e-12;
constexpr double kSpeedupMin = 2.0;
constexpr double kSlopeMax = 1.1;
constexpr double kEquivalenceSeconds = 30.0;
constexpr double kPerfSeconds = 300.0;

int failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
  std::printf("%s %-28s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

KernelParams fixed(double c) {
  KernelParams p;
  p.auto_decay = false;
  p.decay_c = c;
  return p;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Every outside node of an instance scored by the direct solve.
struct Scored {
  Instance inst;
  TeamGraph team;
  std::vector<NodeIndex> outside;
  std::vector<double> direct;
  double decay = 0.0;
};

Scored score_instance(std::uint64_t seed) {
  Scored s{random_instance(seed), {}, {}, {}, 0.0};
  s.team = team_subgraph(s.inst.net, s.inst.team, s.inst.leaver);
  s.outside = all_outside_candidates(s.inst.net, s.inst.team);
  s.decay = query_decay(s.inst.net, s.team, s.outside, KernelParams{});
  for (NodeIndex q : s.outside) {
    s.direct.push_back(kernel_direct(s.team, replace_member(s.inst.net, s.team, q), fixed(s.decay)).value);
  }
  return s;
}

std::vector<NodeIndex> ids(const RecommendResult& r) {
  std::vector<NodeIndex> out;
  for (const auto& item : r.items) out.push_back(item.candidate);
  return out;
}

void connect(Eigen::MatrixXd& a, Eigen::Index i, Eigen::Index j, double w) { a(i, j) = a(j, i) = w; }

// Leaver-zeroed adjacency of exact rank k: stars K_{1,2} (rank 2) and
// triangles (rank 3); the leaver touches everyone.
TeamGraph rank_k_team(int k, std::mt19937_64& rng) {
  std::vector<int> parts;
  if (k == 2) parts = {2};
  if (k == 3) parts = {3};
  if (k == 4) parts = {2, 2};
  if (k == 5) parts = {2, 3};
  const Eigen::Index t = 1 + 3 * static_cast<Eigen::Index>(parts.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(t, t);
  Eigen::Index base = 0;
  for (int p : parts) {
    if (p == 2) {
      connect(a, base, base + 1, 2.0);
      connect(a, base, base + 2, 1.0);
    } else {
      connect(a, base, base + 1, 1.0);
      connect(a, base + 1, base + 2, 1.0);
      connect(a, base, base + 2, 1.0);
    }
    base += 3;
  }
  for (Eigen::Index i = 0; i < t - 1; ++i) connect(a, i, t - 1, 1.0);
  TeamGraph g = random_team_graph(rng, static_cast<std::size_t>(t), 3);
  g.adjacency = a;
  return g;
}

TeamGraph swapped(const TeamGraph& team, const Eigen::VectorXd& w, const Eigen::VectorXd& s) {
  TeamGraph g = team;
  const Eigen::Index last = g.adjacency.rows() - 1;
  g.adjacency.row(last).setZero();
  g.adjacency.col(last).setZero();
  g.adjacency.row(last).head(last) = w.transpose();
  g.adjacency.col(last).head(last) = w;
  g.skills.row(last) = s.transpose();
  return g;
}

std::string cli_recommend(const std::vector<std::string>& extra) {
  const std::filesystem::path fx = TEAMREP_FIXTURES;
  std::vector<std::string> args{"teamrep", "recommend", "--network", (fx / "toy_edges.tsv").string(),
                                "--skills", (fx / "toy_skills.tsv").string(), "--format", "json"};
  args.insert(args.end(), extra.begin(), extra.end());
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return out.str();
}

}  // namespace

int main() {
  setenv("TEAMREP_LOG", "quiet", 1);
  std::printf("%s\n", environment_note(1).c_str());

  // ---- exhaustive direct scores shared by several checks
  const auto t_equiv = std::chrono::steady_clock::now();
  std::vector<Scored> scored;
  double worst_exact = 0.0;
  std::size_t exact_evals = 0;
  for (int s = 0; s < kInstances; ++s) {
    scored.push_back(score_instance(static_cast<std::uint64_t>(s)));
    const Scored& sc = scored.back();
    const KernelParams p = fixed(sc.decay);
    const PrecomputeCache cache = build_precompute_cache(sc.team, p);
    for (std::size_t i = 0; i < sc.outside.size(); ++i) {
      const CandidateData d = candidate_data(sc.inst.net, sc.team, sc.outside[i]);
      const double fast = kernel_fast_exact(sc.team, cache, d.edges, d.skills, p).value;
      const double oracle = oracle_kernel_solve(sc.team, oracle_swap(sc.inst.net, sc.team, sc.outside[i]), sc.decay);
      worst_exact = std::max({worst_exact, relative_difference(fast, sc.direct[i]),
                              relative_difference(fast, oracle)});
      ++exact_evals;
    }
  }
  const double equiv_s = seconds_since(t_equiv);
  report("fast_exact_vs_direct", worst_exact < kExactTol && equiv_s < kEquivalenceSeconds,
         fmt("max rel diff %.2e over %.0f candidates in %.0f instances (tol 1e-10), %.1f s (limit 30 s)",
             worst_exact, static_cast<double>(exact_evals), kInstances, equiv_s));

  // ---- basic and fast_exact rank identically
  {
    int mismatches = 0, queries = 0;
    for (const Scored& sc : scored) {
      for (std::size_t k : {std::size_t{1}, std::size_t{3}, sc.inst.net.n()}) {
        ReplacementQuery q;
        q.team_members = sc.inst.team;
        q.leaver = sc.inst.leaver;
        q.top_k = k;
        ++queries;
        if (ids(recommend_basic(sc.inst.net, q)) != ids(recommend_fast_exact(sc.inst.net, q))) ++mismatches;
      }
    }
    report("basic_exact_same_ranking", mismatches == 0,
           fmt("%.0f of %.0f ranked lists differ (k in {1, 3, all})", mismatches, queries));
  }

  // ---- pruning safety: connected candidates never lose to unconnected ones
  {
    long pairs = 0, violations = 0, dominated_pairs = 0, dominated_violations = 0;
    int instances_hit = 0, survivor_mismatch = 0;
    double worst_gap = 0.0;
    for (const Scored& sc : scored) {
      const auto survivors = prune_candidates(sc.inst.net, sc.inst.team, sc.inst.leaver);
      if (survivors != oracle_neighbor_union(sc.inst.net, sc.inst.team, sc.inst.leaver)) ++survivor_mismatch;
      bool hit = false;
      for (std::size_t i = 0; i < sc.outside.size(); ++i) {
        if (!std::binary_search(survivors.begin(), survivors.end(), sc.outside[i])) continue;
        const auto si = sc.inst.net.skills().row(static_cast<Eigen::Index>(sc.outside[i]));
        for (std::size_t j = 0; j < sc.outside.size(); ++j) {
          if (std::binary_search(survivors.begin(), survivors.end(), sc.outside[j])) continue;
          ++pairs;
          const bool lost = sc.direct[i] < sc.direct[j] * (1 - 1e-12);
          const auto sj = sc.inst.net.skills().row(static_cast<Eigen::Index>(sc.outside[j]));
          const bool dominated = (si.array() >= sj.array()).all();
          dominated_pairs += dominated;
          if (lost) {
            ++violations;
            hit = true;
            dominated_violations += dominated;
            worst_gap = std::max(worst_gap, sc.direct[j] / sc.direct[i]);
          }
        }
      }
      instances_hit += hit;
    }
    std::ostringstream os;
    os << violations << " of " << pairs << " connected/unconnected pairs inverted on " << instances_hit
       << " of " << kInstances << " instances (worst ratio " << worst_gap << "); survivor set != union on "
       << survivor_mismatch << "; with skill dominance: " << dominated_violations << " of "
       << dominated_pairs;
    report("pruning_safety", violations == 0 && survivor_mismatch == 0, os.str());
  }

  // ---- low-rank scorer exact at full rank and at the true rank
  {
    double worst_full = 0.0, worst_k = 0.0;
    for (const Scored& sc : scored) {
      const int t = static_cast<int>(sc.team.size());
      const LowRankFactors f = build_lowrank_factors(sc.team, t);
      const ApproxWorkspace work = make_approx_workspace(sc.team, f, fixed(sc.decay));
      for (std::size_t i = 0; i < sc.outside.size(); ++i) {
        const CandidateData d = candidate_data(sc.inst.net, sc.team, sc.outside[i]);
        worst_full = std::max(worst_full, relative_difference(
                                              kernel_fast_approx(sc.team, f, work, d.edges, d.skills).value,
                                              sc.direct[i]));
      }
    }
    std::mt19937_64 rng(2718);
    for (int k = 2; k <= 5; ++k) {
      const TeamGraph team = rank_k_team(k, rng);
      const auto t = static_cast<Eigen::Index>(team.size());
      const LowRankFactors f = build_lowrank_factors(team, k);
      for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd w(t - 1), s(3);
        std::uniform_int_distribution<int> d3(0, 3), b(0, 1);
        for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = d3(rng);
        for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = b(rng);
        const TeamGraph g2 = swapped(team, w, s);
        const double c = oracle_safe_decay(team, {team, g2});
        worst_k = std::max(worst_k, relative_difference(kernel_fast_approx(team, f, w, s, fixed(c)).value,
                                                        oracle_kernel_solve(team, g2, c)));
      }
    }
    report("lowrank_exact_cases", worst_full < kApproxTol && worst_k < kApproxTol,
           fmt("r = t: max rel diff %.2e; rank-k teams (k = 2..5), r = k: %.2e (tol 1e-8)", worst_full,
               worst_k));
  }

  // ---- series vs direct, and the non-convergence flag
  {
    double worst = 0.0;
    int unconverged = 0, runs = 0;
    for (const Scored& sc : scored) {
      KernelParams p = fixed(sc.decay);
      p.series_tol = kSeriesTol;
      for (std::size_t i = 0; i < sc.outside.size(); i += 3) {
        const KernelValue v = kernel_series(sc.team, replace_member(sc.inst.net, sc.team, sc.outside[i]), p);
        ++runs;
        if (!v.converged) ++unconverged;
        worst = std::max(worst, std::abs(v.value - sc.direct[i]));
      }
    }
    TeamGraph pair;
    pair.members = {0, 1};
    pair.adjacency = Eigen::MatrixXd::Zero(2, 2);
    connect(pair.adjacency, 0, 1, 1.0);
    pair.skills = Eigen::MatrixXd::Ones(2, 1);
    KernelParams bad = fixed(1.5);  // spectral radius of c Lx (A (x) A) is 1.5
    bad.series_tol = kSeriesTol;
    const KernelValue flagged = kernel_series(pair, pair, bad);
    report("series_direct_agreement", worst <= 10 * kSeriesTol && unconverged == 0 && !flagged.converged,
           fmt("max |series - direct| %.2e over %.0f runs (limit 1e-11), %.0f unconverged; guard "
               "violation flagged: %s",
               worst, runs, unconverged) + (flagged.converged ? "no" : "yes"));
  }

  // ---- monotone in candidate edge weights
  {
    long checks = 0, violations = 0;
    for (int s = 0; s < 50; ++s) {
      const Scored& sc = scored[static_cast<std::size_t>(s)];
      const auto t = static_cast<Eigen::Index>(sc.team.size());
      for (std::size_t ci = 0; ci < sc.outside.size(); ci += 2) {
        const TeamGraph base = replace_member(sc.inst.net, sc.team, sc.outside[ci]);
        for (Eigen::Index i = 0; i + 1 < t; ++i) {
          for (double delta : {0.5, 1.0, 2.0}) {
            TeamGraph up = base;
            up.adjacency(i, t - 1) += delta;
            up.adjacency(t - 1, i) += delta;
            const KernelParams p = fixed(resolve_decay(sc.team, up, KernelParams{}));
            ++checks;
            if (kernel_direct(sc.team, up, p).value < kernel_direct(sc.team, base, p).value * (1 - 1e-12)) {
              ++violations;
            }
          }
        }
      }
    }
    report("edge_weight_monotonicity", violations == 0,
           fmt("%.0f violations in %.0f perturbations (+0.5, +1, +2 over 50 instances)",
               static_cast<double>(violations), static_cast<double>(checks)));
  }

  // ---- speedups at n = 5000, m = 50000, t = 20
  SyntheticSpec big;
  big.n = 5000;
  big.target_m = 50000;
  big.l = 8;
  big.model = AttachmentModel::preferential;
  big.seed = 1;
  const LabeledNetwork net = generate_network(big);
  {
    const auto t0 = std::chrono::steady_clock::now();
    BenchConfig cfg;
    cfg.runs = 5;
    cfg.rank_r = 10;
    const BenchReport r = bench_team_size_sweep(net, {20}, cfg);
    const double secs = seconds_since(t0);
    const double exact = r.summary.at("t20.speedup_exact_vs_basic");
    const double approx = r.summary.at("t20.speedup_approx_vs_refactor");
    report("speedup_t20",
           exact >= kSpeedupMin && approx >= kSpeedupMin && r.summary.at("t20.exact_matches_basic") == 1.0 &&
               secs < kPerfSeconds,
           fmt("fast_exact/basic %.2fx, fast_approx/refactor %.2fx (need 2x each), approx median rel "
               "err %.1e, %.0f s (limit 300 s)",
               exact, approx, r.summary.at("t20.approx_median_rel_err"), secs));
  }

  // ---- runtime against m over nested edge samples, t = 15
  {
    BenchConfig cfg;
    cfg.runs = 5;
    const BenchReport r = bench_scalability(net, {0.25, 0.5, 0.75, 1.0}, 15, cfg);
    const double se = r.summary.at("slope_fast_exact"), sa = r.summary.at("slope_fast_approx");
    report("sublinear_in_edges", se < kSlopeMax && sa < kSlopeMax,
           fmt("log-log slope fast_exact %.3f, fast_approx %.3f (limit 1.1); controls: constant %.3f, "
               "linear %.3f",
               se, sa, r.summary.at("slope_control_constant"), r.summary.at("slope_control_linear")));
  }

  // ---- candidate count after pruning is the neighborhood union
  {
    int mismatches = 0, checked = 0;
    double ratio_sum = 0.0;
    int ratio_n = 0;
    auto check = [&](const LabeledNetwork& g, const std::vector<NodeIndex>& team, NodeIndex leaver) {
      ReplacementQuery q;
      q.team_members = team;
      q.leaver = leaver;
      q.algorithm = Algorithm::fast_exact;
      const RecommendResult r = recommend(g, q);
      const std::size_t expect = oracle_neighbor_union(g, team, leaver).size();
      ++checked;
      if (r.candidates_evaluated != expect) ++mismatches;
      return expect;
    };
    for (const Scored& sc : scored) check(sc.inst.net, sc.inst.team, sc.inst.leaver);
    SyntheticSpec mid;
    mid.n = 2000;
    mid.target_m = 10000;
    const LabeledNetwork g = generate_network(mid);
    for (std::uint64_t s = 1; s <= 10; ++s) {
      const auto team = pick_team(g, 10, s);
      if (team.size() != 10) continue;
      const std::size_t survivors = check(g, team, team[1]);
      ratio_sum += static_cast<double>(g.n() - 10) / static_cast<double>(std::max<std::size_t>(1, survivors));
      ++ratio_n;
    }
    report("pruning_accounting", mismatches == 0 && ratio_n > 0,
           fmt("%.0f of %.0f counts differ from the union; mean (n-t)/survivors %.1f at n=2000 m=10000 t=10",
               mismatches, checked, ratio_sum / std::max(1, ratio_n)));
  }

  // ---- CLI and HTTP bodies agree byte for byte
  {
    const std::filesystem::path fx = TEAMREP_FIXTURES;
    LabeledNetwork toy = load_network(fx / "toy_edges.tsv", fx / "toy_skills.tsv");
    TeamCatalog cat = load_teams(fx / "toy_teams.tsv", toy);
    const ApiService svc(std::move(toy), std::move(cat));
    HttpFrontend http(svc);
    const int port = http.bind("127.0.0.1", 0);
    std::thread worker([&] { http.listen(); });
    http.wait_until_ready();
    httplib::Client client("127.0.0.1", port);
    int same = 0, total = 0;
    struct Case {
      std::string team, leaving, algo;
      int top_k;
    };
    std::vector<Case> cases;
    for (const char* algo : {"basic", "exact", "approx"}) {
      for (const char* who : {"alice", "bob", "carol"}) cases.push_back({"alice,bob,carol", who, algo, 10});
    }
    cases.push_back({"alice,bob,carol", "carol", "basic", 1});
    cases.push_back({"erin,frank", "erin", "basic", 10});  // no candidates
    cases.push_back({"bob,erin", "erin", "exact", 10});
    for (const Case& c : cases) {
      std::string team_json = "[";
      std::stringstream ss(c.team);
      for (std::string id; std::getline(ss, id, ',');) team_json += (team_json.size() > 1 ? ",\"" : "\"") + id + "\"";
      team_json += "]";
      const std::string body = "{\"team\":" + team_json + ",\"leaving\":\"" + c.leaving + "\",\"algo\":\"" +
                               c.algo + "\",\"top_k\":" + std::to_string(c.top_k) + "}";
      const auto res = client.Post("/v1/recommend", body, "application/json");
      const std::string cli = cli_recommend({"--team", c.team, "--leaving", c.leaving, "--algo", c.algo,
                                             "--top-k", std::to_string(c.top_k)});
      ++total;
      if (res && res->body == cli && !cli.empty()) ++same;
    }
    http.stop();
    worker.join();
    report("cli_http_parity", same == total,
           fmt("%.0f of %.0f fixture queries byte-identical over HTTP", same, total));
  }

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
