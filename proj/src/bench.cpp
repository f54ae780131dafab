#include "teamrep/bench.hpp"

#include "teamrep/errors.hpp"
#include "teamrep/reference.hpp"
#include "teamrep/synthetic.hpp"

#include "json.hpp"

#include <Eigen/Core>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

namespace teamrep {

using json = nlohmann::json;

double median_wall_ms(const std::function<void()>& fn, int runs, int warmup) {
  if (runs < 1) throw ArgumentError("need at least one timed run");
  for (int i = 0; i < warmup; ++i) fn();
  std::vector<double> ms;
  ms.reserve(static_cast<std::size_t>(runs));
  for (int i = 0; i < runs; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::sort(ms.begin(), ms.end());
  const std::size_t mid = ms.size() / 2;
  return ms.size() % 2 ? ms[mid] : 0.5 * (ms[mid - 1] + ms[mid]);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ArgumentError("slope fit needs >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ArgumentError("slope fit needs positive values");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw ArgumentError("slope fit needs distinct x values");
  return sxy / sxx;
}

std::string environment_note(int threads) {
  std::ostringstream os;
  os << "compiler=";
#if defined(__clang__)
  os << "clang-" << __clang_major__ << "." << __clang_minor__;
#elif defined(__GNUC__)
  os << "gcc-" << __GNUC__ << "." << __GNUC_MINOR__;
#else
  os << "unknown";
#endif
  os << " eigen=" << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "."
     << EIGEN_MINOR_VERSION;
#ifdef NDEBUG
  os << " build=release";
#else
  os << " build=debug";
#endif
  os << " hw_threads=" << std::thread::hardware_concurrency() << " omp_max=" << omp_get_max_threads()
     << " threads=" << threads;
  return os.str();
}

namespace {

ReplacementQuery make_query(const BenchTeam& team, Algorithm algorithm, const BenchConfig& config,
                            std::optional<int> rank_r = std::nullopt, bool prune = true) {
  ReplacementQuery q;
  q.team_members = team.members;
  q.leaver = team.leaver;
  q.top_k = config.top_k;
  q.algorithm = algorithm;
  q.rank_r = rank_r;
  q.prune = prune;
  return q;
}

std::vector<NodeIndex> ids_of(const RecommendResult& r) {
  std::vector<NodeIndex> out;
  for (const auto& item : r.items) out.push_back(item.candidate);
  return out;
}

bool same_ranking(const RecommendResult& a, const RecommendResult& b, double rel_tol) {
  if (ids_of(a) != ids_of(b)) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i) {
    const double x = a.items[i].score, y = b.items[i].score;
    if (std::abs(x - y) > rel_tol * std::max(std::abs(x), std::abs(y))) return false;
  }
  return true;
}

// The approximate baseline run end to end: same pruning, decay and ranking as
// recommend(), but each candidate refactorizes both team graphs.
RecommendResult recommend_refactor(const LabeledNetwork& net, const ReplacementQuery& query,
                                   const ScoringOptions& options) {
  const TeamGraph team = query_team(net, query);
  const auto candidates = prune_candidates(net, query.team_members, query.leaver);
  RecommendResult result;
  result.decay_c = query_decay(net, team, candidates, query.params);
  result.candidates_evaluated = candidates.size();
  result.rank_r = query.rank_r;
  if (candidates.empty()) {
    result.status = RecommendStatus::no_candidates;
    return result;
  }
  KernelParams params = query.params;
  params.auto_decay = false;
  params.decay_c = result.decay_c;
  const auto scores = reference::score_candidates_refactor(net, team, candidates,
                                                           query.rank_r.value_or(1), params, options);
  result.items = rank_candidates(candidates, scores, query.top_k, Algorithm::fast_approx);
  return result;
}

double median_relative_error(const std::vector<double>& approx, const std::vector<double>& exact) {
  std::vector<double> err;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double scale = std::abs(exact[i]);
    err.push_back(scale > 0 ? std::abs(approx[i] - exact[i]) / scale : std::abs(approx[i]));
  }
  if (err.empty()) return 0.0;
  std::nth_element(err.begin(), err.begin() + static_cast<std::ptrdiff_t>(err.size() / 2), err.end());
  return err[err.size() / 2];
}

BenchRow row(std::string algorithm, const LabeledNetwork& net, std::size_t t, int r, double ms,
             std::size_t candidates, int threads) {
  return {std::move(algorithm), net.n(), net.m(), t, r, ms, candidates, threads};
}

}  // namespace

BenchReport bench_pruning(const LabeledNetwork& net, const std::vector<BenchTeam>& teams,
                          const BenchConfig& config) {
  BenchReport report;
  report.scenario = "pruning";
  report.environment = environment_note(config.threads);
  const ScoringOptions options{config.threads};
  double agree = 1.0, count_ok = 1.0;
  double ratio_sum = 0.0;
  std::size_t ratio_count = 0;
  for (const BenchTeam& team : teams) {
    auto pruned_q = make_query(team, Algorithm::basic, config, std::nullopt, true);
    auto full_q = make_query(team, Algorithm::basic, config, std::nullopt, false);
    // One decay for both runs, safe for every outside node, so the two
    // rankings are comparable.
    const TeamGraph g = query_team(net, pruned_q);
    const auto outside = all_outside_candidates(net, team.members);
    const double c = query_decay(net, g, outside, pruned_q.params);
    for (ReplacementQuery* q : {&pruned_q, &full_q}) {
      q->params.auto_decay = false;
      q->params.decay_c = c;
    }
    // validation pass, outside the timed region
    const RecommendResult pruned = recommend(net, pruned_q, options);
    const RecommendResult full = recommend(net, full_q, options);
    if (ids_of(pruned) != ids_of(full)) agree = 0.0;

    std::vector<char> in_union(net.n(), 0);
    std::size_t oracle = 0;
    for (NodeIndex m : team.members) {
      if (m == team.leaver) continue;
      net.for_each_neighbor(m, [&](NodeIndex j, double w) {
        if (w > 0 && !in_union[j] &&
            std::find(team.members.begin(), team.members.end(), j) == team.members.end()) {
          in_union[j] = 1;
          ++oracle;
        }
      });
    }
    if (pruned.candidates_evaluated != oracle) count_ok = 0.0;

    const double t_pruned = median_wall_ms([&] { recommend(net, pruned_q, options); },
                                           config.runs, config.warmup);
    const double t_full = median_wall_ms([&] { recommend(net, full_q, options); },
                                         config.runs, config.warmup);
    const std::size_t t = team.members.size();
    report.rows.push_back(row("basic_pruned", net, t, 0, t_pruned, pruned.candidates_evaluated,
                              config.threads));
    report.rows.push_back(row("basic_unpruned", net, t, 0, t_full, full.candidates_evaluated,
                              config.threads));
    if (pruned.candidates_evaluated > 0) {
      ratio_sum += static_cast<double>(full.candidates_evaluated) /
                   static_cast<double>(pruned.candidates_evaluated);
      ++ratio_count;
    }
  }
  report.summary["topk_agree_pruned_vs_unpruned"] = agree;
  report.summary["candidate_count_matches_union"] = count_ok;
  if (ratio_count) report.summary["mean_candidate_ratio"] = ratio_sum / static_cast<double>(ratio_count);
  double pruned_ms = 0, full_ms = 0;
  for (const auto& r : report.rows) (r.algorithm == "basic_pruned" ? pruned_ms : full_ms) += r.wall_ms;
  if (pruned_ms > 0) report.summary["time_ratio_unpruned_over_pruned"] = full_ms / pruned_ms;
  return report;
}

BenchReport bench_team_size_sweep(const LabeledNetwork& net, const std::vector<std::size_t>& sizes,
                                  const BenchConfig& config) {
  BenchReport report;
  report.scenario = "team_size_sweep";
  report.environment = environment_note(config.threads);
  const ScoringOptions options{config.threads};
  for (std::size_t t : sizes) {
    const auto members = pick_team(net, t, config.seed + t);
    if (members.size() != t) throw ArgumentError("no connected team of size " + std::to_string(t));
    const BenchTeam team{members, members[1]};
    const int r = std::min<int>(config.rank_r, static_cast<int>(t));
    const auto basic_q = make_query(team, Algorithm::basic, config);
    const auto exact_q = make_query(team, Algorithm::fast_exact, config);
    const auto approx_q = make_query(team, Algorithm::fast_approx, config, r);
    const std::string key = "t" + std::to_string(t) + ".";

    // validation pass
    const RecommendResult basic = recommend(net, basic_q, options);
    const RecommendResult exact = recommend(net, exact_q, options);
    report.summary[key + "exact_matches_basic"] = same_ranking(basic, exact, 1e-8) ? 1.0 : 0.0;
    {
      const TeamGraph g = query_team(net, basic_q);
      const auto cands = prune_candidates(net, team.members, team.leaver);
      KernelParams params;
      params.auto_decay = false;
      params.decay_c = basic.decay_c;
      const auto direct = score_candidates(net, g, cands, Algorithm::basic, 0, params, options);
      const auto approx = score_candidates(net, g, cands, Algorithm::fast_approx, r, params, options);
      const auto refactor = reference::score_candidates_refactor(net, g, cands, r, params, options);
      report.summary[key + "approx_median_rel_err"] = median_relative_error(approx, direct);
      report.summary[key + "refactor_median_rel_err"] = median_relative_error(refactor, direct);
    }

    const double t_basic =
        median_wall_ms([&] { recommend(net, basic_q, options); }, config.runs, config.warmup);
    const double t_exact =
        median_wall_ms([&] { recommend(net, exact_q, options); }, config.runs, config.warmup);
    const double t_refactor = median_wall_ms([&] { recommend_refactor(net, approx_q, options); },
                                             config.runs, config.warmup);
    const double t_approx =
        median_wall_ms([&] { recommend(net, approx_q, options); }, config.runs, config.warmup);
    const std::size_t cands = basic.candidates_evaluated;
    report.rows.push_back(row("basic", net, t, 0, t_basic, cands, config.threads));
    report.rows.push_back(row("fast_exact", net, t, 0, t_exact, cands, config.threads));
    report.rows.push_back(row("refactor_lowrank", net, t, r, t_refactor, cands, config.threads));
    report.rows.push_back(row("fast_approx", net, t, r, t_approx, cands, config.threads));
    report.summary[key + "speedup_exact_vs_basic"] = t_basic / t_exact;
    report.summary[key + "speedup_approx_vs_refactor"] = t_refactor / t_approx;
  }
  return report;
}

BenchReport bench_scalability(const LabeledNetwork& net, const std::vector<double>& fractions,
                              std::size_t team_size, const BenchConfig& config) {
  if (fractions.size() < 2) throw ArgumentError("scalability needs >= 2 edge fractions");
  BenchReport report;
  report.scenario = "scalability";
  report.environment = environment_note(config.threads);
  const ScoringOptions options{config.threads};

  std::vector<double> sorted = fractions;
  std::sort(sorted.begin(), sorted.end());
  std::vector<LabeledNetwork> samples;
  for (double f : sorted) {
    if (!(f > 0.0 && f <= 1.0)) throw ArgumentError("edge fractions must lie in (0, 1]");
    const auto count = static_cast<std::size_t>(std::llround(f * static_cast<double>(net.m())));
    samples.push_back(edge_sample(net, count, config.seed));
  }
  // Samples are nested, so a team connected in the smallest one stays
  // connected in all of them.
  const auto members = pick_team(samples.front(), team_size, config.seed);
  if (members.size() != team_size) throw ArgumentError("no connected team in the smallest sample");
  const BenchTeam team{members, members[1]};
  const int r = std::min<int>(config.rank_r, static_cast<int>(team_size));

  // Four workloads per sample: the two scorers and the two controls.
  const Eigen::MatrixXd fixed = Eigen::MatrixXd::Random(160, 160);
  volatile double sink = 0.0;
  std::vector<std::vector<WeightedEdge>> edge_lists;
  for (const LabeledNetwork& sample : samples) edge_lists.push_back(sample.edges());
  const auto exact_q = make_query(team, Algorithm::fast_exact, config);
  const auto approx_q = make_query(team, Algorithm::fast_approx, config, r);
  auto workload = [&](std::size_t s, int kind) {
    switch (kind) {
      case 0: recommend(samples[s], exact_q, options); break;
      case 1: recommend(samples[s], approx_q, options); break;
      case 2: {
        Eigen::MatrixXd prod = fixed * fixed;
        sink = sink + prod(0, 0);
        break;
      }
      default: {
        double acc = 0.0;
        for (int rep = 0; rep < 64; ++rep) {
          for (const auto& e : edge_lists[s]) acc += e.weight * static_cast<double>(e.u ^ e.v ^ rep);
        }
        sink = sink + acc;
      }
    }
  };
  // Runs are interleaved across samples so that drift in machine speed hits
  // every sample alike instead of bending the fitted slope.
  std::vector<std::vector<std::vector<double>>> ms(
      samples.size(), std::vector<std::vector<double>>(4));
  for (int run = -config.warmup; run < config.runs; ++run) {
    for (std::size_t s = 0; s < samples.size(); ++s) {
      for (int kind = 0; kind < 4; ++kind) {
        const double t = median_wall_ms([&] { workload(s, kind); }, 1, 0);
        if (run >= 0) ms[s][static_cast<std::size_t>(kind)].push_back(t);
      }
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  };

  std::vector<double> ms_m, exact_ms, approx_ms, const_ms, linear_ms;
  const std::size_t t = team.members.size();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const LabeledNetwork& sample = samples[s];
    const RecommendResult probe = recommend(sample, exact_q, options);
    const double te = median(ms[s][0]), ta = median(ms[s][1]);
    const double tc = median(ms[s][2]), tl = median(ms[s][3]);
    report.rows.push_back(row("fast_exact", sample, t, 0, te, probe.candidates_evaluated, config.threads));
    report.rows.push_back(row("fast_approx", sample, t, r, ta, probe.candidates_evaluated, config.threads));
    report.rows.push_back(row("control_constant", sample, t, 0, tc, 0, 1));
    report.rows.push_back(row("control_linear", sample, t, 0, tl, 0, 1));
    ms_m.push_back(static_cast<double>(sample.m()));
    exact_ms.push_back(te);
    approx_ms.push_back(ta);
    const_ms.push_back(tc);
    linear_ms.push_back(tl);
  }
  report.summary["slope_fast_exact"] = loglog_slope(ms_m, exact_ms);
  report.summary["slope_fast_approx"] = loglog_slope(ms_m, approx_ms);
  report.summary["slope_control_constant"] = loglog_slope(ms_m, const_ms);
  report.summary["slope_control_linear"] = loglog_slope(ms_m, linear_ms);
  std::vector<double> cand;
  for (const auto& rw : report.rows) {
    if (rw.algorithm == "fast_exact") cand.push_back(static_cast<double>(std::max<std::size_t>(1, rw.candidates_evaluated)));
  }
  report.summary["slope_candidates"] = loglog_slope(ms_m, cand);
  return report;
}

std::string to_jsonl(const BenchReport& report) {
  std::string out;
  json header{{"schema", kBenchSchemaVersion},
              {"record", "header"},
              {"scenario", report.scenario},
              {"environment", report.environment}};
  out += header.dump() + "\n";
  for (const BenchRow& r : report.rows) {
    json j{{"schema", kBenchSchemaVersion},
           {"record", "row"},
           {"scenario", report.scenario},
           {"algorithm", r.algorithm},
           {"n", r.n},
           {"m", r.m},
           {"t", r.t},
           {"r", r.r},
           {"wall_ms", r.wall_ms},
           {"candidates_evaluated", r.candidates_evaluated},
           {"threads", r.threads}};
    out += j.dump() + "\n";
  }
  json summary{{"schema", kBenchSchemaVersion},
               {"record", "summary"},
               {"scenario", report.scenario},
               {"values", report.summary}};
  out += summary.dump() + "\n";
  return out;
}

std::vector<BenchReport> parse_jsonl(const std::string& text) {
  std::vector<BenchReport> reports;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("<report>", line_no, e.what());
    }
    if (!j.contains("schema") || j["schema"] != kBenchSchemaVersion) {
      throw ParseError("<report>", line_no, "unsupported schema version");
    }
    const std::string kind = j.value("record", "");
    if (kind == "header") {
      reports.push_back({j.at("scenario").get<std::string>(), {}, {}, j.value("environment", "")});
      continue;
    }
    if (reports.empty()) throw ParseError("<report>", line_no, "record before header");
    BenchReport& rep = reports.back();
    if (kind == "row") {
      BenchRow r;
      r.algorithm = j.at("algorithm").get<std::string>();
      r.n = j.at("n").get<std::size_t>();
      r.m = j.at("m").get<std::size_t>();
      r.t = j.at("t").get<std::size_t>();
      r.r = j.at("r").get<int>();
      r.wall_ms = j.at("wall_ms").get<double>();
      r.candidates_evaluated = j.at("candidates_evaluated").get<std::size_t>();
      r.threads = j.at("threads").get<int>();
      rep.rows.push_back(r);
    } else if (kind == "summary") {
      rep.summary = j.at("values").get<std::map<std::string, double>>();
    } else {
      throw ParseError("<report>", line_no, "unknown record kind '" + kind + "'");
    }
  }
  return reports;
}

void print_report(const BenchReport& report, std::ostream& os) {
  os << "scenario: " << report.scenario << "\n";
  if (!report.environment.empty()) os << "env: " << report.environment << "\n";
  os << std::left << std::setw(18) << "algorithm" << std::right << std::setw(8) << "n"
     << std::setw(9) << "m" << std::setw(5) << "t" << std::setw(5) << "r" << std::setw(12)
     << "wall_ms" << std::setw(12) << "candidates" << "\n";
  for (const BenchRow& r : report.rows) {
    os << std::left << std::setw(18) << r.algorithm << std::right << std::setw(8) << r.n
       << std::setw(9) << r.m << std::setw(5) << r.t << std::setw(5) << r.r << std::setw(12)
       << std::fixed << std::setprecision(3) << r.wall_ms << std::setw(12)
       << r.candidates_evaluated << "\n";
  }
  os.unsetf(std::ios::fixed);
  for (const auto& [k, v] : report.summary) os << "  " << k << " = " << std::setprecision(6) << v << "\n";
}

}  // namespace teamrep
