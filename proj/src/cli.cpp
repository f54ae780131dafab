#include "teamrep/cli.hpp"

#include "teamrep/bench.hpp"
#include "teamrep/errors.hpp"
#include "teamrep/json_io.hpp"
#include "teamrep/kernel.hpp"
#include "teamrep/replacement.hpp"
#include "teamrep/service.hpp"
#include "teamrep/synthetic.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace teamrep {

namespace {

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("TEAMREP_LOG");
  if (!env) return LogLevel::info;
  const std::string v(env);
  if (v == "quiet" || v == "0") return LogLevel::quiet;
  if (v == "debug" || v == "2") return LogLevel::debug;
  return LogLevel::info;
}

class Log {
 public:
  Log(std::ostream& err, LogLevel level) : err_(err), level_(level) {}
  void info(const std::string& msg) const { emit(LogLevel::info, msg); }
  void debug(const std::string& msg) const { emit(LogLevel::debug, msg); }

 private:
  void emit(LogLevel at, const std::string& msg) const {
    if (static_cast<int>(level_) >= static_cast<int>(at)) err_ << "teamrep: " << msg << "\n";
  }
  std::ostream& err_;
  LogLevel level_;
};

std::vector<std::string> split_ids(const std::string& list) {
  std::vector<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct Inputs {
  std::string network, skills, teams;
};

void add_inputs(CLI::App* cmd, Inputs& in, bool teams = true) {
  cmd->add_option("--network", in.network, "edges file (src<TAB>dst<TAB>weight)")->required();
  cmd->add_option("--skills", in.skills, "skills file (node<TAB>skill<TAB>weight)")->required();
  if (teams) cmd->add_option("--teams", in.teams, "team catalog (team_id<TAB>m1,m2,...)");
}

// Parses --decay: a nonnegative number or "auto".
void apply_decay(const std::string& decay, KernelParams& params) {
  if (decay == "auto") {
    params.auto_decay = true;
    return;
  }
  std::size_t used = 0;
  double c = 0.0;
  try {
    c = std::stod(decay, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != decay.size() || !(c >= 0.0)) {
    throw ArgumentError("--decay must be a nonnegative number or 'auto' (got '" + decay + "')");
  }
  params.auto_decay = false;
  params.decay_c = c;
}

std::vector<NodeIndex> resolve_ids(const LabeledNetwork& net, const std::vector<std::string>& ids) {
  std::vector<NodeIndex> out;
  for (const auto& id : ids) out.push_back(net.index_of(id));
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const Log log(err, log_level());
  CLI::App app{"Team member replacement by labeled random-walk graph kernels", "teamrep"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "teamrep 1.0");

  Inputs in;
  std::string format = "text";
  std::string decay = "auto";

  // ingest
  CLI::App* ingest = app.add_subcommand("ingest", "validate input files and print network stats");
  add_inputs(ingest, in);
  ingest->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  // recommend
  CLI::App* rec = app.add_subcommand("recommend", "rank replacement candidates");
  add_inputs(rec, in);
  std::string team_list, team_id, leaving, algo = "basic";
  std::size_t top_k = 10;
  int rank_r = -1, threads = 1;
  bool include_leaver = false, no_prune = false;
  auto* team_opt = rec->add_option("--team", team_list, "comma-separated member ids");
  rec->add_option("--team-id", team_id, "team id from the --teams catalog")->excludes(team_opt);
  rec->add_option("--leaving", leaving, "id of the departing member")->required();
  rec->add_option("--algo", algo)->check(
      CLI::IsMember({"basic", "exact", "approx", "fast_exact", "fast_approx"}));
  rec->add_option("--top-k", top_k)->check(CLI::PositiveNumber);
  rec->add_option("--rank-r", rank_r, "rank for --algo approx (default min(t-1, 10))")
      ->check(CLI::NonNegativeNumber);
  rec->add_option("--decay", decay, "decay c or 'auto'");
  rec->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  rec->add_option("--threads", threads, "candidate-scoring threads")->check(CLI::PositiveNumber);
  rec->add_flag("--include-leaver", include_leaver, "also score the leaver (calibration ceiling)");
  rec->add_flag("--no-prune", no_prune, "score every node outside the team");

  // kernel
  CLI::App* ker = app.add_subcommand("kernel", "kernel value between two member lists");
  add_inputs(ker, in, false);
  std::string team2_list, method = "direct";
  ker->add_option("--team", team_list, "first graph's members")->required();
  ker->add_option("--team2", team2_list, "second graph's members")->required();
  ker->add_option("--decay", decay, "decay c or 'auto'");
  ker->add_option("--method", method)->check(CLI::IsMember({"direct", "series"}));
  ker->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  // bench
  CLI::App* bench = app.add_subcommand("bench", "run a benchmark scenario or print a report");
  std::string scenario, print_path, out_path, model = "preferential", sizes = "5,10,15,20",
                                              fractions = "0.25,0.5,0.75,1";
  SyntheticSpec spec;
  spec.n = 2000;
  spec.target_m = 10000;
  spec.l = 8;
  BenchConfig bcfg;
  std::size_t team_size = 10, team_count = 3;
  bench->add_option("--scenario", scenario)->check(
      CLI::IsMember({"pruning", "sweep", "scalability"}));
  bench->add_option("--print", print_path, "print a JSONL report instead of running");
  bench->add_option("--out", out_path, "append the JSONL report to this file");
  bench->add_option("--n", spec.n);
  bench->add_option("--m", spec.target_m);
  bench->add_option("--l", spec.l)->check(CLI::PositiveNumber);
  bench->add_option("--model", model)->check(CLI::IsMember({"erdos_renyi", "preferential"}));
  bench->add_option("--seed", spec.seed);
  bench->add_option("--sizes", sizes, "team sizes for the sweep");
  bench->add_option("--fractions", fractions, "edge fractions for scalability");
  bench->add_option("--team-size", team_size)->check(CLI::Range(2, 1000));
  bench->add_option("--teams", team_count, "teams for the pruning scenario")->check(CLI::PositiveNumber);
  bench->add_option("--runs", bcfg.runs)->check(CLI::PositiveNumber);
  bench->add_option("--rank-r", bcfg.rank_r)->check(CLI::PositiveNumber);
  bench->add_option("--threads", bcfg.threads)->check(CLI::PositiveNumber);

  // serve
  CLI::App* serve = app.add_subcommand("serve", "serve the HTTP API");
  add_inputs(serve, in);
  int port = 8080;
  std::string host = "127.0.0.1";
  serve->add_option("--serve-port", port)->check(CLI::Range(0, 65535));
  serve->add_option("--host", host);
  serve->add_option("--threads", threads)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (ingest->parsed()) {
      const LabeledNetwork net = load_network(in.network, in.skills);
      const TeamCatalog catalog = in.teams.empty() ? TeamCatalog{} : load_teams(in.teams, net);
      const auto stats = stats_json(net, catalog);
      if (format == "json") {
        out << dump_body(stats);
      } else {
        out << "n " << net.n() << "\nm " << net.m() << "\nl " << net.l() << "\nteam_count "
            << catalog.teams.size() << "\n";
      }
      return kExitOk;
    }

    if (rec->parsed()) {
      const LabeledNetwork net = load_network(in.network, in.skills);
      ReplacementQuery q;
      if (!team_id.empty()) {
        if (in.teams.empty()) throw ArgumentError("--team-id needs --teams");
        const TeamCatalog catalog = load_teams(in.teams, net);
        const auto it = catalog.teams.find(team_id);
        if (it == catalog.teams.end()) throw ReferenceError("unknown team id", team_id);
        q.team_members = resolve_ids(net, it->second);
      } else if (!team_list.empty()) {
        q.team_members = resolve_ids(net, split_ids(team_list));
      } else {
        throw ArgumentError("recommend needs --team or --team-id");
      }
      q.leaver = net.index_of(leaving);
      if (std::find(q.team_members.begin(), q.team_members.end(), q.leaver) ==
          q.team_members.end()) {
        throw ArgumentError("leaving member '" + leaving + "' is not in the team");
      }
      q.algorithm = *parse_algorithm(algo);
      q.top_k = top_k;
      if (rank_r >= 0) q.rank_r = rank_r;
      q.include_leaver = include_leaver;
      q.prune = !no_prune;
      apply_decay(decay, q.params);

      const RecommendResult result = recommend(net, q, ScoringOptions{threads});
      if (q.params.auto_decay) log.info("auto decay c = " + format_double(result.decay_c));
      log.debug("candidates evaluated: " + std::to_string(result.candidates_evaluated));
      if (format == "json") {
        out << dump_body(recommendation_json(net, q, result));
      } else {
        out << "# algorithm " << to_string(result.algorithm) << ", decay "
            << format_double(result.decay_c);
        if (result.rank_r) out << ", rank_r " << *result.rank_r;
        out << ", candidates " << result.candidates_evaluated << "\n";
        if (result.status == RecommendStatus::no_candidates) out << "# no connected candidates\n";
        for (const auto& r : result.items) {
          out << r.rank << "\t" << net.id(r.candidate) << "\t" << std::setprecision(12)
              << round_significant(r.score) << "\n";
        }
      }
      return result.status == RecommendStatus::no_candidates ? kExitEmpty : kExitOk;
    }

    if (ker->parsed()) {
      const LabeledNetwork net = load_network(in.network, in.skills);
      const auto m1 = resolve_ids(net, split_ids(team_list));
      const auto m2 = resolve_ids(net, split_ids(team2_list));
      if (m1.empty() || m1.size() != m2.size()) {
        throw ArgumentError("--team and --team2 must list the same number (>= 1) of members");
      }
      KernelParams params;
      apply_decay(decay, params);
      const TeamGraph g1 = induced_subgraph(net, m1);
      const TeamGraph g2 = induced_subgraph(net, m2);
      const KernelValue v = method == "series" ? kernel_series(g1, g2, params)
                                               : kernel_direct(g1, g2, params);
      if (params.auto_decay) log.info("auto decay c = " + format_double(v.decay_c));
      if (!v.converged) log.info("not converged: " + v.diagnostic);
      if (format == "json") {
        out << dump_body({{"converged", v.converged},
                          {"decay", v.decay_c},
                          {"iterations", v.iterations},
                          {"method", std::string(to_string(v.method))},
                          {"value", v.value}});
      } else {
        out << format_double(v.value) << "\n";
      }
      return v.converged ? kExitOk : kExitNonConvergence;
    }

    if (bench->parsed()) {
      if (!print_path.empty()) {
        std::ifstream f(print_path);
        if (!f) throw ArgumentError("cannot open report '" + print_path + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        for (const auto& r : parse_jsonl(ss.str())) print_report(r, out);
        return kExitOk;
      }
      if (scenario.empty()) throw ArgumentError("bench needs --scenario or --print");
      spec.model = model == "preferential" ? AttachmentModel::preferential
                                           : AttachmentModel::erdos_renyi;
      bcfg.seed = spec.seed;
      log.info("generating n=" + std::to_string(spec.n) + " m=" + std::to_string(spec.target_m) +
               " " + model + " seed=" + std::to_string(spec.seed));
      const LabeledNetwork net = generate_network(spec);
      BenchReport report;
      if (scenario == "pruning") {
        std::vector<BenchTeam> teams;
        for (std::size_t i = 0; i < team_count; ++i) {
          const auto members = pick_team(net, team_size, spec.seed + 101 * i);
          if (members.size() == team_size) teams.push_back({members, members[1]});
        }
        report = bench_pruning(net, teams, bcfg);
      } else if (scenario == "sweep") {
        std::vector<std::size_t> ts;
        for (const auto& s : split_ids(sizes)) ts.push_back(std::stoul(s));
        report = bench_team_size_sweep(net, ts, bcfg);
      } else {
        std::vector<double> fs;
        for (const auto& s : split_ids(fractions)) fs.push_back(std::stod(s));
        report = bench_scalability(net, fs, team_size, bcfg);
      }
      const std::string lines = to_jsonl(report);
      if (!out_path.empty()) {
        std::ofstream f(out_path, std::ios::app);
        if (!f) throw ArgumentError("cannot write '" + out_path + "'");
        f << lines;
      }
      out << lines;
      return kExitOk;
    }

    if (serve->parsed()) {
      LabeledNetwork net = load_network(in.network, in.skills);
      TeamCatalog catalog = in.teams.empty() ? TeamCatalog{} : load_teams(in.teams, net);
      const ApiService service(std::move(net), std::move(catalog), ScoringOptions{threads});
      HttpFrontend http(service);
      const int bound = http.bind(host, port);
      if (bound < 0) throw ArgumentError("cannot bind " + host + ":" + std::to_string(port));
      log.info("listening on http://" + host + ":" + std::to_string(bound));
      http.listen();
      return kExitOk;
    }
  } catch (const NonConvergenceError& e) {
    err << "teamrep: non-convergence: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const Error& e) {
    err << "teamrep: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "teamrep: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace teamrep
