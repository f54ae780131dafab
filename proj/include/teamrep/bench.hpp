#pragma once

#include "teamrep/network.hpp"
#include "teamrep/replacement.hpp"

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace teamrep {

inline constexpr int kBenchSchemaVersion = 1;

struct BenchRow {
  std::string algorithm;
  std::size_t n = 0, m = 0, t = 0;
  int r = 0;  // 0 when not applicable
  double wall_ms = 0.0;
  std::size_t candidates_evaluated = 0;
  int threads = 1;
};

struct BenchReport {
  std::string scenario;
  std::vector<BenchRow> rows;
  /// Derived numbers: speedups, fitted slopes, validation flags (1/0).
  std::map<std::string, double> summary;
  std::string environment;
};

struct BenchConfig {
  int runs = 5;    // timed runs; the median is reported
  int warmup = 1;  // discarded
  int threads = 1;
  std::size_t top_k = 10;
  int rank_r = 10;
  std::uint64_t seed = 7;
};

/// Median wall time in ms of `runs` calls after `warmup` discarded calls.
double median_wall_ms(const std::function<void()>& fn, int runs, int warmup);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct BenchTeam {
  std::vector<NodeIndex> members;
  NodeIndex leaver = 0;
};

/// Basic scorer with and without pruning on each team.
BenchReport bench_pruning(const LabeledNetwork& net, const std::vector<BenchTeam>& teams,
                          const BenchConfig& config);

/// basic vs fast_exact and per-candidate refactorization vs fast_approx for
/// each team size. Teams are grown breadth-first from seeded start nodes.
BenchReport bench_team_size_sweep(const LabeledNetwork& net, const std::vector<std::size_t>& sizes,
                                  const BenchConfig& config);

/// fast_exact and fast_approx on nested edge samples of `net`, plus a
/// constant-cost and a linear-cost control. Summary carries the fitted slopes.
BenchReport bench_scalability(const LabeledNetwork& net, const std::vector<double>& fractions,
                              std::size_t team_size, const BenchConfig& config);

std::string environment_note(int threads);

/// One JSON object per line: a header, one line per row, one summary line.
std::string to_jsonl(const BenchReport& report);
/// Parses the output of to_jsonl (possibly several reports concatenated).
std::vector<BenchReport> parse_jsonl(const std::string& text);
/// Human-readable table.
void print_report(const BenchReport& report, std::ostream& os);

}  // namespace teamrep
