// Serial reference loop vs the OpenMP candidate loop, per scorer.
//
//   teamrep_bench [n] [m] [t] [threads]

#include "teamrep/bench.hpp"
#include "teamrep/reference.hpp"
#include "teamrep/replacement.hpp"
#include "teamrep/synthetic.hpp"

#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <string>

using namespace teamrep;

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::stoul(argv[1]) : 2000;
  const std::size_t m = argc > 2 ? std::stoul(argv[2]) : 20000;
  const std::size_t t = argc > 3 ? std::stoul(argv[3]) : 12;
  const int threads = argc > 4 ? std::atoi(argv[4]) : omp_get_max_threads();

  SyntheticSpec spec;
  spec.n = n;
  spec.target_m = m;
  spec.l = 6;
  spec.model = AttachmentModel::preferential;
  spec.seed = 11;
  const LabeledNetwork net = generate_network(spec);
  const auto members = pick_team(net, t, 3);
  if (members.size() != t) {
    std::fprintf(stderr, "no connected team of size %zu\n", t);
    return 1;
  }
  const TeamGraph team = team_subgraph(net, members, members[1]);
  const auto cands = prune_candidates(net, members, members[1]);
  KernelParams params;
  params.auto_decay = false;
  params.decay_c = query_decay(net, team, cands, KernelParams{});
  const int r = default_rank(t);

  std::printf("%s\n", environment_note(threads).c_str());
  std::printf("n=%zu m=%zu t=%zu candidates=%zu threads=%d\n", net.n(), net.m(), t, cands.size(),
              threads);
  std::printf("%-12s %12s %12s %8s %s\n", "scorer", "serial_ms", "omp_ms", "speedup", "same");
  for (Algorithm a : {Algorithm::basic, Algorithm::fast_exact, Algorithm::fast_approx}) {
    std::vector<double> serial, par;
    const double ts = median_wall_ms(
        [&] { serial = reference::score_candidates_serial(net, team, cands, a, r, params); }, 5, 1);
    const double tp = median_wall_ms(
        [&] { par = score_candidates(net, team, cands, a, r, params, ScoringOptions{threads}); }, 5,
        1);
    std::printf("%-12s %12.3f %12.3f %8.2f %s\n", std::string(to_string(a)).c_str(), ts, tp, ts / tp,
                serial == par ? "yes" : "NO");
    if (serial != par) return 1;
  }
  return 0;
}
