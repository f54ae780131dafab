#include "teamrep/synthetic.hpp"

#include "teamrep/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <unordered_set>

namespace teamrep {

std::string_view to_string(AttachmentModel m) noexcept {
  return m == AttachmentModel::preferential ? "preferential" : "erdos_renyi";
}

namespace {

std::uint64_t pair_key(NodeIndex u, NodeIndex v) {
  if (u > v) std::swap(u, v);
  return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint64_t>(v);
}

std::vector<std::pair<NodeIndex, NodeIndex>> erdos_renyi_pairs(std::size_t n, std::size_t m,
                                                               std::mt19937_64& rng) {
  std::vector<std::pair<NodeIndex, NodeIndex>> out;
  out.reserve(m);
  const std::size_t all = n * (n - 1) / 2;
  if (m * 3 > all) {
    // dense: enumerate and shuffle
    std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
    pairs.reserve(all);
    for (NodeIndex u = 0; u < n; ++u) {
      for (NodeIndex v = u + 1; v < n; ++v) pairs.emplace_back(u, v);
    }
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(m);
    return pairs;
  }
  std::uniform_int_distribution<NodeIndex> pick(0, n - 1);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(m * 2);
  while (out.size() < m) {
    const NodeIndex u = pick(rng), v = pick(rng);
    if (u == v || !seen.insert(pair_key(u, v)).second) continue;
    out.emplace_back(std::min(u, v), std::max(u, v));
  }
  return out;
}

// Degree-biased growth: one endpoint uniform, the other drawn from the list
// of edge endpoints (so proportional to degree) mixed with uniform picks.
std::vector<std::pair<NodeIndex, NodeIndex>> preferential_pairs(std::size_t n, std::size_t m,
                                                                std::mt19937_64& rng) {
  std::vector<std::pair<NodeIndex, NodeIndex>> out;
  out.reserve(m);
  std::vector<NodeIndex> endpoints;
  endpoints.reserve(2 * m);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(m * 2);
  std::uniform_int_distribution<NodeIndex> pick(0, n - 1);
  std::bernoulli_distribution uniform_mix(0.2);
  std::size_t stalls = 0;
  while (out.size() < m) {
    const NodeIndex u = pick(rng);
    NodeIndex v;
    if (endpoints.empty() || uniform_mix(rng)) {
      v = pick(rng);
    } else {
      std::uniform_int_distribution<std::size_t> at(0, endpoints.size() - 1);
      v = endpoints[at(rng)];
    }
    if (u == v || !seen.insert(pair_key(u, v)).second) {
      if (++stalls > 50 * m + 1000) break;
      continue;
    }
    out.emplace_back(std::min(u, v), std::max(u, v));
    endpoints.push_back(u);
    endpoints.push_back(v);
  }
  if (out.size() < m) {
    // near-complete targets: fill the rest uniformly from the unused pairs
    std::vector<std::pair<NodeIndex, NodeIndex>> rest;
    for (NodeIndex u = 0; u < n; ++u) {
      for (NodeIndex v = u + 1; v < n; ++v) {
        if (!seen.contains(pair_key(u, v))) rest.emplace_back(u, v);
      }
    }
    std::shuffle(rest.begin(), rest.end(), rng);
    rest.resize(m - out.size());
    out.insert(out.end(), rest.begin(), rest.end());
  }
  return out;
}

}  // namespace

LabeledNetwork generate_network(const SyntheticSpec& spec) {
  if (spec.n == 0) throw ArgumentError("synthetic network needs n >= 1");
  if (spec.l == 0) throw ArgumentError("synthetic network needs l >= 1");
  if (spec.n > (std::size_t{1} << 31)) throw ArgumentError("n too large");
  if (spec.target_m > spec.n * (spec.n - 1) / 2) {
    throw ArgumentError("target_m exceeds n(n-1)/2 = " + std::to_string(spec.n * (spec.n - 1) / 2));
  }
  if (spec.max_weight < 1) throw ArgumentError("max_weight must be >= 1");
  if (!(spec.skills_per_node >= 1.0)) throw ArgumentError("skills_per_node must be >= 1");

  std::mt19937_64 rng(spec.seed);
  const auto pairs = spec.model == AttachmentModel::preferential
                         ? preferential_pairs(spec.n, spec.target_m, rng)
                         : erdos_renyi_pairs(spec.n, spec.target_m, rng);

  std::uniform_int_distribution<int> weight(1, spec.max_weight);
  std::vector<WeightedEdge> edges;
  edges.reserve(pairs.size());
  for (const auto& [u, v] : pairs) edges.push_back({u, v, static_cast<double>(weight(rng))});

  Eigen::MatrixXd skills = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.n),
                                                 static_cast<Eigen::Index>(spec.l));
  std::poisson_distribution<int> extra(spec.skills_per_node - 1.0);
  std::vector<std::size_t> order(spec.l);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t count = std::min<std::size_t>(spec.l, 1 + static_cast<std::size_t>(extra(rng)));
    std::iota(order.begin(), order.end(), std::size_t{0});
    // partial Fisher-Yates
    for (std::size_t k = 0; k < count; ++k) {
      std::uniform_int_distribution<std::size_t> at(k, spec.l - 1);
      std::swap(order[k], order[at(rng)]);
      skills(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(order[k])) = 1.0;
    }
  }

  std::vector<std::string> ids(spec.n), skill_names(spec.l);
  for (std::size_t i = 0; i < spec.n; ++i) ids[i] = "n" + std::to_string(i);
  for (std::size_t j = 0; j < spec.l; ++j) skill_names[j] = "s" + std::to_string(j);
  return LabeledNetwork::build(std::move(ids), edges, std::move(skill_names), std::move(skills));
}

LabeledNetwork edge_sample(const LabeledNetwork& net, std::size_t count, std::uint64_t seed) {
  std::vector<WeightedEdge> edges = net.edges();
  std::mt19937_64 rng(seed);
  std::shuffle(edges.begin(), edges.end(), rng);
  edges.resize(std::min(count, edges.size()));
  return LabeledNetwork::build(net.node_ids(), edges, net.skill_names(), net.skills());
}

std::vector<NodeIndex> bfs_team(const LabeledNetwork& net, NodeIndex seed_node, std::size_t size) {
  std::vector<NodeIndex> team{seed_node};
  std::vector<char> seen(net.n(), 0);
  seen[seed_node] = 1;
  for (std::size_t head = 0; head < team.size() && team.size() < size; ++head) {
    std::vector<NodeIndex> next;
    net.for_each_neighbor(team[head], [&](NodeIndex j, double w) {
      if (w > 0.0 && !seen[j]) next.push_back(j);
    });
    std::sort(next.begin(), next.end());
    for (NodeIndex j : next) {
      if (team.size() >= size) break;
      seen[j] = 1;
      team.push_back(j);
    }
  }
  return team;
}

std::vector<NodeIndex> pick_team(const LabeledNetwork& net, std::size_t size, std::uint64_t seed) {
  if (net.n() == 0) return {};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<NodeIndex> pick(0, net.n() - 1);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    auto team = bfs_team(net, pick(rng), size);
    if (team.size() == size) return team;
  }
  return {};
}

}  // namespace teamrep
