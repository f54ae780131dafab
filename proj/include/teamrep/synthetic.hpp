#pragma once

#include "teamrep/network.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace teamrep {

enum class AttachmentModel { erdos_renyi, preferential };

std::string_view to_string(AttachmentModel m) noexcept;

struct SyntheticSpec {
  std::size_t n = 100;
  std::size_t target_m = 300;
  AttachmentModel model = AttachmentModel::erdos_renyi;
  std::size_t l = 4;
  /// Mean number of skills per node; every node gets at least one.
  double skills_per_node = 1.5;
  std::uint64_t seed = 1;
  /// Edge weights are drawn uniformly from {1, ..., max_weight}.
  int max_weight = 3;
};

/// Deterministic for a fixed spec. Node ids "n0".."n{n-1}", skills "s0"..
/// Throws ArgumentError when target_m exceeds n(n-1)/2 or l = 0.
LabeledNetwork generate_network(const SyntheticSpec& spec);

/// Keeps the first `count` edges of a seeded shuffle of the edge list. Prefixes
/// are nested: a smaller count always yields a subgraph of a larger one.
/// Nodes and skills are unchanged.
LabeledNetwork edge_sample(const LabeledNetwork& net, std::size_t count, std::uint64_t seed);

/// A connected team of `size` members grown breadth-first from `seed_node`,
/// visiting neighbors in ascending index order. Returns fewer members when the
/// component is smaller.
std::vector<NodeIndex> bfs_team(const LabeledNetwork& net, NodeIndex seed_node, std::size_t size);

/// First seeded start node whose component yields a full team, or empty.
std::vector<NodeIndex> pick_team(const LabeledNetwork& net, std::size_t size, std::uint64_t seed);

}  // namespace teamrep
