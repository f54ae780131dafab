#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace teamrep {

using NodeIndex = std::size_t;
using SparseAdjacency = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct WeightedEdge {
  NodeIndex u;
  NodeIndex v;
  double weight;
};

/// The global labeled network: a sparse symmetric weighted adjacency with a
/// zero diagonal plus a dense node-by-skill weight matrix. Immutable once built.
class LabeledNetwork {
 public:
  LabeledNetwork() = default;

  /// Builds and validates a network. Duplicate undirected edges are summed.
  /// Throws ValidationError on negative weights, self loops, duplicate ids or
  /// a skills matrix of the wrong shape.
  static LabeledNetwork build(std::vector<std::string> node_ids,
                              std::span<const WeightedEdge> edges,
                              std::vector<std::string> skill_names,
                              Eigen::MatrixXd skills);

  std::size_t n() const noexcept { return node_ids_.size(); }
  /// Number of undirected edges with positive weight.
  std::size_t m() const noexcept { return edge_count_; }
  std::size_t l() const noexcept { return skill_names_.size(); }

  const std::vector<std::string>& node_ids() const noexcept { return node_ids_; }
  const std::vector<std::string>& skill_names() const noexcept { return skill_names_; }
  const SparseAdjacency& adjacency() const noexcept { return adjacency_; }
  const Eigen::MatrixXd& skills() const noexcept { return skills_; }

  const std::string& id(NodeIndex i) const { return node_ids_.at(i); }
  std::optional<NodeIndex> find(std::string_view id) const;
  /// Throws ReferenceError when the id is unknown.
  NodeIndex index_of(std::string_view id) const;

  double weight(NodeIndex i, NodeIndex j) const;
  /// Number of positive-weight neighbors (d_i).
  std::size_t degree(NodeIndex i) const;
  double weighted_degree(NodeIndex i) const;

  template <class Fn>
  void for_each_neighbor(NodeIndex i, Fn&& fn) const {
    for (SparseAdjacency::InnerIterator it(adjacency_, static_cast<Eigen::Index>(i)); it; ++it) {
      fn(static_cast<NodeIndex>(it.col()), it.value());
    }
  }

  /// All undirected edges with u < v, in row-major order.
  std::vector<WeightedEdge> edges() const;

 private:
  std::vector<std::string> node_ids_;
  std::unordered_map<std::string, NodeIndex> index_;
  SparseAdjacency adjacency_;
  std::size_t edge_count_ = 0;
  std::vector<std::string> skill_names_;
  Eigen::MatrixXd skills_;
};

/// A team's induced labeled subgraph. The replaceable slot is the last member.
struct TeamGraph {
  std::vector<NodeIndex> members;
  Eigen::MatrixXd adjacency;  // t x t
  Eigen::MatrixXd skills;     // t x l

  std::size_t size() const noexcept { return members.size(); }
};

/// Named teams, each a list of member ids in file order.
struct TeamCatalog {
  std::map<std::string, std::vector<std::string>> teams;
};

LabeledNetwork load_network(const std::filesystem::path& edges_path,
                            const std::filesystem::path& skills_path);
/// Parses in-memory text using the same grammar as load_network.
LabeledNetwork parse_network(std::string_view edges_text, std::string_view skills_text,
                             const std::string& edges_name = "<edges>",
                             const std::string& skills_name = "<skills>");

/// Writes the network in the edge/skill formats. Nodes without positive edges
/// are written as zero-weight edges so they survive a reload.
void save_network(const LabeledNetwork& net, const std::filesystem::path& edges_path,
                  const std::filesystem::path& skills_path);
std::string format_edges(const LabeledNetwork& net);
std::string format_skills(const LabeledNetwork& net);

TeamCatalog load_teams(const std::filesystem::path& teams_path, const LabeledNetwork& net);
TeamCatalog parse_teams(std::string_view text, const LabeledNetwork& net,
                        const std::string& name = "<teams>");

/// Induced subgraph on `members` in the given order. Allows t = 1; used for
/// kernel evaluation between arbitrary member lists.
TeamGraph induced_subgraph(const LabeledNetwork& net, std::span<const NodeIndex> members);

/// G(T) with the leaver moved to the last slot. Requires t >= 2.
TeamGraph team_subgraph(const LabeledNetwork& net, std::span<const NodeIndex> members,
                        NodeIndex leaver);

/// G(T_{p->q}): same ordering, candidate in the last slot.
TeamGraph replace_member(const LabeledNetwork& net, const TeamGraph& team, NodeIndex candidate);

/// Weights from `candidate` to the retained members, in team order (length t-1).
Eigen::VectorXd candidate_edge_weights(const LabeledNetwork& net, const TeamGraph& team,
                                       NodeIndex candidate);

}  // namespace teamrep
