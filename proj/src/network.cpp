#include "teamrep/network.hpp"

#include "teamrep/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace teamrep {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ReferenceError("cannot open file", path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Splits `text` into lines, skipping blanks and '#' comments. Calls
// fn(line_number, fields) with tab-separated fields.
template <class Fn>
void for_each_record(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::vector<std::string_view> fields;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') {
      if (end == text.size()) break;
      continue;
    }
    fields.clear();
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string_view::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    fn(line_no, fields);
    if (end == text.size()) break;
  }
}

double parse_weight(std::string_view field, const std::string& file, std::size_t line) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty() || !std::isfinite(value)) {
    throw ParseError(file, line, "malformed weight '" + std::string(field) + "'");
  }
  if (value < 0.0) {
    throw ValidationError(file + ":" + std::to_string(line) + ": negative weight " +
                          std::string(field));
  }
  return value;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

LabeledNetwork LabeledNetwork::build(std::vector<std::string> node_ids,
                                     std::span<const WeightedEdge> edges,
                                     std::vector<std::string> skill_names,
                                     Eigen::MatrixXd skills) {
  LabeledNetwork net;
  const std::size_t n = node_ids.size();
  net.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!net.index_.emplace(node_ids[i], i).second) {
      throw ValidationError("duplicate node id '" + node_ids[i] + "'");
    }
  }
  if (static_cast<std::size_t>(skills.rows()) != n ||
      static_cast<std::size_t>(skills.cols()) != skill_names.size()) {
    throw ValidationError("skills matrix must be n x l");
  }
  if ((skills.array() < 0.0).any() || !skills.allFinite()) {
    throw ValidationError("skill weights must be finite and nonnegative");
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges.size() * 2);
  for (const WeightedEdge& e : edges) {
    if (e.u >= n || e.v >= n) throw ValidationError("edge endpoint out of range");
    if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
      throw ValidationError("edge weights must be finite and nonnegative");
    }
    if (e.u == e.v) {
      throw ValidationError("self loop on node '" + node_ids[e.u] + "'");
    }
    if (e.weight == 0.0) continue;
    triplets.emplace_back(static_cast<int>(e.u), static_cast<int>(e.v), e.weight);
    triplets.emplace_back(static_cast<int>(e.v), static_cast<int>(e.u), e.weight);
  }
  net.adjacency_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  // Duplicates are summed by setFromTriplets.
  net.adjacency_.setFromTriplets(triplets.begin(), triplets.end());
  net.adjacency_.makeCompressed();
  net.edge_count_ = static_cast<std::size_t>(net.adjacency_.nonZeros()) / 2;

  net.node_ids_ = std::move(node_ids);
  net.skill_names_ = std::move(skill_names);
  net.skills_ = std::move(skills);
  return net;
}

std::optional<NodeIndex> LabeledNetwork::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex LabeledNetwork::index_of(std::string_view id) const {
  if (auto idx = find(id)) return *idx;
  throw ReferenceError("unknown node", std::string(id));
}

double LabeledNetwork::weight(NodeIndex i, NodeIndex j) const {
  const auto* outer = adjacency_.outerIndexPtr();
  const auto* inner = adjacency_.innerIndexPtr();
  const auto* first = inner + outer[i];
  const auto* last = inner + outer[i + 1];
  const auto* hit = std::lower_bound(first, last, static_cast<int>(j));
  if (hit == last || *hit != static_cast<int>(j)) return 0.0;
  return adjacency_.valuePtr()[hit - inner];
}

std::size_t LabeledNetwork::degree(NodeIndex i) const {
  const auto* outer = adjacency_.outerIndexPtr();
  return static_cast<std::size_t>(outer[i + 1] - outer[i]);
}

double LabeledNetwork::weighted_degree(NodeIndex i) const {
  double sum = 0.0;
  for_each_neighbor(i, [&](NodeIndex, double w) { sum += w; });
  return sum;
}

std::vector<WeightedEdge> LabeledNetwork::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(edge_count_);
  for (NodeIndex i = 0; i < n(); ++i) {
    for_each_neighbor(i, [&](NodeIndex j, double w) {
      if (i < j) out.push_back({i, j, w});
    });
  }
  return out;
}

LabeledNetwork parse_network(std::string_view edges_text, std::string_view skills_text,
                             const std::string& edges_name, const std::string& skills_name) {
  std::vector<std::string> ids;
  std::unordered_map<std::string, NodeIndex> index;
  auto intern = [&](std::string_view id) {
    auto [it, inserted] = index.emplace(std::string(id), ids.size());
    if (inserted) ids.emplace_back(id);
    return it->second;
  };

  std::vector<WeightedEdge> edges;
  for_each_record(edges_text, [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 3 || f[0].empty() || f[1].empty()) {
      throw ParseError(edges_name, line, "expected 'src<TAB>dst<TAB>weight'");
    }
    const double w = parse_weight(f[2], edges_name, line);
    if (f[0] == f[1]) {
      throw ValidationError(edges_name + ":" + std::to_string(line) + ": self loop on '" +
                            std::string(f[0]) + "'");
    }
    const NodeIndex u = intern(f[0]);
    const NodeIndex v = intern(f[1]);
    edges.push_back({u, v, w});
  });

  std::vector<std::string> skill_names;
  std::unordered_map<std::string, std::size_t> skill_index;
  struct Entry {
    NodeIndex node;
    std::size_t skill;
    double weight;
  };
  std::vector<Entry> entries;
  std::vector<bool> has_row(ids.size(), false);
  for_each_record(skills_text, [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 3 || f[0].empty() || f[1].empty()) {
      throw ParseError(skills_name, line, "expected 'node<TAB>skill<TAB>weight'");
    }
    const double w = parse_weight(f[2], skills_name, line);
    auto it = index.find(std::string(f[0]));
    if (it == index.end()) {
      throw ReferenceError(skills_name + ":" + std::to_string(line) + ": unknown node",
                           std::string(f[0]));
    }
    auto [sit, inserted] = skill_index.emplace(std::string(f[1]), skill_names.size());
    if (inserted) skill_names.emplace_back(f[1]);
    has_row[it->second] = true;
    entries.push_back({it->second, sit->second, w});
  });

  for (NodeIndex i = 0; i < ids.size(); ++i) {
    if (!has_row[i]) {
      throw ValidationError("every node needs >=1 skill row or an explicit zero row (missing '" +
                            ids[i] + "')");
    }
  }

  Eigen::MatrixXd skills = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ids.size()),
                                                 static_cast<Eigen::Index>(skill_names.size()));
  for (const Entry& e : entries) {
    skills(static_cast<Eigen::Index>(e.node), static_cast<Eigen::Index>(e.skill)) += e.weight;
  }
  return LabeledNetwork::build(std::move(ids), edges, std::move(skill_names), std::move(skills));
}

LabeledNetwork load_network(const std::filesystem::path& edges_path,
                            const std::filesystem::path& skills_path) {
  const std::string edges = read_file(edges_path);
  const std::string skills = read_file(skills_path);
  return parse_network(edges, skills, edges_path.string(), skills_path.string());
}

std::string format_edges(const LabeledNetwork& net) {
  // Edges ordered by their larger endpoint so that a reload sees the nodes in
  // index order. A node with no lower neighbor is introduced by a zero-weight
  // edge to node 0.
  std::vector<std::vector<WeightedEdge>> by_high(net.n());
  for (const WeightedEdge& e : net.edges()) by_high[e.v].push_back(e);
  std::string out;
  for (NodeIndex v = 1; v < net.n(); ++v) {
    if (by_high[v].empty()) out += net.id(0) + '\t' + net.id(v) + "\t0\n";
    for (const WeightedEdge& e : by_high[v]) {
      out += net.id(e.u) + '\t' + net.id(e.v) + '\t' + format_double(e.weight) + '\n';
    }
  }
  return out;
}

std::string format_skills(const LabeledNetwork& net) {
  std::string out;
  // zero rows up front pin the skill order
  for (const std::string& name : net.skill_names()) {
    if (net.n() > 0) out += net.id(0) + '\t' + name + "\t0\n";
  }
  const Eigen::MatrixXd& s = net.skills();
  for (NodeIndex i = 0; i < net.n(); ++i) {
    bool any = false;
    for (Eigen::Index k = 0; k < s.cols(); ++k) {
      const double w = s(static_cast<Eigen::Index>(i), k);
      if (w == 0.0) continue;
      out += net.id(i) + '\t' + net.skill_names()[static_cast<std::size_t>(k)] + '\t' +
             format_double(w) + '\n';
      any = true;
    }
    if (!any && net.l() > 0) {
      out += net.id(i) + '\t' + net.skill_names().front() + "\t0\n";
    }
  }
  return out;
}

void save_network(const LabeledNetwork& net, const std::filesystem::path& edges_path,
                  const std::filesystem::path& skills_path) {
  std::ofstream(edges_path, std::ios::binary) << format_edges(net);
  std::ofstream(skills_path, std::ios::binary) << format_skills(net);
}

TeamCatalog parse_teams(std::string_view text, const LabeledNetwork& net,
                        const std::string& name) {
  TeamCatalog catalog;
  for_each_record(text, [&](std::size_t line, const std::vector<std::string_view>& f) {
    if (f.size() != 2 || f[0].empty() || f[1].empty()) {
      throw ParseError(name, line, "expected 'team_id<TAB>member1,member2,...'");
    }
    std::vector<std::string> members;
    std::size_t start = 0;
    while (start <= f[1].size()) {
      const std::size_t comma = std::min(f[1].find(',', start), f[1].size());
      std::string_view member = f[1].substr(start, comma - start);
      if (member.empty()) throw ParseError(name, line, "empty member id");
      if (!net.find(member)) {
        throw ReferenceError(name + ":" + std::to_string(line) + ": unknown team member",
                             std::string(member));
      }
      members.emplace_back(member);
      start = comma + 1;
    }
    catalog.teams[std::string(f[0])] = std::move(members);
  });
  return catalog;
}

TeamCatalog load_teams(const std::filesystem::path& teams_path, const LabeledNetwork& net) {
  return parse_teams(read_file(teams_path), net, teams_path.string());
}

TeamGraph induced_subgraph(const LabeledNetwork& net, std::span<const NodeIndex> members) {
  const auto t = static_cast<Eigen::Index>(members.size());
  if (t == 0) throw ArgumentError("empty member list");
  std::unordered_set<NodeIndex> unique;
  for (NodeIndex m : members) {
    if (m >= net.n()) throw ArgumentError("member index out of range");
    if (!unique.insert(m).second) {
      throw ArgumentError("duplicate team member '" + net.id(m) + "'");
    }
  }
  TeamGraph g;
  g.members.assign(members.begin(), members.end());
  g.adjacency = Eigen::MatrixXd::Zero(t, t);
  for (Eigen::Index a = 0; a < t; ++a) {
    for (Eigen::Index b = a + 1; b < t; ++b) {
      const double w = net.weight(members[static_cast<std::size_t>(a)],
                                  members[static_cast<std::size_t>(b)]);
      g.adjacency(a, b) = w;
      g.adjacency(b, a) = w;
    }
  }
  g.skills.resize(t, static_cast<Eigen::Index>(net.l()));
  for (Eigen::Index a = 0; a < t; ++a) {
    g.skills.row(a) = net.skills().row(static_cast<Eigen::Index>(members[static_cast<std::size_t>(a)]));
  }
  return g;
}

TeamGraph team_subgraph(const LabeledNetwork& net, std::span<const NodeIndex> members,
                        NodeIndex leaver) {
  if (members.size() < 2) throw ArgumentError("a team needs at least 2 members");
  auto it = std::find(members.begin(), members.end(), leaver);
  if (it == members.end()) throw ArgumentError("leaver is not a team member");
  std::vector<NodeIndex> ordered;
  ordered.reserve(members.size());
  for (NodeIndex m : members) {
    if (m != leaver) ordered.push_back(m);
  }
  ordered.push_back(leaver);
  return induced_subgraph(net, ordered);
}

Eigen::VectorXd candidate_edge_weights(const LabeledNetwork& net, const TeamGraph& team,
                                       NodeIndex candidate) {
  const std::size_t retained = team.size() - 1;
  Eigen::VectorXd w(static_cast<Eigen::Index>(retained));
  for (std::size_t a = 0; a < retained; ++a) {
    w(static_cast<Eigen::Index>(a)) = net.weight(candidate, team.members[a]);
  }
  return w;
}

TeamGraph replace_member(const LabeledNetwork& net, const TeamGraph& team, NodeIndex candidate) {
  if (candidate >= net.n()) throw ArgumentError("candidate index out of range");
  if (std::find(team.members.begin(), team.members.end(), candidate) != team.members.end()) {
    throw ArgumentError("candidate '" + net.id(candidate) + "' is already in the team");
  }
  const auto t = static_cast<Eigen::Index>(team.size());
  TeamGraph g = team;
  g.members.back() = candidate;
  const Eigen::VectorXd w = candidate_edge_weights(net, team, candidate);
  g.adjacency.row(t - 1).head(t - 1) = w.transpose();
  g.adjacency.col(t - 1).head(t - 1) = w;
  g.adjacency(t - 1, t - 1) = 0.0;
  g.skills.row(t - 1) = net.skills().row(static_cast<Eigen::Index>(candidate));
  return g;
}

}  // namespace teamrep
