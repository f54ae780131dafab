#include "doctest.h"

#include "teamrep/errors.hpp"
#include "teamrep/network.hpp"
#include "teamrep/synthetic.hpp"

#include <algorithm>
#include <numeric>
#include <set>

using namespace teamrep;

namespace {

// Share of the total degree held by the top 10% of nodes.
double top_decile_mass(const LabeledNetwork& net) {
  std::vector<double> deg;
  for (NodeIndex i = 0; i < net.n(); ++i) deg.push_back(static_cast<double>(net.degree(i)));
  std::sort(deg.rbegin(), deg.rend());
  const double total = std::accumulate(deg.begin(), deg.end(), 0.0);
  return std::accumulate(deg.begin(), deg.begin() + static_cast<std::ptrdiff_t>(deg.size() / 10), 0.0) /
         total;
}

}  // namespace

TEST_CASE("edgeless network") {
  SyntheticSpec spec;
  spec.n = 10;
  spec.target_m = 0;
  const LabeledNetwork net = generate_network(spec);
  CHECK(net.n() == 10);
  CHECK(net.m() == 0);
  for (Eigen::Index i = 0; i < 10; ++i) CHECK(net.skills().row(i).sum() >= 1.0);
}

TEST_CASE("the same seed gives byte-identical networks") {
  for (AttachmentModel model : {AttachmentModel::erdos_renyi, AttachmentModel::preferential}) {
    SyntheticSpec spec;
    spec.n = 300;
    spec.target_m = 1200;
    spec.model = model;
    spec.seed = 42;
    const LabeledNetwork a = generate_network(spec), b = generate_network(spec);
    CHECK(format_edges(a) == format_edges(b));
    CHECK(format_skills(a) == format_skills(b));
    CHECK(a.m() == 1200);
    spec.seed = 43;
    CHECK(format_edges(generate_network(spec)) != format_edges(a));
  }
}

TEST_CASE("weights and skills stay in range") {
  SyntheticSpec spec;
  spec.n = 200;
  spec.target_m = 800;
  spec.max_weight = 4;
  spec.l = 5;
  const LabeledNetwork net = generate_network(spec);
  std::set<double> weights;
  for (const auto& e : net.edges()) weights.insert(e.weight);
  CHECK(*weights.begin() >= 1.0);
  CHECK(*weights.rbegin() <= 4.0);
  CHECK(net.l() == 5);
  CHECK(((net.skills().array() == 0.0) || (net.skills().array() == 1.0)).all());
  CHECK(net.id(0) == "n0");
}

TEST_CASE("dense targets are reached exactly") {
  SyntheticSpec spec;
  spec.n = 20;
  spec.target_m = 190;  // complete graph
  for (AttachmentModel model : {AttachmentModel::erdos_renyi, AttachmentModel::preferential}) {
    spec.model = model;
    CHECK(generate_network(spec).m() == 190);
  }
  spec.target_m = 191;
  CHECK_THROWS_AS(generate_network(spec), ArgumentError);
  spec.target_m = 10;
  spec.l = 0;
  CHECK_THROWS_AS(generate_network(spec), ArgumentError);
}

TEST_CASE("preferential attachment has a heavier degree tail") {
  double er = 0.0, pa = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SyntheticSpec spec;
    spec.n = 1000;
    spec.target_m = 5000;
    spec.seed = seed;
    er += top_decile_mass(generate_network(spec));
    spec.model = AttachmentModel::preferential;
    pa += top_decile_mass(generate_network(spec));
  }
  MESSAGE("top-decile degree mass: erdos_renyi " << er / 10 << ", preferential " << pa / 10);
  CHECK(pa > er * 1.2);
}

TEST_CASE("edge samples are nested prefixes") {
  SyntheticSpec spec;
  spec.n = 200;
  spec.target_m = 1000;
  const LabeledNetwork net = generate_network(spec);
  const LabeledNetwork small = edge_sample(net, 250, 9), big = edge_sample(net, 750, 9);
  CHECK(small.m() == 250);
  CHECK(big.m() == 750);
  CHECK(small.n() == net.n());
  for (const auto& e : small.edges()) {
    CHECK(big.weight(e.u, e.v) == e.weight);
    CHECK(net.weight(e.u, e.v) == e.weight);
  }
  CHECK(edge_sample(net, 1000, 9).m() == 1000);
}

TEST_CASE("breadth-first teams") {
  // path 0-1-2-3 plus 1-4
  const std::vector<WeightedEdge> edges{{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {1, 4, 1}};
  const LabeledNetwork net = LabeledNetwork::build({"a", "b", "c", "d", "e"}, edges, {"s"},
                                                   Eigen::MatrixXd::Ones(5, 1));
  CHECK(bfs_team(net, 1, 3) == std::vector<NodeIndex>{1, 0, 2});
  CHECK(bfs_team(net, 0, 10).size() == 5);
  const auto team = pick_team(net, 4, 3);
  CHECK(team.size() == 4);
  SyntheticSpec spec;
  spec.n = 10;
  spec.target_m = 0;
  CHECK(pick_team(generate_network(spec), 3, 1).empty());
}
