#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "adlab/graph.hpp"
#include "adlab/rng.hpp"

using namespace adlab;

namespace {

std::string write_tmp(const std::string& name, const std::string& body) {
  std::string path = "/tmp/adlab_test_" + name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("degree distribution parse, sample, mean") {
  auto D = DegreeDistribution::parse("4:0.5,3:0.5");
  CHECK(D.f == std::vector<int>{3, 4});
  CHECK(D.mean_offspring() == doctest::Approx(2.5));
  CHECK(D.sample(0.0) == 3);
  CHECK(D.sample(0.49) == 3);
  CHECK(D.sample(0.5) == 4);
  CHECK(D.sample(0.999999) == 4);
  CHECK_THROWS_AS(DegreeDistribution::parse("3:0.5,4:0.4"), Error);
  CHECK_THROWS_AS(DegreeDistribution::parse("1:1"), Error);
  CHECK_THROWS_AS(DegreeDistribution::parse("3-1"), Error);
  CHECK_THROWS_AS(DegreeDistribution::parse("x:1"), Error);
}

TEST_CASE("regular tree: degrees, parent-first neighbours, paths") {
  Network t = Network::regular_tree(3, 7);
  CHECK(t.is_tree());
  CHECK_FALSE(t.finite());
  NodeId r = t.root();
  auto nb = t.neighbors(r);
  REQUIRE(nb.size() == 3);
  for (NodeId c : nb) {
    CHECK(t.tree_parent(c) == r);
    CHECK(t.degree(c) == 3);
    auto cn = t.neighbors(c);
    CHECK(cn.front() == r);
    CHECK(cn.size() == 3);
  }
  // walk down three levels and check distance/path agreement
  NodeId a = t.neighbors(t.neighbors(nb[0])[1])[2];
  NodeId b = t.neighbors(nb[1])[1];
  CHECK(t.tree_depth(a) == 3);
  CHECK(t.distance(a, b) == 5);
  auto p = t.path(a, b);
  CHECK(p.size() == 6);
  CHECK(p.front() == a);
  CHECK(p.back() == b);
  for (std::size_t i = 1; i < p.size(); ++i) {
    auto n = t.neighbors(p[i - 1]);
    CHECK(std::find(n.begin(), n.end(), p[i]) != n.end());
  }
  CHECK(t.distance(a, a) == 0);
  CHECK_THROWS_AS(Network::regular_tree(1), Error);
}

TEST_CASE("lazy tree ids are reproducible per seed") {
  Network a = Network::regular_tree(4, 11), b = Network::regular_tree(4, 11);
  CHECK(a.neighbors(a.root()) == b.neighbors(b.root()));
  // order of exploration does not change ids
  NodeId x = a.neighbors(a.neighbors(a.root())[2])[1];
  b.neighbors(b.neighbors(b.root())[0]);
  NodeId y = b.neighbors(b.neighbors(b.root())[2])[1];
  CHECK(x == y);
}

TEST_CASE("Galton-Watson degrees follow the distribution") {
  auto D = DegreeDistribution::parse("2:0.3,3:0.7");
  Network g = Network::galton_watson(D, 5);
  std::map<int, int> count;
  std::vector<NodeId> frontier{g.root()};
  std::size_t seen = 0;
  while (seen < 20000 && !frontier.empty()) {
    std::vector<NodeId> next;
    for (NodeId v : frontier) {
      ++count[g.degree(v)];
      ++seen;
      auto nb = g.neighbors(v);
      CHECK(static_cast<int>(nb.size()) == g.degree(v));
      for (NodeId w : nb)
        if (w != g.tree_parent(v)) next.push_back(w);
    }
    frontier.swap(next);
  }
  double n = static_cast<double>(seen);
  CHECK(count.size() == 2);
  double p3 = count[3] / n;
  CHECK(std::abs(p3 - 0.7) < 5 * std::sqrt(0.21 / n));
}

TEST_CASE("grid encoding round-trips and neighbours") {
  for (std::int64_t x : {-5, -1, 0, 1, 1000000})
    for (std::int64_t y : {-7, 0, 3}) {
      NodeId v = Network::grid_encode(x, y);
      auto [a, b] = Network::grid_decode(v);
      CHECK(a == x);
      CHECK(b == y);
    }
  CHECK(Network::grid_encode(0, 0) == 0);
  Network g = Network::grid();
  NodeId o = g.root();
  auto nb = g.neighbors(o);
  REQUIRE(nb.size() == 4);
  CHECK(nb[0] == Network::grid_encode(1, 0));
  CHECK(nb[1] == Network::grid_encode(-1, 0));
  CHECK(nb[2] == Network::grid_encode(0, 1));
  CHECK(nb[3] == Network::grid_encode(0, -1));
  CHECK(Network::grid_direction(o, nb[2]) == GridDir::N);
  CHECK(Network::grid_step(o, GridDir::W) == nb[1]);
  CHECK(g.distance(Network::grid_encode(-2, 3), Network::grid_encode(4, -1)) == 10);
  CHECK(g.path(Network::grid_encode(-2, 3), Network::grid_encode(4, -1)).size() == 11);
}

TEST_CASE("explicit graphs: duplicates, self loops, cycles") {
  LoadStats st;
  Network g = Network::from_edges({{1, 2}, {2, 1}, {2, 3}, {3, 3}, {3, 4}}, &st);
  CHECK(st.duplicates == 1);
  CHECK(st.self_loops == 1);
  CHECK(st.edges == 3);
  CHECK(g.num_nodes() == 4);
  CHECK(g.is_tree());
  CHECK(g.root() == 1);
  CHECK(g.distance(1, 4) == 3);
  Network c = Network::from_edges({{1, 2}, {2, 3}, {3, 1}});
  CHECK_FALSE(c.is_tree());
  CHECK(c.degree(1) == 2);
  CHECK_FALSE(c.contains(9));
}

TEST_CASE("k-core pruning") {
  // triangle 1-2-3 with a pendant path 3-4-5 and a leaf 1-6
  Network g = Network::from_edges({{1, 2}, {2, 3}, {3, 1}, {3, 4}, {4, 5}, {1, 6}});
  Network core = g.prune_min_degree(2);
  CHECK(core.num_nodes() == 3);
  CHECK(core.num_edges() == 3);
  // one pass only drops the initially low-degree nodes; 4 survives with degree 1
  Network once = g.prune_min_degree(2, false);
  CHECK(once.num_nodes() == 4);
  CHECK(once.contains(4));
  CHECK(once.degree(4) == 1);
  CHECK_THROWS_AS(Network::regular_tree(3).prune_min_degree(2), Error);
}

TEST_CASE("edge list loader") {
  auto path = write_tmp("edges.txt", "# comment\n% other comment\n1 2\n2 3\n\n3 1\n3 3\n");
  LoadStats st;
  Network g = load_edge_list(path, &st);
  CHECK(st.lines == 4);
  CHECK(st.self_loops == 1);
  CHECK(g.num_edges() == 3);
  auto bad = write_tmp("bad.txt", "1 2\n2 x\n");
  try {
    load_edge_list(bad);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  try {
    load_edge_list("/nonexistent/adlab/edges");
    FAIL("expected io error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("synthetic power-law graph is heavy tailed and reproducible") {
  Network a = synthetic_power_law(4000, 2.5, 8, 3);
  Network b = synthetic_power_law(4000, 2.5, 8, 3);
  CHECK(a.num_edges() == b.num_edges());
  CHECK(a.nodes() == b.nodes());
  int maxdeg = 0;
  double sum = 0;
  for (NodeId v : a.nodes()) {
    maxdeg = std::max(maxdeg, a.degree(v));
    sum += a.degree(v);
  }
  double mean = sum / a.num_nodes();
  CHECK(mean > 4);
  CHECK(maxdeg > 10 * mean);
  CHECK_FALSE(a.is_tree());
}

TEST_CASE("rng helpers") {
  Rng a = trial_rng(1, 2), b = trial_rng(1, 2), c = trial_rng(1, 3);
  CHECK(a() == b());
  CHECK(a() != c());
  for (int i = 0; i < 1000; ++i) {
    double u = hash_unit(splitmix64(i));
    CHECK(u >= 0);
    CHECK(u < 1);
  }
}
