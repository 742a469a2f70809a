#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "adlab/analysis.hpp"
#include "adlab/spread.hpp"

using namespace adlab;

namespace {

ProtocolParams adaptive(int T, AlphaPolicy a = AlphaPolicy::Exact) {
  ProtocolParams p;
  p.kind = Protocol::Adaptive;
  p.alpha = a;
  p.T = T;
  return p;
}

// every non-source node hangs off an adjacent node infected strictly earlier
void check_tree_shape(const Network& net, const Snapshot& s) {
  CHECK(s.parent[0] == -1);
  for (std::size_t i = 1; i < s.size(); ++i) {
    int par = s.parent[i];
    REQUIRE(par >= 0);
    CHECK(s.time[par] < s.time[i]);
    CHECK(s.time[i] <= s.T);
    auto nb = net.neighbors(s.node[i]);
    CHECK(std::find(nb.begin(), nb.end(), s.node[par]) != nb.end());
  }
  std::set<NodeId> uniq(s.node.begin(), s.node.end());
  CHECK(uniq.size() == s.size());
}

// ball of radius R around c in the network, counted by BFS
std::size_t ball_size(const Network& net, NodeId c, int R) {
  std::set<NodeId> seen{c};
  std::vector<NodeId> fr{c};
  for (int r = 0; r < R; ++r) {
    std::vector<NodeId> nx;
    for (NodeId v : fr)
      for (NodeId w : net.neighbors(v))
        if (seen.insert(w).second) nx.push_back(w);
    fr.swap(nx);
  }
  return seen.size();
}

}  // namespace

TEST_CASE("keep probabilities") {
  CHECK(alpha_regular(3, 2, 1) == doctest::Approx(1.0 / 3));
  CHECK(alpha_regular(2, 6, 2) == doctest::Approx(4.0 / 8));
  // direct form for small arguments
  for (int d : {3, 4, 7})
    for (int t = 2; t <= 12; t += 2)
      for (int h = 1; h <= t / 2; ++h) {
        double direct = (std::pow(d - 1.0, t / 2 - h + 1) - 1) / (std::pow(d - 1.0, t / 2 + 1) - 1);
        CHECK(alpha_regular(d, t, h) == doctest::Approx(direct).epsilon(1e-12));
      }
  double big = alpha_regular(50, 4000, 3);
  CHECK(std::isfinite(big));
  CHECK(big >= 0);
  CHECK(big <= 1);
  CHECK(alpha_regular(3, 40, 20) == doctest::Approx(1.0 / (std::pow(2.0, 21) - 1)));
  CHECK_THROWS_AS(alpha_regular(3, 3, 1), Error);
  CHECK_THROWS_AS(alpha_regular(3, 4, 3), Error);
  CHECK_THROWS_AS(alpha_regular(1, 4, 1), Error);
  CHECK(alpha_grid(2, 1) == doctest::Approx(2.0 / 6));
  CHECK(alpha_grid(8, 4) == doctest::Approx(2.0 / 12));
  CHECK_THROWS_AS(alpha_grid(4, 0), Error);
}

TEST_CASE("adaptive diffusion on a regular tree keeps a balanced ball") {
  for (int d : {2, 3, 4}) {
    for (int T = 0; T <= 9; ++T) {
      Network net = Network::regular_tree(d, 1);
      Rng rng = trial_rng(17, d * 100 + T);
      Snapshot s = spread_adaptive(net, net.root(), adaptive(T), rng);
      check_tree_shape(net, s);
      if (T == 0) {
        CHECK(s.size() == 1);
        continue;
      }
      NodeId vt = s.virtual_source();
      CHECK(vt != s.source);
      CHECK(net.distance(vt, s.source) == s.h());
      Branch b = T % 2 == 0 ? Branch::Even : (s.last_pass ? Branch::Passed : Branch::Kept);
      if (T == 1) {
        CHECK(s.size() == 2);
        continue;
      }
      CHECK(static_cast<double>(s.size()) == n_regular(d, T, b));
      if (T % 2 == 0) {
        for (std::size_t i = 0; i < s.size(); ++i) CHECK(net.distance(s.node[i], vt) <= T / 2);
        CHECK(s.size() == ball_size(net, vt, T / 2));
      }
    }
  }
}

TEST_CASE("virtual source walk moves along edges, one hop per decision") {
  Network net = Network::regular_tree(3, 2);
  Rng rng = trial_rng(3, 0);
  Snapshot s = spread_adaptive(net, net.root(), adaptive(30), rng);
  for (int t = 1; t <= 30; ++t) {
    CHECK(s.hs[t] >= s.hs[t - 1]);
    CHECK(s.hs[t] - s.hs[t - 1] <= 1);
    if (s.vs[t] != s.vs[t - 1]) CHECK(net.distance(s.vs[t], s.vs[t - 1]) == 1);
    CHECK(net.distance(s.vs[t], s.source) == s.hs[t]);
    CHECK(s.hs[t] <= (t + 1) / 2);
  }
}

TEST_CASE("always-pass puts the source on the boundary") {
  Network net = Network::regular_tree(3, 4);
  for (int T : {2, 4, 6, 8}) {
    Rng rng = trial_rng(9, T);
    Snapshot s = spread_adaptive(net, net.root(), adaptive(T, AlphaPolicy::AlwaysPass), rng);
    CHECK(s.h() == T / 2);
    auto lv = s.leaves();
    CHECK(static_cast<double>(lv.size()) == leaves_regular(3, T));
    CHECK(std::find(lv.begin(), lv.end(), 0) != lv.end());
  }
}

TEST_CASE("fixed alpha table of ones never moves the token after t=1") {
  Network net = Network::regular_tree(4, 0);
  ProtocolParams p = adaptive(9, AlphaPolicy::FixedTable);
  p.alpha_table = {1.0};
  Rng rng(5);
  Snapshot s = spread_adaptive(net, net.root(), p, rng);
  CHECK(s.h() == 1);
  CHECK(static_cast<double>(s.size()) == n_regular(4, 9, Branch::Kept));
  p.alpha_table = {1.5};
  CHECK_THROWS_AS(spread_adaptive(net, net.root(), p, rng), Error);
}

TEST_CASE("adaptive diffusion on a cyclic graph stays consistent") {
  // 6x6 torus
  std::vector<std::pair<NodeId, NodeId>> e;
  for (int x = 0; x < 6; ++x)
    for (int y = 0; y < 6; ++y) {
      e.emplace_back(x * 6 + y, ((x + 1) % 6) * 6 + y);
      e.emplace_back(x * 6 + y, x * 6 + (y + 1) % 6);
    }
  Network net = Network::from_edges(e);
  ProtocolParams p = adaptive(10);
  p.d0 = 4;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng = trial_rng(21, trial);
    Snapshot s = spread_adaptive(net, 0, p, rng);
    check_tree_shape(net, s);
    CHECK(s.size() <= 36);
  }
}

TEST_CASE("tree protocol metadata on a regular tree") {
  Network net = Network::regular_tree(3, 8);
  ProtocolParams p;
  p.kind = Protocol::TreeProtocol;
  for (int T : {2, 4, 6, 8}) {
    p.T = T;
    Rng rng = trial_rng(8, T);
    Snapshot s = spread_tree_protocol(net, net.root(), p, rng);
    check_tree_shape(net, s);
    CHECK(static_cast<double>(s.size()) == n_regular(3, T, Branch::Even));
    int spine_top = -1;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.dir[i] == Dir::Up) {
        CHECK(s.level[i] == s.time[i]);
        if (s.time[i] == T / 2) spine_top = static_cast<int>(i);
      } else {
        REQUIRE(s.dir[i] == Dir::Down);
        CHECK(s.level[i] == s.level[s.parent[i]] - 1);
        CHECK(s.level[i] >= 0);
        CHECK((s.time[i] + s.level[i]) % 2 == 0);
      }
    }
    REQUIRE(spine_top >= 0);
    // even-T snapshot is the ball around the spine node infected at T/2
    auto dist = s.tree_distances(spine_top);
    for (int x : dist) CHECK(x <= T / 2);
    CHECK(s.size() == ball_size(net, s.node[spine_top], T / 2));
  }
}

TEST_CASE("grid protocol: even-T ball, parents adjacent, hop budget") {
  Network net = Network::grid();
  ProtocolParams p;
  p.kind = Protocol::GridAdaptive;
  for (int T : {2, 4, 6, 8, 12}) {
    for (int trial = 0; trial < 10; ++trial) {
      p.T = T;
      Rng rng = trial_rng(31, T * 100 + trial);
      Snapshot s = spread_grid(net, net.root(), p, rng);
      check_tree_shape(net, s);
      CHECK(static_cast<double>(s.size()) == grid_predictions(T).n_even);
      NodeId vt = s.virtual_source();
      for (NodeId v : s.node) CHECK(net.distance(v, vt) <= T / 2);
      CHECK(net.distance(vt, s.source) == s.h());
      CHECK(std::llabs(s.hH) + std::llabs(s.hV) == s.h());
    }
  }
}

TEST_CASE("diffusion and flooding") {
  Network net = Network::regular_tree(3, 1);
  ProtocolParams p;
  p.kind = Protocol::Diffusion;
  p.q = 0.5;
  p.T = 6;
  Rng rng(4);
  Snapshot s = spread_diffusion(net, net.root(), p, rng);
  check_tree_shape(net, s);
  Snapshot f = spread_deterministic(net, net.root(), 4);
  CHECK(f.size() == 1 + 3 * (16 - 1));
  check_tree_shape(net, f);
  p.q = 1.0;
  CHECK_THROWS_AS(spread_diffusion(net, net.root(), p, rng), Error);
}

TEST_CASE("PAAD weights and tree requirement") {
  Network net = Network::from_edges({{0, 1}, {1, 2}, {1, 3}, {0, 4}, {4, 5}, {4, 6}, {4, 7}, {5, 8}});
  CHECK(paad_weight(net, 1, 0, 1) == 2);
  CHECK(paad_weight(net, 4, 0, 1) == 3);
  CHECK(paad_weight(net, 4, 0, 2) == 4);  // 5, 6, 7 then 8
  CHECK(paad_weight(net, 1, 0, 2) == 2);
  Network cyc = Network::from_edges({{0, 1}, {1, 2}, {2, 0}});
  ProtocolParams p;
  p.kind = Protocol::Paad;
  p.T = 2;
  Rng rng(1);
  CHECK_THROWS_AS(spread_paad(cyc, 0, p, rng), Error);
  // first hop from 0 prefers 4 (weight 3) over 1 (weight 2)
  int to4 = 0, n = 20000;
  for (int i = 0; i < n; ++i) {
    Rng r = trial_rng(2, i);
    p.T = 1;
    if (spread_paad(net, 0, p, r).virtual_source() == 4) ++to4;
  }
  CHECK(std::abs(to4 / double(n) - 0.6) < 4 * std::sqrt(0.24 / n));
}

TEST_CASE("spies: source excluded, observations carry metadata") {
  SpySet sp{99, 0.5, 7};
  CHECK_FALSE(sp.is_spy(7));
  int hits = 0;
  for (NodeId v = 100; v < 20100; ++v) hits += sp.is_spy(v);
  CHECK(std::abs(hits / 20000.0 - 0.5) < 0.02);

  Network net = Network::regular_tree(3, 0);
  ProtocolParams p;
  p.kind = Protocol::TreeProtocol;
  Rng rng(12);
  SpySet spies{4, 0.3, net.root()};
  SpyRun run = run_tree_protocol_with_spies(net, net.root(), spies, p, rng);
  REQUIRE(run.spine_spy_found);
  int m0 = 1 << 30;
  for (auto& o : run.obs) {
    int i = run.snap.idx(o.spy);
    REQUIRE(i >= 0);
    CHECK(o.time == run.snap.time[i]);
    CHECK(o.level == run.snap.level[i]);
    if (o.dir == Dir::Up) m0 = std::min(m0, o.level);
  }
  CHECK(run.snap.T >= 2 * (m0 - 1));
}

TEST_CASE("structural spy sampler is self-consistent") {
  Network net = Network::regular_tree(3, 0);
  double sum_m0 = 0;
  const int n = 4000;
  const double p = 0.2;
  for (int i = 0; i < n; ++i) {
    Rng rng = trial_rng(44, i);
    SpineSample ss = sample_spy_tree_regular(net, p, rng);
    REQUIRE(ss.found);
    const auto& top = ss.obs.back();
    CHECK(top.dir == Dir::Up);
    CHECK(top.spy == ss.spine[top.level]);
    sum_m0 += top.level;
    for (auto& o : ss.obs) {
      CHECK(o.spy != ss.source);
      if (o.dir != Dir::Down) continue;
      int k = (o.time + o.level) / 2;
      int j = (o.time - o.level) / 2;
      CHECK(k < top.level);
      CHECK(net.distance(o.spy, ss.spine[k]) == j);
      CHECK(o.level >= 0);
    }
  }
  // spine spy index is geometric(p)
  CHECK(std::abs(sum_m0 / n - 1 / p) < 5 * std::sqrt((1 - p) / (p * p) / n));
}

TEST_CASE("Polya line run is consistent") {
  for (int i = 0; i < 500; ++i) {
    Rng rng = trial_rng(5, i);
    int n = 51, src = 1 + static_cast<int>(pick(rng, n));
    PolyaRun r = spread_polya_line(n, src, rng);
    CHECK(r.T1 >= src);
    CHECK(r.T2 >= n + 1 - src);
    CHECK(r.hs[1] == 1);
    for (std::size_t t = 1; t < r.hs.size(); ++t) CHECK(r.hs[t] - r.hs[t - 1] >= 0);
    CHECK((r.left ? src - 0 : n + 1 - src) <= (r.left ? r.T1 : r.T2));
  }
  Rng rng(1);
  CHECK_THROWS_AS(spread_polya_line(10, 0, rng), Error);
}

TEST_CASE("trace csv round trip") {
  Network net = Network::regular_tree(3, 6);
  Rng rng(77);
  Snapshot s = spread_adaptive(net, net.root(), adaptive(6), rng);
  std::stringstream ss;
  write_trace_csv(ss, s);
  Snapshot r = read_trace_csv(ss);
  CHECK(r.T == s.T);
  CHECK(r.source == s.source);
  CHECK(r.node == s.node);
  CHECK(r.time == s.time);
  CHECK(r.parent == s.parent);
  CHECK(r.degree == s.degree);
  CHECK(r.vs == s.vs);
  CHECK(r.hs == s.hs);
  std::stringstream bad("# adlab-trace v1\nnode,infection_time,parent,direction,level,is_virtual_source_at_t,degree\n1,x,-,-,0,0,3\n");
  CHECK_THROWS_AS(read_trace_csv(bad), Error);
}
