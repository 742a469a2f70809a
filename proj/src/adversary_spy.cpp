#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "adlab/adversary.hpp"
#include "adversary_util.hpp"

namespace adlab {

namespace {

// BFS tree of the feasible region: radius R around p0, never entering s0
struct FTree {
  std::vector<NodeId> node;
  std::vector<int> parent, depth;
  std::unordered_map<NodeId, int> idx;
  bool over_cap = false;

  int find(NodeId v) const {
    auto it = idx.find(v);
    return it == idx.end() ? -1 : it->second;
  }
};

FTree build_feasible(const Network& net, NodeId p0, NodeId s0, int R, std::size_t cap) {
  FTree f;
  f.node.push_back(p0);
  f.parent.push_back(-1);
  f.depth.push_back(0);
  f.idx.emplace(p0, 0);
  std::vector<NodeId> nb;
  for (std::size_t i = 0; i < f.node.size(); ++i) {
    if (f.depth[i] == R) continue;
    net.neighbors(f.node[i], nb);
    for (NodeId w : nb) {
      if (w == s0 || f.idx.count(w)) continue;
      if (f.node.size() >= cap) {
        f.over_cap = true;
        return f;
      }
      f.idx.emplace(w, static_cast<int>(f.node.size()));
      f.node.push_back(w);
      f.parent.push_back(static_cast<int>(i));
      f.depth.push_back(f.depth[i] + 1);
    }
  }
  return f;
}

// fills pivots given the s0 choice; f == nullptr uses tree paths
void collect_pivots(const Network& net, const std::vector<SpyObservation>& obs, SpyAnalysis& a,
                    const FTree* f) {
  const auto& s0 = obs[a.s0];
  const int R = a.m0 - 1;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i == a.s0) continue;
    const auto& o = obs[i];
    // path from the spy up to p0, inclusive
    std::vector<NodeId> up;
    if (f) {
      int x = f->find(o.spy);
      if (x < 0) continue;
      for (; x >= 0; x = f->parent[x]) up.push_back(f->node[x]);
    } else {
      up = net.path(o.spy, s0.spy);
      if (up.size() < 2 || up[up.size() - 2] != a.p0) continue;
      up.pop_back();
      if (static_cast<int>(up.size()) - 1 > R) continue;
    }
    const int len = static_cast<int>(up.size());  // |P(s, s0)|
    const int diff = len - (s0.time - o.time);
    if (diff % 2 != 0) continue;
    const int h1 = diff / 2;
    if (h1 < 1 || h1 >= len) continue;
    PivotInfo p;
    p.spy = o.spy;
    p.pivot = up[h1];
    p.eliminated = up[h1 - 1];
    p.h_spy_pivot = h1;
    p.h_pivot_s0 = len - h1;
    p.level = o.time - h1;
    a.pivots.push_back(p);
  }
  for (std::size_t i = 0; i < a.pivots.size(); ++i)
    if (a.min_pivot < 0 || a.pivots[i].level < a.pivots[a.min_pivot].level) a.min_pivot = static_cast<int>(i);
}

SpyAnalysis find_s0(const std::vector<SpyObservation>& obs) {
  SpyAnalysis a;
  for (std::size_t i = 0; i < obs.size(); ++i)
    if (obs[i].dir == Dir::Up && (!a.found || obs[i].level < obs[a.s0].level)) {
      a.found = true;
      a.s0 = i;
    }
  if (a.found) {
    a.p0 = obs[a.s0].parent;
    a.m0 = obs[a.s0].level;
    require(a.m0 >= 1 && a.p0 != kNoNode, ErrorKind::ImpossibleObservation,
            "spine spy reports an invalid level or parent");
  }
  return a;
}

double log_weight(const Network& net, const FTree& f, int leaf, int anchor, const Snapshot* trace) {
  auto fd = [&](NodeId v) {
    if (!trace) return -1;
    int j = trace->idx(v);
    return j >= 0 ? trace->free_deg[j] : -1;
  };
  NodeId u = f.node[leaf];
  int du = fd(u);
  double lw = -std::log(du >= 1 ? du : net.degree(u));
  for (int x = f.parent[leaf]; x >= 0 && x != anchor; x = f.parent[x]) {
    int dv = fd(f.node[x]);
    lw -= std::log(dv >= 1 ? dv : net.degree(f.node[x]) - 1.0);
  }
  return lw;
}

Estimate spy_estimate(const Network& net, const std::vector<SpyObservation>& obs, Rng& rng, bool weighted,
                      std::size_t node_cap, const Snapshot* trace, EstimatorKind kind) {
  Estimate e;
  e.kind = kind;
  SpyAnalysis a = find_s0(obs);
  if (!a.found) {
    e.inconclusive = true;
    e.note = "no spine spy observed";
    return e;
  }
  const NodeId s0 = obs[a.s0].spy;
  const int R = a.m0 - 1;

  if (net.kind() == NetKind::RegularTree) {
    const double r = net.regular_degree() - 1.0;
    // the feasible ball holds at most 2 r^R + 1 nodes
    if (2 * std::pow(r, R) + 1 > static_cast<double>(node_cap)) {
      // counting path: all allowed branches hold the same number of feasible leaves
      collect_pivots(net, obs, a, nullptr);
      NodeId anchor = a.min_pivot >= 0 ? a.pivots[a.min_pivot].pivot : a.p0;
      NodeId toward = anchor == a.p0 ? s0 : net.path(anchor, a.p0)[1];
      std::unordered_set<NodeId> K;
      for (auto& p : a.pivots)
        if (p.pivot == anchor) K.insert(p.eliminated);
      std::vector<NodeId> nb, kids;
      net.neighbors(anchor, nb);
      for (NodeId w : nb)
        if (w != toward && !K.count(w)) kids.push_back(w);
      const int da = net.distance(anchor, a.p0);
      if (da == R) {
        e.v = anchor;
        e.set_size = 1;
        e.ties = 1;
        return e;
      }
      require(!kids.empty(), ErrorKind::ImpossibleObservation, "every branch of the pivot is eliminated");
      e.set_size = kids.size() * std::pow(r, R - da - 1);
      e.ties = e.set_size > std::numeric_limits<int>::max() ? std::numeric_limits<int>::max()
                                                            : static_cast<int>(e.set_size);
      NodeId prev = anchor, x = kids[pick(rng, kids.size())];
      for (int step = da + 1; step < R; ++step) {
        net.neighbors(x, nb);
        std::vector<NodeId> away;
        for (NodeId w : nb)
          if (w != prev) away.push_back(w);
        prev = x;
        x = away[pick(rng, away.size())];
      }
      e.v = x;
      return e;
    }
  }

  FTree f = build_feasible(net, a.p0, s0, R, node_cap);
  if (f.over_cap) {
    e.inconclusive = true;
    e.note = "feasible region exceeds node cap";
    return e;
  }
  collect_pivots(net, obs, a, &f);
  int anchor = a.min_pivot >= 0 ? f.find(a.pivots[a.min_pivot].pivot) : 0;
  std::unordered_set<NodeId> K;
  if (a.min_pivot >= 0)
    for (auto& p : a.pivots)
      if (p.pivot == a.pivots[a.min_pivot].pivot) K.insert(p.eliminated);
  std::vector<char> inside(f.node.size(), 0);
  for (std::size_t i = 0; i < f.node.size(); ++i) {
    int p = f.parent[i];
    if (static_cast<int>(i) == anchor) inside[i] = 1;
    else if (p >= 0) inside[i] = inside[p] && !(p == anchor && K.count(f.node[i]));
  }
  std::vector<double> lw;
  for (std::size_t i = 0; i < f.node.size(); ++i) {
    if (!inside[i] || f.depth[i] != R) continue;
    e.candidates.push_back(f.node[i]);
    lw.push_back(weighted ? log_weight(net, f, static_cast<int>(i), anchor, trace) : 0.0);
  }
  if (e.candidates.empty()) {
    e.inconclusive = true;
    e.note = "no feasible leaf survives the pivot elimination";
    return e;
  }
  double mx = *std::max_element(lw.begin(), lw.end());
  for (double x : lw) e.scores.push_back(std::exp(x - mx));
  e.set_size = static_cast<double>(e.candidates.size());
  e.v = break_ties(e.candidates, e.scores, &rng, TieBreak::Random, &e.ties);
  return e;
}

}  // namespace

SpyAnalysis analyze_spies(const Network& net, const std::vector<SpyObservation>& obs) {
  SpyAnalysis a = find_s0(obs);
  if (!a.found) return a;
  if (net.is_tree() && !net.finite()) {
    collect_pivots(net, obs, a, nullptr);
  } else {
    FTree f = build_feasible(net, a.p0, obs[a.s0].spy, a.m0 - 1, 2000000);
    require(!f.over_cap, ErrorKind::Unsupported, "feasible region exceeds node cap");
    collect_pivots(net, obs, a, &f);
  }
  return a;
}

Estimate estimate_spy_ml(const Network& net, const std::vector<SpyObservation>& obs, Rng& rng, bool weighted,
                         std::size_t node_cap) {
  return spy_estimate(net, obs, rng, weighted, node_cap, nullptr,
                      weighted ? EstimatorKind::SpyIrregular : EstimatorKind::SpyMl);
}

Estimate estimate_spy_irregular(const Network& net, const std::vector<SpyObservation>& obs, Rng& rng,
                                const Snapshot* trace) {
  return spy_estimate(net, obs, rng, true, 2000000, trace, EstimatorKind::SpyIrregular);
}

Estimate estimate_spy_snapshot(const Snapshot& s, const std::vector<SpyObservation>& obs, Rng& rng) {
  require(s.size() > 1, ErrorKind::InvalidSnapshot, "snapshot too small");
  require(s.T >= 2 && s.T % 2 == 0, ErrorKind::Unsupported, "spy+snapshot estimator needs an even T");
  Estimate e;
  e.kind = EstimatorKind::SpySnapshot;
  const int c = detail::tree_centers(s)[0];
  detail::Rooted r = detail::root_at(s, c);
  const auto leaves = s.leaves();

  struct Piv {
    int spy, pivot, level;
  };
  std::vector<Piv> piv;
  for (auto& o : obs) {
    int x = s.idx(o.spy);
    if (x < 0 || o.time > s.T) continue;
    if (o.dir == Dir::Up) {
      piv.push_back({x, x, o.time});
    } else if (o.dir == Dir::Down) {
      if ((o.time - o.level) % 2 != 0) continue;
      int j = (o.time - o.level) / 2, y = x;
      for (int k = 0; k < j && y >= 0; ++k) y = r.parent[y];
      if (y < 0) continue;
      piv.push_back({x, y, (o.time + o.level) / 2});
    }
  }

  auto take = [&](auto keep) {
    for (int l : leaves)
      if (keep(l)) {
        e.candidates.push_back(s.node[l]);
        e.scores.push_back(1.0);
      }
  };

  if (piv.empty()) {
    take([](int) { return true; });
  } else {
    const Piv* lm = &piv[0];
    for (auto& p : piv)
      if (p.level < lm->level) lm = &p;
    if (lm->level > s.T / 2) {
      e.inconclusive = true;
      e.note = "lowest pivot lies beyond the snapshot centre";
      return e;
    }
    // label every node by the neighbour of the pivot it hangs from
    const int L = lm->pivot;
    auto adj = s.tree_adj();
    std::vector<int> label(s.size(), -1);
    for (int nbh : adj[L]) {
      std::vector<int> st{nbh};
      label[nbh] = nbh;
      while (!st.empty()) {
        int x = st.back();
        st.pop_back();
        for (int y : adj[x])
          if (y != L && label[y] < 0) {
            label[y] = nbh;
            st.push_back(y);
          }
      }
    }
    bool spied = std::any_of(piv.begin(), piv.end(), [&](const Piv& p) { return p.spy == L; });
    if (spied) {
      int par = s.parent[L];
      require(par >= 0, ErrorKind::ImpossibleObservation, "spine spy has no parent");
      take([&](int l) { return label[l] == par; });
    } else {
      std::unordered_set<int> drop;
      for (auto& p : piv)
        if (p.pivot == L) drop.insert(label[p.spy]);
      for (auto& p : piv)
        if (p.level > lm->level) {
          drop.insert(label[p.spy]);
          break;
        }
      take([&](int l) { return l != L && !drop.count(label[l]); });
    }
  }
  if (e.candidates.empty()) {
    e.inconclusive = true;
    e.note = "no snapshot leaf survives the pivot elimination";
    return e;
  }
  e.set_size = static_cast<double>(e.candidates.size());
  e.v = break_ties(e.candidates, e.scores, &rng, TieBreak::Random, &e.ties);
  e.detection = 1.0 / e.set_size;
  return e;
}

}  // namespace adlab
