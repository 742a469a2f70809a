#include "adlab/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "adversary_util.hpp"

namespace adlab {

namespace {

struct NameEntry {
  EstimatorKind k;
  const char* name;
};

constexpr NameEntry kNames[] = {
    {EstimatorKind::SnapshotRegular, "snapshot"},     {EstimatorKind::IrregularMl, "irregular-ml"},
    {EstimatorKind::MapLeaf, "map-leaf"},             {EstimatorKind::PaadMap, "paad-map"},
    {EstimatorKind::SpyMl, "spy-ml"},                 {EstimatorKind::SpyIrregular, "spy-irregular"},
    {EstimatorKind::FirstSpy, "first-spy"},           {EstimatorKind::LineMl, "line-ml"},
    {EstimatorKind::SpySnapshot, "spy-snapshot"},     {EstimatorKind::MultiSnapshot, "multi-snapshot"},
};

}  // namespace

const char* estimator_name(EstimatorKind k) {
  for (auto& e : kNames)
    if (e.k == k) return e.name;
  return "?";
}

EstimatorKind estimator_from_name(const std::string& s) {
  for (auto& e : kNames)
    if (s == e.name) return e.k;
  throw Error(ErrorKind::Config, "unknown estimator '" + s + "'");
}

NodeId break_ties(const std::vector<NodeId>& cand, const std::vector<double>& score, Rng* rng,
                  TieBreak tb, int* ties) {
  require(!cand.empty() && cand.size() == score.size(), ErrorKind::InvalidSnapshot, "no candidates");
  double best = *std::max_element(score.begin(), score.end());
  double tol = std::abs(best) * 1e-12;
  std::vector<std::size_t> top;
  for (std::size_t i = 0; i < cand.size(); ++i)
    if (score[i] >= best - tol) top.push_back(i);
  if (ties) *ties = static_cast<int>(top.size());
  if (tb == TieBreak::LowestId || !rng) {
    std::size_t b = top[0];
    for (std::size_t i : top)
      if (cand[i] < cand[b]) b = i;
    return cand[b];
  }
  return cand[top[pick(*rng, top.size())]];
}

namespace detail {

Rooted root_at(const Snapshot& s, int root) {
  Rooted r;
  auto adj = s.tree_adj();
  r.parent.assign(s.size(), -1);
  r.depth.assign(s.size(), -1);
  r.order.push_back(root);
  r.depth[root] = 0;
  for (std::size_t i = 0; i < r.order.size(); ++i) {
    int x = r.order[i];
    for (int y : adj[x])
      if (r.depth[y] < 0) {
        r.depth[y] = r.depth[x] + 1;
        r.parent[y] = x;
        r.order.push_back(y);
      }
  }
  return r;
}

std::vector<int> tree_centers(const Snapshot& s) {
  if (s.size() == 1) return {0};
  auto far = [&](int from) {
    auto d = s.tree_distances(from);
    return static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
  };
  int a = far(0);
  Rooted r = root_at(s, a);
  int b = static_cast<int>(std::max_element(r.depth.begin(), r.depth.end()) - r.depth.begin());
  int diam = r.depth[b];
  std::vector<int> path{b};
  while (path.back() != a) path.push_back(r.parent[path.back()]);
  if (diam % 2 == 0) return {path[diam / 2]};
  return {path[diam / 2], path[diam / 2 + 1]};
}

int center_of(const Snapshot& s) {
  if (!s.vs.empty()) {
    int i = s.idx(s.virtual_source());
    if (i >= 0) return i;
  }
  return tree_centers(s)[0];
}

}  // namespace detail

using detail::center_of;
using detail::root_at;
using detail::Rooted;

Estimate estimate_snapshot_regular(const Snapshot& s, Rng& rng, TieBreak tb) {
  require(s.size() > 0, ErrorKind::InvalidSnapshot, "empty snapshot");
  Estimate e;
  e.kind = EstimatorKind::SnapshotRegular;
  if (s.size() == 1) {
    e.v = s.node[0];
    e.candidates = {e.v};
    e.scores = {1.0};
    e.set_size = 1;
    e.ties = 1;
    return e;
  }
  std::vector<int> excl;
  if (!s.vs.empty() && s.idx(s.virtual_source()) >= 0) {
    excl.push_back(s.idx(s.virtual_source()));
    if (s.T % 2 == 1 && s.last_pass && s.T >= 3 && static_cast<int>(s.vs.size()) > s.T)
      excl.push_back(s.idx(s.vs[s.T - 1]));
  } else {
    excl = detail::tree_centers(s);
  }
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::find(excl.begin(), excl.end(), static_cast<int>(i)) == excl.end()) {
      e.candidates.push_back(s.node[i]);
      e.scores.push_back(1.0);
    }
  e.set_size = static_cast<double>(e.candidates.size());
  e.v = break_ties(e.candidates, e.scores, &rng, tb, &e.ties);
  e.detection = 1.0 / e.set_size;
  return e;
}

Estimate estimate_irregular_ml(const Snapshot& s, int d0, Rng& rng, TieBreak tb, bool leaves_only) {
  require(d0 >= 2, ErrorKind::InvalidParameter, "d0 must be >= 2");
  require(s.size() > 1, ErrorKind::InvalidSnapshot, "snapshot too small");
  require(s.T >= 2 && s.T % 2 == 0, ErrorKind::Unsupported, "irregular ML needs an even T");
  const int c = center_of(s);
  Rooted r = root_at(s, c);

  // A-messages seeded at the virtual source
  std::vector<double> A(s.size(), 0.0);
  for (int x : r.order) {
    if (x == c) continue;
    int p = r.parent[x];
    A[x] = p == c ? 1.0 / s.degree[x] : A[p] * s.degree[p] / (s.degree[x] * (s.degree[p] - 1.0));
  }

  double leaf = 1.0 / (d0 * std::pow(d0 - 1.0, s.T / 2 - 1));
  for (int t = 2; t < s.T; t += 2) leaf *= 1 - alpha_regular(d0, t, t / 2);

  Estimate e;
  e.kind = EstimatorKind::IrregularMl;
  e.scale = leaf;
  std::vector<char> is_leaf(s.size(), !leaves_only);
  if (leaves_only)
    for (int i : s.leaves()) is_leaf[i] = 1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!is_leaf[i]) continue;
    double sc = static_cast<int>(i) == c ? 0.0 : A[i] * d0 * std::pow(d0 - 1.0, r.depth[i] - 1);
    e.candidates.push_back(s.node[i]);
    e.scores.push_back(sc);
  }
  e.set_size = static_cast<double>(e.candidates.size());
  e.v = break_ties(e.candidates, e.scores, &rng, tb, &e.ties);
  return e;
}

double oracle_trajectory_likelihood(const Snapshot& s, NodeId candidate, int d0) {
  require(s.T >= 2 && s.T % 2 == 0, ErrorKind::Unsupported, "oracle needs an even T");
  require(s.T <= 12, ErrorKind::Unsupported, "oracle refuses T > 12");
  require(d0 >= 2, ErrorKind::InvalidParameter, "d0 must be >= 2");
  int v = s.idx(candidate);
  require(v >= 0, ErrorKind::InvalidNode, "candidate not in snapshot");
  const int c = center_of(s);
  if (v == c) return 0.0;
  Rooted r = root_at(s, c);
  // virtual-source path candidate -> center
  std::vector<int> path{v};
  while (path.back() != c) path.push_back(r.parent[path.back()]);
  const int h = static_cast<int>(path.size()) - 1;
  const int decisions = (s.T - 2) / 2;
  double total = 0;
  for (int mask = 0; mask < (1 << decisions); ++mask) {
    if (__builtin_popcount(mask) != h - 1) continue;
    // the source hands the token to path[1] at t=1
    double pr = 1.0 / s.degree[v];
    int hh = 1;
    for (int i = 0; i < decisions; ++i) {
      int t = 3 + 2 * i;
      double a = alpha_regular(d0, t - 1, hh);
      if (mask >> i & 1) {
        pr *= (1 - a) / (s.degree[path[hh]] - 1.0);
        ++hh;
      } else {
        pr *= a;
      }
    }
    total += pr;
  }
  return total;
}

Estimate estimate_map_leaf(const Snapshot& s, Rng& rng, TieBreak tb) {
  require(s.size() > 1, ErrorKind::InvalidSnapshot, "snapshot too small");
  require(s.T >= 2 && s.T % 2 == 0, ErrorKind::Unsupported, "MAP leaf estimator needs an even T");
  const int c = center_of(s);
  Rooted r = root_at(s, c);
  const int R = s.T / 2;
  if (s.source != kNoNode && s.idx(s.source) >= 0)
    require(r.depth[s.idx(s.source)] == R, ErrorKind::WrongProtocol,
            "source is not on the snapshot boundary; snapshot is not from always-pass spreading");
  Estimate e;
  e.kind = EstimatorKind::MapLeaf;
  double logd = std::log(static_cast<double>(s.degree[c]));
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (r.depth[i] != R) continue;
    double lp = 0;
    for (int w = r.parent[i]; w != c; w = r.parent[w]) lp += std::log(s.degree[w] - 1.0);
    e.candidates.push_back(s.node[i]);
    e.scores.push_back(std::exp(-(lp + logd)));
  }
  require(!e.candidates.empty(), ErrorKind::InvalidSnapshot, "no boundary nodes at distance T/2");
  e.set_size = static_cast<double>(e.candidates.size());
  e.v = break_ties(e.candidates, e.scores, &rng, tb, &e.ties);
  double best = *std::max_element(e.scores.begin(), e.scores.end());
  e.lambda = 1.0 / best;
  e.detection = best;
  return e;
}

Estimate estimate_paad_map(const Network& net, const Snapshot& s, int g, Rng& rng, TieBreak tb) {
  require(g >= 1, ErrorKind::InvalidParameter, "g must be >= 1");
  require(s.size() > 1, ErrorKind::InvalidSnapshot, "snapshot too small");
  require(s.T >= 2 && s.T % 2 == 0, ErrorKind::Unsupported, "PAAD MAP needs an even T");
  const int c = center_of(s);
  Rooted r = root_at(s, c);
  const int R = s.T / 2;
  Estimate e;
  e.kind = EstimatorKind::PaadMap;
  std::vector<NodeId> nb;
  double total = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (r.depth[i] != R) continue;
    require(net.contains(s.node[i]), ErrorKind::InvalidSnapshot, "snapshot node missing from network");
    double Q = 1;
    NodeId back = kNoNode;
    NodeId at = s.node[i];
    for (int w = r.parent[i];; w = r.parent[w]) {
      net.neighbors(at, nb);
      double num = 0, den = 0;
      for (NodeId y : nb) {
        if (y == back) continue;
        double wt = static_cast<double>(paad_weight(net, y, at, g));
        den += wt;
        if (y == s.node[w]) num = wt;
      }
      Q *= den > 0 ? num / den : 0.0;
      back = at;
      at = s.node[w];
      if (w == c) break;
    }
    double sc = s.degree[i] * Q;
    e.candidates.push_back(s.node[i]);
    e.scores.push_back(sc);
    total += sc;
  }
  require(!e.candidates.empty() && total > 0, ErrorKind::InvalidSnapshot, "no feasible boundary node");
  e.set_size = static_cast<double>(e.candidates.size());
  e.v = break_ties(e.candidates, e.scores, &rng, tb, &e.ties);
  e.detection = *std::max_element(e.scores.begin(), e.scores.end()) / total;
  return e;
}

Estimate estimate_first_spy(const std::vector<SpyObservation>& obs, Rng& rng) {
  Estimate e;
  e.kind = EstimatorKind::FirstSpy;
  if (obs.empty()) {
    e.inconclusive = true;
    e.note = "no spy observed";
    return e;
  }
  int first = obs[0].time;
  for (auto& o : obs) first = std::min(first, o.time);
  for (auto& o : obs)
    if (o.time == first) {
      e.candidates.push_back(o.parent);
      e.scores.push_back(1.0);
    }
  e.set_size = static_cast<double>(e.candidates.size());
  e.v = break_ties(e.candidates, e.scores, &rng, TieBreak::Random, &e.ties);
  return e;
}

Estimate estimate_multi_snapshot(const Snapshot& s, NodeId next_vs, Rng& rng) {
  require(s.size() > 1, ErrorKind::InvalidSnapshot, "snapshot too small");
  require(s.T >= 2 && s.T % 2 == 0, ErrorKind::Unsupported, "multi-snapshot estimator needs an even T");
  const int c = center_of(s);
  const int h = s.h();
  require(h >= 1, ErrorKind::InvalidSnapshot, "snapshot carries no virtual-source history");
  Rooted r = root_at(s, c);
  int nx = s.idx(next_vs);
  require(nx >= 0 && r.parent[nx] == c, ErrorKind::InvalidSnapshot,
          "next virtual source must neighbour the current one");
  // top-level branch of each node
  std::vector<int> branch(s.size(), -1);
  for (int x : r.order)
    if (x != c) branch[x] = r.parent[x] == c ? x : branch[r.parent[x]];
  Estimate e;
  e.kind = EstimatorKind::MultiSnapshot;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (r.depth[i] == h && branch[i] != nx) {
      e.candidates.push_back(s.node[i]);
      e.scores.push_back(1.0);
    }
  require(!e.candidates.empty(), ErrorKind::ImpossibleObservation, "no node at the revealed distance");
  e.set_size = static_cast<double>(e.candidates.size());
  e.v = break_ties(e.candidates, e.scores, &rng, TieBreak::Random, &e.ties);
  e.detection = 1.0 / e.set_size;
  return e;
}

LineEstimate estimate_line_ml(int T1, double q, bool left) {
  require(T1 >= 1, ErrorKind::InvalidParameter, "T1 must be >= 1");
  require(q >= 0 && q <= 1, ErrorKind::InvalidParameter, "q must lie in [0,1]");
  LineEstimate r;
  if (left) {
    if (T1 == 1) r.v = 1;
    else if (T1 % 2 == 0) r.v = (T1 + 2) / 2 + static_cast<int>(std::floor(q * (T1 - 2) / 2));
    else r.v = (T1 + 3) / 2 + static_cast<int>(std::floor(q * (T1 - 1) / 2));
  } else {
    if (T1 % 2 == 0) {
      r.impossible = true;
      return r;
    }
    r.v = 1 + static_cast<int>(std::floor((1 - q) * (T1 - 1) / 2));
  }
  return r;
}

}  // namespace adlab
