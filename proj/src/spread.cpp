#include "adlab/spread.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace adlab {

void ProtocolParams::validate() const {
  require(T >= 0, ErrorKind::InvalidParameter, "horizon T must be >= 0");
  if (alpha == AlphaPolicy::Exact)
    require(d0 == 0 || d0 == kD0Infinity || d0 >= 2, ErrorKind::InvalidParameter, "d0 must be >= 2");
  if (alpha == AlphaPolicy::FixedTable)
    require(!alpha_table.empty(), ErrorKind::InvalidParameter, "fixed alpha table is empty");
  for (double a : alpha_table)
    require(a >= 0 && a <= 1, ErrorKind::InvalidParameter, "alpha table entries must lie in [0,1]");
  if (kind == Protocol::Diffusion)
    require(q > 0 && q < 1, ErrorKind::InvalidParameter, "diffusion rate q must lie in (0,1)");
  if (kind == Protocol::Paad) require(g >= 1, ErrorKind::InvalidParameter, "PAAD hop depth g must be >= 1");
}

int ProtocolParams::effective_cap(const Network& net) const {
  if (fanout_cap >= 0) return fanout_cap;
  return net.kind() == NetKind::Explicit ? 3 : 0;
}

// ---- snapshot

int Snapshot::add(NodeId v, int t, int par, int deg) {
  int i = static_cast<int>(node.size());
  node.push_back(v);
  time.push_back(t);
  parent.push_back(par);
  degree.push_back(deg);
  dir.push_back(Dir::None);
  level.push_back(0);
  free_deg.push_back(-1);
  index.emplace(v, i);
  return i;
}

std::vector<std::vector<int>> Snapshot::tree_adj() const {
  std::vector<std::vector<int>> a(node.size());
  for (std::size_t i = 0; i < node.size(); ++i)
    if (parent[i] >= 0) {
      a[i].push_back(parent[i]);
      a[parent[i]].push_back(static_cast<int>(i));
    }
  return a;
}

std::vector<int> Snapshot::tree_distances(int from) const {
  auto a = tree_adj();
  std::vector<int> dist(node.size(), -1);
  std::deque<int> q{from};
  dist[from] = 0;
  while (!q.empty()) {
    int x = q.front();
    q.pop_front();
    for (int y : a[x])
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        q.push_back(y);
      }
  }
  return dist;
}

std::vector<int> Snapshot::leaves() const {
  std::vector<int> out;
  if (node.size() <= 1) return out;
  std::vector<int> deg(node.size(), 0);
  for (std::size_t i = 0; i < node.size(); ++i)
    if (parent[i] >= 0) {
      ++deg[i];
      ++deg[parent[i]];
    }
  for (std::size_t i = 0; i < node.size(); ++i)
    if (deg[i] <= 1) out.push_back(static_cast<int>(i));
  return out;
}

// ---- alpha

double alpha_regular(int d, int t, int h) {
  require(d >= 2, ErrorKind::InvalidParameter, "alpha: d must be >= 2");
  require(t >= 2 && t % 2 == 0, ErrorKind::InvalidParameter, "alpha: t must be even and >= 2");
  require(h >= 1 && h <= t / 2, ErrorKind::InvalidParameter, "alpha: h out of range [1, t/2]");
  if (d == 2) return static_cast<double>(t - 2 * h + 2) / (t + 2);
  // ((d-1)^a - 1)/((d-1)^b - 1), written with negative powers to stay finite
  double a = t / 2 - h + 1, b = t / 2 + 1, r = d - 1.0;
  return std::pow(r, a - b) * (1 - std::pow(r, -a)) / (1 - std::pow(r, -b));
}

double alpha_grid(int t, int h) {
  require(t >= 2 && t % 2 == 0, ErrorKind::InvalidParameter, "alpha_grid: t must be even and >= 2");
  require(h >= 1 && h <= t / 2, ErrorKind::InvalidParameter, "alpha_grid: h out of range [1, t/2]");
  return static_cast<double>(t - 2 * (h - 1)) / (t + 4);
}

namespace {

double keep_probability(const ProtocolParams& p, const Network& net, int t, int h, int decision) {
  if (p.d0 == kD0Infinity || p.alpha == AlphaPolicy::AlwaysPass) return 0.0;
  if (p.alpha == AlphaPolicy::FixedTable)
    return p.alpha_table[std::min<std::size_t>(decision, p.alpha_table.size() - 1)];
  int d = p.d0;
  if (d == 0) {
    require(net.kind() == NetKind::RegularTree, ErrorKind::InvalidParameter,
            "exact alpha on a non-regular network needs an explicit d0");
    d = net.regular_degree();
  }
  return alpha_regular(d, t, h);
}

// One infection wave: relay from `center` through nodes infected before the wave, never
// entering `blocked`; relaying nodes infect their uninfected neighbours (at most `cap`).
void wave(const Network& net, Snapshot& s, int center, int blocked, int t, int cap, Rng& rng) {
  const std::size_t before = s.size();
  std::vector<char> seen(before, 0);
  std::vector<int> q{center};
  seen[center] = 1;
  if (blocked >= 0) seen[blocked] = 1;
  std::vector<NodeId> nb, fresh;
  for (std::size_t i = 0; i < q.size(); ++i) {
    int x = q[i];
    net.neighbors(s.node[x], nb);
    fresh.clear();
    for (NodeId w : nb) {
      int j = s.idx(w);
      if (j < 0)
        fresh.push_back(w);
      else if (static_cast<std::size_t>(j) < before && !seen[j]) {
        seen[j] = 1;
        q.push_back(j);
      }
    }
    if (cap > 0 && fresh.size() > static_cast<std::size_t>(cap)) {
      std::shuffle(fresh.begin(), fresh.end(), rng);
      fresh.resize(cap);
    }
    for (NodeId w : fresh)
      if (!s.infected(w)) s.add(w, t, x, net.degree(w));
  }
}

NodeId choose_weighted(const Network& net, const std::vector<NodeId>& cand, NodeId from, int g, Rng& rng) {
  std::vector<double> w;
  double tot = 0;
  for (NodeId c : cand) {
    w.push_back(static_cast<double>(paad_weight(net, c, from, g)));
    tot += w.back();
  }
  if (tot <= 0) return cand[pick(rng, cand.size())];
  double u = uniform01(rng) * tot;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    if (u < w[i]) return cand[i];
    u -= w[i];
  }
  return cand.back();
}

Snapshot run_adaptive(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng, bool paad) {
  p.validate();
  require(net.contains(source), ErrorKind::InvalidNode, "source not in network");
  const int cap = p.effective_cap(net);
  const bool tree = net.is_tree();
  Snapshot s;
  s.protocol = paad ? Protocol::Paad : Protocol::Adaptive;
  s.T = p.T;
  s.source = source;
  s.add(source, 0, -1, net.degree(source));
  s.vs.assign(p.T + 1, source);
  s.hs.assign(p.T + 1, 0);
  if (p.T == 0) return s;

  std::vector<NodeId> nb;
  net.neighbors(source, nb);
  require(!nb.empty(), ErrorKind::InvalidNode, "source has no neighbours");
  NodeId u = paad ? choose_weighted(net, nb, source, p.g, rng) : nb[pick(rng, nb.size())];
  int cur = s.add(u, 1, 0, net.degree(u));
  int prev = 0;
  int h = 1;
  s.vs[1] = u;
  s.hs[1] = 1;
  if (p.T == 1) return s;
  wave(net, s, cur, prev, 2, cap, rng);
  s.vs[2] = u;
  s.hs[2] = 1;

  int decision = 0;
  for (int t = 3; t <= p.T; t += 2, ++decision) {
    double keep = paad ? 0.0 : keep_probability(p, net, t - 1, h, decision);
    if (uniform01(rng) < keep) {
      wave(net, s, cur, -1, t, cap, rng);
      s.last_pass = false;
    } else {
      net.neighbors(s.node[cur], nb);
      std::vector<NodeId> cand;
      for (NodeId w : nb) {
        if (w == s.node[prev]) continue;
        if (!tree && !s.infected(w)) continue;
        cand.push_back(w);
      }
      if (cand.empty()) {
        // dead end on a finite graph: fall back to a symmetric wave
        wave(net, s, cur, -1, t, cap, rng);
        s.last_pass = false;
      } else {
        NodeId w = paad ? choose_weighted(net, cand, s.node[cur], p.g, rng) : cand[pick(rng, cand.size())];
        int wi = s.idx(w);
        if (wi < 0) wi = s.add(w, t, cur, net.degree(w));
        prev = cur;
        cur = wi;
        ++h;
        wave(net, s, cur, prev, t, cap, rng);
        if (t + 1 <= p.T) wave(net, s, cur, prev, t + 1, cap, rng);
        s.last_pass = true;
      }
    }
    for (int k = t; k <= std::min(t + 1, p.T); ++k) {
      s.vs[k] = s.node[cur];
      s.hs[k] = h;
    }
  }
  return s;
}

}  // namespace

std::size_t paad_weight(const Network& net, NodeId w, NodeId from, int g) {
  if (g == 1) return static_cast<std::size_t>(net.degree(w) - 1);
  std::size_t count = 0;
  std::vector<std::pair<NodeId, NodeId>> frontier{{w, from}}, next;
  std::vector<NodeId> nb;
  for (int r = 1; r <= g; ++r) {
    next.clear();
    for (auto [x, back] : frontier) {
      net.neighbors(x, nb);
      for (NodeId y : nb)
        if (y != back) next.emplace_back(y, x);
    }
    count += next.size();
    frontier.swap(next);
  }
  return count;
}

Snapshot spread_adaptive(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng) {
  return run_adaptive(net, source, p, rng, false);
}

Snapshot spread_paad(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng) {
  require(net.is_tree(), ErrorKind::Unsupported, "PAAD needs a tree network");
  return run_adaptive(net, source, p, rng, true);
}

NodeId next_virtual_source(const Network& net, const Snapshot& s, const ProtocolParams& p, Rng& rng) {
  require(s.T >= 2 && s.T % 2 == 0, ErrorKind::InvalidSnapshot, "next_virtual_source needs an even T >= 2");
  NodeId cur = s.virtual_source();
  NodeId prev = s.source;
  for (int t = s.T; t >= 0; --t)
    if (s.vs[t] != cur) {
      prev = s.vs[t];
      break;
    }
  int h = s.h();
  for (int t = s.T + 1, decision = (s.T - 2) / 2; t < s.T + 1 + 100000; t += 2, ++decision) {
    if (uniform01(rng) < keep_probability(p, net, t - 1, h, decision)) continue;
    std::vector<NodeId> nb, cand;
    net.neighbors(cur, nb);
    for (NodeId w : nb)
      if (w != prev) cand.push_back(w);
    return cand[pick(rng, cand.size())];
  }
  throw Error(ErrorKind::InvalidParameter, "virtual source never moved");
}

// ---- tree protocol

namespace {

struct TreeProtocolState {
  std::vector<int> active;
  std::vector<char> chose_up;
};

void tree_protocol_step(const Network& net, Snapshot& s, TreeProtocolState& st, int t, int cap, Rng& rng) {
  std::vector<int> acting;
  acting.swap(st.active);
  const std::size_t before = s.size();
  if (!net.is_tree()) std::shuffle(acting.begin(), acting.end(), rng);
  std::vector<NodeId> nb, fresh;
  for (int x : acting) {
    net.neighbors(s.node[x], nb);
    fresh.clear();
    for (NodeId w : nb)
      if (!s.infected(w)) fresh.push_back(w);
    if (fresh.empty()) continue;
    if (s.free_deg[x] < 0) s.free_deg[x] = static_cast<int>(fresh.size());
    bool limited = cap > 0 && fresh.size() > static_cast<std::size_t>(cap);
    std::shuffle(fresh.begin(), fresh.end(), rng);
    if (limited) fresh.resize(cap);
    std::size_t first = 0;
    if (s.dir[x] == Dir::Up && !st.chose_up[x]) {
      int w = s.add(fresh[0], t, x, net.degree(fresh[0]));
      s.dir[w] = Dir::Up;
      s.level[w] = s.level[x] + 1;
      st.chose_up.push_back(0);
      st.chose_up[x] = 1;
      first = 1;
    }
    for (std::size_t i = first; i < fresh.size(); ++i) {
      int w = s.add(fresh[i], t, x, net.degree(fresh[i]));
      s.dir[w] = Dir::Down;
      s.level[w] = s.level[x] - 1;
      st.chose_up.push_back(0);
    }
    if (limited) st.active.push_back(x);
  }
  for (std::size_t i = before; i < s.size(); ++i)
    if (s.level[i] > 0) st.active.push_back(static_cast<int>(i));
}

void tree_protocol_start(const Network& net, NodeId source, Snapshot& s, TreeProtocolState& st) {
  require(net.contains(source), ErrorKind::InvalidNode, "source not in network");
  s.protocol = Protocol::TreeProtocol;
  s.source = source;
  int src = s.add(source, 0, -1, net.degree(source));
  s.dir[src] = Dir::Up;
  s.level[src] = 0;
  st.chose_up.push_back(1);
}

void tree_protocol_first(const Network& net, Snapshot& s, TreeProtocolState& st, Rng& rng) {
  std::vector<NodeId> nb;
  net.neighbors(s.source, nb);
  require(!nb.empty(), ErrorKind::InvalidNode, "source has no neighbours");
  NodeId w = nb[pick(rng, nb.size())];
  int wi = s.add(w, 1, 0, net.degree(w));
  s.dir[wi] = Dir::Up;
  s.level[wi] = 1;
  s.free_deg[0] = static_cast<int>(nb.size());
  st.chose_up.push_back(0);
  st.active.push_back(wi);
}

}  // namespace

Snapshot spread_tree_protocol(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng) {
  p.validate();
  Snapshot s;
  TreeProtocolState st;
  tree_protocol_start(net, source, s, st);
  s.T = p.T;
  if (p.T >= 1) tree_protocol_first(net, s, st, rng);
  const int cap = p.effective_cap(net);
  for (int t = 2; t <= p.T; ++t) tree_protocol_step(net, s, st, t, cap, rng);
  return s;
}

std::vector<SpyObservation> observe(const Snapshot& s, const SpySet& spies) {
  std::vector<SpyObservation> out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!spies.is_spy(s.node[i])) continue;
    SpyObservation o;
    o.spy = s.node[i];
    o.time = s.time[i];
    o.parent = s.parent[i] >= 0 ? s.node[s.parent[i]] : kNoNode;
    o.dir = s.dir[i];
    o.level = s.level[i];
    out.push_back(o);
  }
  return out;
}

SpyRun run_tree_protocol_with_spies(const Network& net, NodeId source, const SpySet& spies,
                                    const ProtocolParams& p, Rng& rng, int cap) {
  SpyRun r;
  Snapshot& s = r.snap;
  TreeProtocolState st;
  tree_protocol_start(net, source, s, st);
  tree_protocol_first(net, s, st, rng);
  const int fan = p.effective_cap(net);
  int stop = cap;
  std::size_t scanned = 1;
  auto scan = [&](int t) {
    for (; scanned < s.size(); ++scanned) {
      if (!spies.is_spy(s.node[scanned]) || r.spine_spy_found) continue;
      if (s.dir[scanned] == Dir::Up) {
        r.spine_spy_found = true;
        int m0 = s.level[scanned];
        stop = std::max(t, 2 * (m0 - 1));
      }
    }
  };
  scan(1);
  int t = 1;
  while (t < stop && !st.active.empty()) {
    ++t;
    tree_protocol_step(net, s, st, t, fan, rng);
    scan(t);
  }
  s.T = t;
  r.obs = observe(s, spies);
  return r;
}

// ---- diffusion and flooding

Snapshot spread_diffusion(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng) {
  require(p.q > 0 && p.q < 1, ErrorKind::InvalidParameter, "diffusion rate q must lie in (0,1)");
  require(net.contains(source), ErrorKind::InvalidNode, "source not in network");
  Snapshot s;
  s.protocol = Protocol::Diffusion;
  s.T = p.T;
  s.source = source;
  s.add(source, 0, -1, net.degree(source));
  std::vector<int> active{0};
  std::vector<NodeId> nb;
  for (int t = 1; t <= p.T; ++t) {
    std::unordered_map<NodeId, std::vector<int>> fired;
    std::vector<NodeId> order;
    std::vector<int> still;
    for (int x : active) {
      net.neighbors(s.node[x], nb);
      bool open = false;
      for (NodeId w : nb) {
        if (s.infected(w)) continue;
        open = true;
        if (bernoulli(rng, p.q)) {
          auto& f = fired[w];
          if (f.empty()) order.push_back(w);
          f.push_back(x);
        }
      }
      if (open) still.push_back(x);
    }
    for (NodeId w : order) {
      auto& f = fired[w];
      int par = f[pick(rng, f.size())];  // uniform tie-break among simultaneous infectors
      int wi = s.add(w, t, par, net.degree(w));
      still.push_back(wi);
    }
    active.swap(still);
  }
  return s;
}

Snapshot spread_deterministic(const Network& net, NodeId source, int T) {
  require(T >= 0, ErrorKind::InvalidParameter, "horizon T must be >= 0");
  require(net.contains(source), ErrorKind::InvalidNode, "source not in network");
  Snapshot s;
  s.protocol = Protocol::Deterministic;
  s.T = T;
  s.source = source;
  s.add(source, 0, -1, net.degree(source));
  std::vector<NodeId> nb;
  std::size_t lo = 0;
  for (int t = 1; t <= T; ++t) {
    std::size_t hi = s.size();
    for (std::size_t i = lo; i < hi; ++i) {
      net.neighbors(s.node[i], nb);
      for (NodeId w : nb)
        if (!s.infected(w)) s.add(w, t, static_cast<int>(i), net.degree(w));
    }
    lo = hi;
  }
  return s;
}

Snapshot spread(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng) {
  switch (p.kind) {
    case Protocol::Adaptive: return spread_adaptive(net, source, p, rng);
    case Protocol::TreeProtocol: return spread_tree_protocol(net, source, p, rng);
    case Protocol::GridAdaptive: return spread_grid(net, source, p, rng);
    case Protocol::Paad: return spread_paad(net, source, p, rng);
    case Protocol::Diffusion: return spread_diffusion(net, source, p, rng);
    case Protocol::Deterministic: return spread_deterministic(net, source, p.T);
    case Protocol::PolyaLine: break;
  }
  throw Error(ErrorKind::Unsupported, "polya-line runs through spread_polya_line");
}

// ---- trace export

namespace {
const char* dir_name(Dir d) { return d == Dir::Up ? "up" : d == Dir::Down ? "down" : "-"; }
}

void write_trace_csv(std::ostream& os, const Snapshot& s) {
  os << "# adlab-trace v1\n";
  os << "# T=" << s.T << " source=" << s.source << " last_pass=" << (s.last_pass ? 1 : 0) << "\n";
  if (!s.vs.empty()) {
    os << "# vs=";
    for (std::size_t t = 0; t < s.vs.size(); ++t) os << (t ? " " : "") << s.vs[t] << ':' << s.hs[t];
    os << "\n";
  }
  os << "node,infection_time,parent,direction,level,is_virtual_source_at_t,degree\n";
  NodeId vt = s.virtual_source();
  for (std::size_t i = 0; i < s.size(); ++i) {
    os << s.node[i] << ',' << s.time[i] << ',';
    if (s.parent[i] >= 0)
      os << s.node[s.parent[i]];
    else
      os << '-';
    os << ',' << dir_name(s.dir[i]) << ',' << s.level[i] << ',' << (s.node[i] == vt ? 1 : 0) << ','
       << s.degree[i] << '\n';
  }
}

Snapshot read_trace_csv(std::istream& is) {
  Snapshot s;
  std::string line;
  std::vector<std::pair<int, NodeId>> parents;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string tok;
      while (ls >> tok) {
        if (tok.rfind("T=", 0) == 0) s.T = std::stoi(tok.substr(2));
        else if (tok.rfind("source=", 0) == 0) s.source = std::stoull(tok.substr(7));
        else if (tok.rfind("last_pass=", 0) == 0) s.last_pass = tok.substr(10) == "1";
        else if (tok.rfind("vs=", 0) == 0 || (!s.vs.empty() && tok.find(':') != std::string::npos)) {
          std::string v = tok.rfind("vs=", 0) == 0 ? tok.substr(3) : tok;
          auto c = v.find(':');
          s.vs.push_back(std::stoull(v.substr(0, c)));
          s.hs.push_back(std::stoi(v.substr(c + 1)));
        }
      }
      continue;
    }
    if (!header) {
      header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string f[7];
    for (int k = 0; k < 7; ++k)
      if (!std::getline(ls, f[k], ',') && k < 6)
        throw Error(ErrorKind::Parse, "trace line " + std::to_string(lineno) + ": too few fields");
    try {
      int i = s.add(std::stoull(f[0]), std::stoi(f[1]), -1, f[6].empty() ? 0 : std::stoi(f[6]));
      s.dir[i] = f[3] == "up" ? Dir::Up : f[3] == "down" ? Dir::Down : Dir::None;
      s.level[i] = std::stoi(f[4]);
      if (f[2] != "-") parents.emplace_back(i, std::stoull(f[2]));
    } catch (const std::invalid_argument&) {
      throw Error(ErrorKind::Parse, "trace line " + std::to_string(lineno) + ": bad number");
    }
  }
  for (auto [i, pid] : parents) {
    int j = s.idx(pid);
    require(j >= 0, ErrorKind::Parse, "trace parent " + std::to_string(pid) + " is not a listed node");
    s.parent[i] = j;
  }
  return s;
}

}  // namespace adlab
