#include "adlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <sstream>

#include "adlab/rng.hpp"

namespace adlab {

void DegreeDistribution::validate() const {
  require(!f.empty() && f.size() == p.size(), ErrorKind::InvalidParameter,
          "degree distribution: support and probabilities must be non-empty and equal length");
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    require(f[i] >= 2, ErrorKind::InvalidParameter, "degree distribution: support values must be >= 2");
    require(i == 0 || f[i] > f[i - 1], ErrorKind::InvalidParameter,
            "degree distribution: support must be strictly increasing");
    require(p[i] >= 0, ErrorKind::InvalidParameter, "degree distribution: negative probability");
    s += p[i];
  }
  require(std::abs(s - 1.0) <= 1e-12, ErrorKind::InvalidParameter,
          "degree distribution: probabilities must sum to 1");
}

double DegreeDistribution::mean_offspring() const {
  double m = 0;
  for (std::size_t i = 0; i < f.size(); ++i) m += p[i] * (f[i] - 1);
  return m;
}

int DegreeDistribution::sample(double u) const {
  double c = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    c += p[i];
    if (u < c) return f[i];
  }
  return f.back();
}

DegreeDistribution DegreeDistribution::parse(const std::string& text) {
  DegreeDistribution D;
  std::vector<std::pair<int, double>> items;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto colon = tok.find(':');
    require(colon != std::string::npos, ErrorKind::Parse, "degree distribution entry '" + tok + "' lacks ':'");
    try {
      items.emplace_back(std::stoi(tok.substr(0, colon)), std::stod(tok.substr(colon + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, "degree distribution entry '" + tok + "' is not numeric");
    }
  }
  std::sort(items.begin(), items.end());
  for (auto& [k, v] : items) {
    D.f.push_back(k);
    D.p.push_back(v);
  }
  D.validate();
  return D;
}

std::string DegreeDistribution::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f[i] << ':' << p[i];
  return os.str();
}

// ---- construction

Network Network::regular_tree(int d, std::uint64_t seed) {
  require(d >= 2, ErrorKind::InvalidParameter, "regular tree needs d >= 2");
  Network n;
  n.kind_ = NetKind::RegularTree;
  n.d_ = d;
  n.seed_ = seed;
  n.tree_.emplace(0, TreeNode{kNoNode, 0, d, false, {}});
  return n;
}

Network Network::galton_watson(const DegreeDistribution& D, std::uint64_t seed) {
  D.validate();
  Network n;
  n.kind_ = NetKind::GaltonWatson;
  n.dist_ = D;
  n.seed_ = seed;
  n.tree_.emplace(0, TreeNode{kNoNode, 0, n.draw_degree(0), false, {}});
  return n;
}

Network Network::grid(std::uint64_t seed) {
  Network n;
  n.kind_ = NetKind::Grid;
  n.d_ = 4;
  n.seed_ = seed;
  return n;
}

Network Network::from_edges(const std::vector<std::pair<NodeId, NodeId>>& edges, LoadStats* stats) {
  Network n;
  n.kind_ = NetKind::Explicit;
  LoadStats local;
  LoadStats& st = stats ? *stats : local;
  for (auto [u, v] : edges) {
    if (u == v) {
      ++st.self_loops;
      continue;
    }
    n.adj_[u].push_back(v);
    n.adj_[v].push_back(u);
  }
  std::size_t half = 0;
  for (auto& [id, nb] : n.adj_) {
    std::sort(nb.begin(), nb.end());
    auto before = nb.size();
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    st.duplicates += before - nb.size();
    half += nb.size();
  }
  st.duplicates /= 2;
  st.edges = half / 2;

  // acyclic iff |E| = |V| - components
  std::unordered_map<NodeId, bool> seen;
  std::size_t comps = 0;
  for (auto& [id, nb] : n.adj_) {
    if (seen.count(id)) continue;
    ++comps;
    std::deque<NodeId> q{id};
    seen[id] = true;
    while (!q.empty()) {
      NodeId u = q.front();
      q.pop_front();
      for (NodeId w : n.adj_[u])
        if (!seen.count(w)) {
          seen[w] = true;
          q.push_back(w);
        }
    }
  }
  n.acyclic_ = st.edges + comps == n.adj_.size();
  return n;
}

Network load_edge_list(const std::string& path, LoadStats* stats) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open edge list '" + path + "'");
  std::vector<std::pair<NodeId, NodeId>> edges;
  LoadStats local;
  LoadStats& st = stats ? *stats : local;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == '%') continue;
    std::istringstream ls(line);
    long long a, b;
    if (!(ls >> a >> b) || a < 0 || b < 0)
      throw Error(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": expected two non-negative integer ids");
    ++st.lines;
    edges.emplace_back(static_cast<NodeId>(a), static_cast<NodeId>(b));
  }
  require(!in.bad(), ErrorKind::Io, "read error on '" + path + "'");
  return Network::from_edges(edges, &st);
}

// ---- lazy trees

int Network::draw_degree(NodeId v) const {
  if (kind_ == NetKind::RegularTree) return d_;
  return dist_.sample(hash_unit(mix(seed_, v)));
}

Network::TreeNode& Network::tree_node(NodeId v) const {
  auto it = tree_.find(v);
  require(it != tree_.end(), ErrorKind::InvalidNode, "node " + std::to_string(v) + " not in network");
  return it->second;
}

void Network::expand(TreeNode& tn, NodeId v) const {
  if (tn.expanded) return;
  tn.nbrs.clear();
  if (tn.parent != kNoNode) tn.nbrs.push_back(tn.parent);
  int kids = tn.degree - (tn.parent != kNoNode ? 1 : 0);
  for (int i = 0; i < kids; ++i) {
    NodeId c = mix(v, static_cast<std::uint64_t>(i) + 1);
    if (c == 0 || c == kNoNode) c = splitmix64(c + 1);
    auto [it, fresh] = tree_.try_emplace(c, TreeNode{v, tn.depth + 1, 0, false, {}});
    require(fresh || it->second.parent == v, ErrorKind::InvalidNode, "lazy tree id collision");
    if (fresh) it->second.degree = draw_degree(c);
    tn.nbrs.push_back(c);
  }
  tn.expanded = true;
}

bool Network::is_tree() const {
  switch (kind_) {
    case NetKind::RegularTree:
    case NetKind::GaltonWatson:
      return true;
    case NetKind::Grid:
      return false;
    case NetKind::Explicit:
      return acyclic_;
  }
  return false;
}

NodeId Network::root() const {
  switch (kind_) {
    case NetKind::Grid:
      return grid_encode(0, 0);
    case NetKind::Explicit: {
      require(!adj_.empty(), ErrorKind::InvalidNode, "empty graph has no root");
      NodeId best = kNoNode;
      for (auto& kv : adj_) best = std::min(best, kv.first);
      return best;
    }
    default:
      return 0;
  }
}

bool Network::contains(NodeId v) const {
  switch (kind_) {
    case NetKind::Grid:
      return true;
    case NetKind::Explicit:
      return adj_.count(v) > 0;
    default:
      return tree_.count(v) > 0;
  }
}

int Network::degree(NodeId v) const {
  switch (kind_) {
    case NetKind::Grid:
      return 4;
    case NetKind::Explicit: {
      auto it = adj_.find(v);
      require(it != adj_.end(), ErrorKind::InvalidNode, "node " + std::to_string(v) + " not in graph");
      return static_cast<int>(it->second.size());
    }
    default:
      return tree_node(v).degree;
  }
}

void Network::neighbors(NodeId v, std::vector<NodeId>& out) const {
  out.clear();
  switch (kind_) {
    case NetKind::Grid:
      for (int k = 0; k < 4; ++k) out.push_back(grid_step(v, static_cast<GridDir>(k)));
      return;
    case NetKind::Explicit: {
      auto it = adj_.find(v);
      require(it != adj_.end(), ErrorKind::InvalidNode, "node " + std::to_string(v) + " not in graph");
      out = it->second;
      return;
    }
    default: {
      TreeNode& tn = tree_node(v);
      expand(tn, v);
      out = tn.nbrs;
    }
  }
}

NodeId Network::tree_parent(NodeId v) const {
  require(kind_ == NetKind::RegularTree || kind_ == NetKind::GaltonWatson, ErrorKind::Unsupported,
          "tree_parent needs a lazy tree");
  return tree_node(v).parent;
}

int Network::tree_depth(NodeId v) const {
  require(kind_ == NetKind::RegularTree || kind_ == NetKind::GaltonWatson, ErrorKind::Unsupported,
          "tree_depth needs a lazy tree");
  return tree_node(v).depth;
}

std::vector<NodeId> Network::path(NodeId a, NodeId b) const {
  if (kind_ == NetKind::RegularTree || kind_ == NetKind::GaltonWatson) {
    std::vector<NodeId> up, down;
    NodeId x = a, y = b;
    int dx = tree_depth(x), dy = tree_depth(y);
    while (dx > dy) { up.push_back(x); x = tree_parent(x); --dx; }
    while (dy > dx) { down.push_back(y); y = tree_parent(y); --dy; }
    while (x != y) {
      up.push_back(x);
      down.push_back(y);
      x = tree_parent(x);
      y = tree_parent(y);
    }
    up.push_back(x);
    up.insert(up.end(), down.rbegin(), down.rend());
    return up;
  }
  if (kind_ == NetKind::Grid) {
    auto [x0, y0] = grid_decode(a);
    auto [x1, y1] = grid_decode(b);
    std::vector<NodeId> p{a};
    while (x0 != x1) { x0 += x1 > x0 ? 1 : -1; p.push_back(grid_encode(x0, y0)); }
    while (y0 != y1) { y0 += y1 > y0 ? 1 : -1; p.push_back(grid_encode(x0, y0)); }
    return p;
  }
  return bfs_path(a, b);
}

std::vector<NodeId> Network::bfs_path(NodeId a, NodeId b) const {
  require(adj_.count(a) && adj_.count(b), ErrorKind::InvalidNode, "path endpoint not in graph");
  std::unordered_map<NodeId, NodeId> prev{{a, a}};
  std::deque<NodeId> q{a};
  while (!q.empty() && !prev.count(b)) {
    NodeId u = q.front();
    q.pop_front();
    for (NodeId w : adj_.at(u))
      if (prev.emplace(w, u).second) q.push_back(w);
  }
  if (!prev.count(b)) return {};
  std::vector<NodeId> p{b};
  while (p.back() != a) p.push_back(prev[p.back()]);
  std::reverse(p.begin(), p.end());
  return p;
}

int Network::distance(NodeId a, NodeId b) const {
  if (kind_ == NetKind::Grid) {
    auto [x0, y0] = grid_decode(a);
    auto [x1, y1] = grid_decode(b);
    return static_cast<int>(std::llabs(x0 - x1) + std::llabs(y0 - y1));
  }
  auto p = path(a, b);
  return p.empty() ? -1 : static_cast<int>(p.size()) - 1;
}

// ---- grid: zig-zag each coordinate, interleave bits

namespace {
std::uint64_t spread_bits(std::uint64_t x) {
  x &= 0xffffffffULL;
  x = (x | (x << 16)) & 0x0000ffff0000ffffULL;
  x = (x | (x << 8)) & 0x00ff00ff00ff00ffULL;
  x = (x | (x << 4)) & 0x0f0f0f0f0f0f0f0fULL;
  x = (x | (x << 2)) & 0x3333333333333333ULL;
  x = (x | (x << 1)) & 0x5555555555555555ULL;
  return x;
}
std::uint64_t gather_bits(std::uint64_t x) {
  x &= 0x5555555555555555ULL;
  x = (x | (x >> 1)) & 0x3333333333333333ULL;
  x = (x | (x >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
  x = (x | (x >> 4)) & 0x00ff00ff00ff00ffULL;
  x = (x | (x >> 8)) & 0x0000ffff0000ffffULL;
  x = (x | (x >> 16)) & 0x00000000ffffffffULL;
  return x;
}
std::uint64_t zig(std::int64_t v) { return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63); }
std::int64_t zag(std::uint64_t u) { return static_cast<std::int64_t>(u >> 1) ^ -static_cast<std::int64_t>(u & 1); }
}  // namespace

NodeId Network::grid_encode(std::int64_t x, std::int64_t y) {
  require(x > -(1LL << 31) && x < (1LL << 31) && y > -(1LL << 31) && y < (1LL << 31),
          ErrorKind::InvalidParameter, "grid coordinate out of range");
  return spread_bits(zig(x)) | (spread_bits(zig(y)) << 1);
}

std::pair<std::int64_t, std::int64_t> Network::grid_decode(NodeId v) {
  return {zag(gather_bits(v)), zag(gather_bits(v >> 1))};
}

NodeId Network::grid_step(NodeId v, GridDir d) {
  auto [x, y] = grid_decode(v);
  switch (d) {
    case GridDir::E: return grid_encode(x + 1, y);
    case GridDir::W: return grid_encode(x - 1, y);
    case GridDir::N: return grid_encode(x, y + 1);
    case GridDir::S: return grid_encode(x, y - 1);
  }
  return v;
}

GridDir Network::grid_direction(NodeId from, NodeId to) {
  auto [x0, y0] = grid_decode(from);
  auto [x1, y1] = grid_decode(to);
  if (x1 == x0 + 1 && y1 == y0) return GridDir::E;
  if (x1 == x0 - 1 && y1 == y0) return GridDir::W;
  if (y1 == y0 + 1 && x1 == x0) return GridDir::N;
  require(y1 == y0 - 1 && x1 == x0, ErrorKind::InvalidParameter, "grid nodes are not adjacent");
  return GridDir::S;
}

// ---- explicit

std::size_t Network::num_edges() const {
  std::size_t s = 0;
  for (auto& kv : adj_) s += kv.second.size();
  return s / 2;
}

std::vector<NodeId> Network::nodes() const {
  std::vector<NodeId> out;
  out.reserve(adj_.size());
  for (auto& kv : adj_) out.push_back(kv.first);
  std::sort(out.begin(), out.end());
  return out;
}

Network Network::prune_min_degree(int k, bool iterative) const {
  require(kind_ == NetKind::Explicit, ErrorKind::Unsupported, "pruning needs an explicit graph");
  std::unordered_map<NodeId, int> deg;
  for (auto& [v, nb] : adj_) deg[v] = static_cast<int>(nb.size());
  std::unordered_map<NodeId, bool> gone;
  std::vector<NodeId> stack;
  for (auto& [v, d] : deg)
    if (d < k) {
      gone[v] = true;
      stack.push_back(v);
    }
  if (iterative) {
    while (!stack.empty()) {
      NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : adj_.at(v)) {
        if (gone.count(w)) continue;
        if (--deg[w] < k) {
          gone[w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (auto& [v, nb] : adj_) {
    if (gone.count(v)) continue;
    for (NodeId w : nb)
      if (v < w && !gone.count(w)) edges.emplace_back(v, w);
  }
  Network out = from_edges(edges);
  // keep surviving isolated nodes (single-pass mode can leave them)
  for (auto& [v, nb] : adj_)
    if (!gone.count(v)) out.adj_.try_emplace(v);
  return out;
}

Network synthetic_power_law(std::size_t n, double gamma, double mean_degree, std::uint64_t seed) {
  require(n >= 2, ErrorKind::InvalidParameter, "synthetic graph needs n >= 2");
  require(gamma > 2, ErrorKind::InvalidParameter, "power-law exponent must exceed 2");
  require(mean_degree > 0, ErrorKind::InvalidParameter, "mean degree must be positive");
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(i + 1.0, -1.0 / (gamma - 1));
  Rng rng(mix(seed, 0xC1ULL));
  std::discrete_distribution<std::size_t> endpoint(w.begin(), w.end());
  const auto m = static_cast<std::size_t>(std::llround(n * mean_degree / 2));
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(m);
  for (std::size_t e = 0; e < m; ++e) edges.emplace_back(endpoint(rng), endpoint(rng));
  return Network::from_edges(edges);
}

}  // namespace adlab
