#pragma once
#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "adlab/graph.hpp"
#include "adlab/rng.hpp"

namespace adlab {

enum class Protocol { Adaptive, TreeProtocol, GridAdaptive, Paad, Diffusion, Deterministic, PolyaLine };
enum class AlphaPolicy { Exact, AlwaysPass, FixedTable };
enum class Dir : std::int8_t { None = 0, Up = 1, Down = 2 };

inline constexpr int kD0Infinity = -1;

struct ProtocolParams {
  Protocol kind = Protocol::Adaptive;
  AlphaPolicy alpha = AlphaPolicy::Exact;
  int d0 = 0;                       // 0: use the regular tree's own degree; kD0Infinity: always pass
  std::vector<double> alpha_table;  // keep probability per decision (t=3,5,...); last entry repeats
  double q = 0.5;
  int g = 1;
  int fanout_cap = -1;  // -1: 3 on explicit graphs, unlimited elsewhere; 0: unlimited
  int T = 0;

  void validate() const;
  int effective_cap(const Network& net) const;
};

struct Snapshot {
  Protocol protocol = Protocol::Adaptive;
  int T = 0;
  NodeId source = kNoNode;

  // per infected node, in infection order; index 0 is the source
  std::vector<NodeId> node;
  std::vector<int> time;
  std::vector<int> parent;  // local index, -1 for the source
  std::vector<int> degree;  // network degree
  std::vector<Dir> dir;
  std::vector<int> level;
  std::vector<int> free_deg;  // uninfected neighbours when the node first forwarded (cycle correction)

  // virtual source history: vs[t], hs[t] for t = 0..T
  std::vector<NodeId> vs;
  std::vector<int> hs;
  bool last_pass = false;  // odd T: whether the decision at T was a pass
  std::int64_t hH = 0, hV = 0;

  std::unordered_map<NodeId, int> index;

  std::size_t size() const { return node.size(); }
  int idx(NodeId v) const {
    auto it = index.find(v);
    return it == index.end() ? -1 : it->second;
  }
  bool infected(NodeId v) const { return index.count(v) > 0; }
  NodeId virtual_source() const { return vs.empty() ? kNoNode : vs.back(); }
  int h() const { return hs.empty() ? 0 : hs.back(); }

  int add(NodeId v, int t, int par, int deg);
  std::vector<std::vector<int>> tree_adj() const;  // infection tree, local indices
  std::vector<int> tree_distances(int from) const;
  std::vector<int> leaves() const;  // infection-tree degree <= 1 (excluding a lone source)
};

double alpha_regular(int d, int t, int h);
double alpha_grid(int t, int h);

Snapshot spread_adaptive(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng);
Snapshot spread_paad(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng);
Snapshot spread_tree_protocol(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng);
Snapshot spread_grid(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng);
Snapshot spread_diffusion(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng);
Snapshot spread_deterministic(const Network& net, NodeId source, int T);
Snapshot spread(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng);

// |N_g(w, from)|: nodes within g hops of w reached without passing through `from`
std::size_t paad_weight(const Network& net, NodeId w, NodeId from, int g);

// Continue an adaptive-diffusion snapshot until the virtual source next moves; returns the new one.
NodeId next_virtual_source(const Network& net, const Snapshot& s, const ProtocolParams& p, Rng& rng);

// Spy assignment: i.i.d. with probability p, never the source, keyed by node id.
struct SpySet {
  std::uint64_t seed = 0;
  double p = 0;
  NodeId source = kNoNode;
  bool is_spy(NodeId v) const {
    return v != source && p > 0 && hash_unit(mix(seed ^ 0x5157ULL, v)) < p;
  }
};

struct SpyObservation {
  NodeId spy = kNoNode;
  int time = 0;
  NodeId parent = kNoNode;
  Dir dir = Dir::None;
  int level = 0;
};

std::vector<SpyObservation> observe(const Snapshot& s, const SpySet& spies);

// Tree protocol run with spies: stops once the first spine spy's feasible region has
// been fully reached (time 2*m0), or at the cap.
struct SpyRun {
  Snapshot snap;
  std::vector<SpyObservation> obs;
  bool spine_spy_found = false;
};
SpyRun run_tree_protocol_with_spies(const Network& net, NodeId source, const SpySet& spies,
                                    const ProtocolParams& p, Rng& rng, int cap = 10000);

// Structural sampler for the tree protocol on a lazy regular tree: walks the spine and draws
// spy presence per down branch, materialising one concrete spy per spied branch.
struct SpineSample {
  NodeId source = 0;
  std::vector<NodeId> spine;  // spine[k] infected at time k
  std::vector<SpyObservation> obs;
  bool found = false;  // reached a spine spy before the cap
};
SpineSample sample_spy_tree_regular(const Network& net, double p, Rng& rng, int cap = 10000);

// Polya-urn line protocol with spies at 0 and n+1.
struct PolyaRun {
  int n = 0;
  int source = 0;
  double q = 0;
  bool left = true;
  int T1 = 0;  // time spy 0 receives the message
  int T2 = 0;  // time spy n+1 receives it
  std::vector<int> hs;  // h_t for t = 0..max(T1,T2,horizon)
};
PolyaRun spread_polya_line(int n, int source, Rng& rng, int horizon = 0);

void write_trace_csv(std::ostream& os, const Snapshot& s);
Snapshot read_trace_csv(std::istream& is);

}  // namespace adlab
