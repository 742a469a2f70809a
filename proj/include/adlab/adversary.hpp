#pragma once
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "adlab/graph.hpp"
#include "adlab/rng.hpp"
#include "adlab/spread.hpp"

namespace adlab {

enum class EstimatorKind {
  SnapshotRegular,
  IrregularMl,
  MapLeaf,
  PaadMap,
  SpyMl,
  SpyIrregular,
  FirstSpy,
  LineMl,
  SpySnapshot,
  MultiSnapshot,
};

const char* estimator_name(EstimatorKind k);
EstimatorKind estimator_from_name(const std::string& s);

enum class TieBreak { Random, LowestId };

struct Estimate {
  EstimatorKind kind = EstimatorKind::SnapshotRegular;
  NodeId v = kNoNode;
  std::vector<NodeId> candidates;  // explicit candidates (empty when the set is implicit)
  std::vector<double> scores;      // aligned with candidates, likelihood up to a shared constant
  double set_size = 0;             // |U|
  int ties = 0;
  double scale = 1;  // irregular ML: multiply a score by this to get P(G_T | v)
  double detection = std::numeric_limits<double>::quiet_NaN();  // conditional P(v = v*), when known
  double lambda = 0;                                            // MAP leaf extremal value
  bool inconclusive = false;
  std::string note;
};

// picks uniformly among maximal scores (within relative 1e-12)
NodeId break_ties(const std::vector<NodeId>& cand, const std::vector<double>& score, Rng* rng,
                  TieBreak tb, int* ties);

Estimate estimate_snapshot_regular(const Snapshot& s, Rng& rng, TieBreak tb = TieBreak::Random);
Estimate estimate_irregular_ml(const Snapshot& s, int d0, Rng& rng, TieBreak tb = TieBreak::Random,
                               bool leaves_only = false);
double oracle_trajectory_likelihood(const Snapshot& s, NodeId candidate, int d0);
Estimate estimate_map_leaf(const Snapshot& s, Rng& rng, TieBreak tb = TieBreak::Random);
Estimate estimate_paad_map(const Network& net, const Snapshot& s, int g, Rng& rng,
                           TieBreak tb = TieBreak::Random);
Estimate estimate_first_spy(const std::vector<SpyObservation>& obs, Rng& rng);

// Pivot bookkeeping for the spy estimators.
struct PivotInfo {
  NodeId spy = kNoNode;
  NodeId pivot = kNoNode;       // l_s
  NodeId eliminated = kNoNode;  // k_s, the pivot's neighbour toward the spy
  int h_spy_pivot = 0;
  int h_pivot_s0 = 0;
  int level = 0;  // protocol level of the pivot
};

struct SpyAnalysis {
  bool found = false;  // some spy reported the Up direction
  std::size_t s0 = 0;  // index into the observations
  NodeId p0 = kNoNode;
  int m0 = 0;
  std::vector<PivotInfo> pivots;  // one per usable spy inside the feasible region
  int min_pivot = -1;             // index into pivots
};

SpyAnalysis analyze_spies(const Network& net, const std::vector<SpyObservation>& obs);

// Pivot estimator for the tree protocol. `weighted` re-weights candidates by the irregular-tree rule.
Estimate estimate_spy_ml(const Network& net, const std::vector<SpyObservation>& obs, Rng& rng,
                         bool weighted = false, std::size_t node_cap = 2000000);
Estimate estimate_spy_irregular(const Network& net, const std::vector<SpyObservation>& obs, Rng& rng,
                                const Snapshot* trace = nullptr);

// Pivot adversary with a snapshot at even T (tree protocol on a tree).
Estimate estimate_spy_snapshot(const Snapshot& s, const std::vector<SpyObservation>& obs, Rng& rng);

// Snapshot at T plus later snapshots; worst case: h_T is revealed exactly.
Estimate estimate_multi_snapshot(const Snapshot& s, NodeId next_vs, Rng& rng);

struct LineEstimate {
  int v = 0;
  bool impossible = false;
};
LineEstimate estimate_line_ml(int T1, double q, bool left);

}  // namespace adlab
