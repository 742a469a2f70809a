#pragma once
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "adlab/error.hpp"

namespace adlab {

using NodeId = std::uint64_t;
inline constexpr NodeId kNoNode = ~NodeId{0};

struct DegreeDistribution {
  std::vector<int> f;     // strictly increasing support, each >= 2
  std::vector<double> p;  // sums to 1

  void validate() const;
  double mean_offspring() const;  // E[D-1]
  int sample(double u) const;     // inverse CDF, u in [0,1)
  static DegreeDistribution parse(const std::string& text);  // "3:0.5,4:0.5"
  std::string str() const;
};

enum class NetKind { RegularTree, GaltonWatson, Grid, Explicit };

enum class GridDir { E = 0, W = 1, N = 2, S = 3 };

struct LoadStats {
  std::size_t lines = 0;
  std::size_t edges = 0;
  std::size_t duplicates = 0;
  std::size_t self_loops = 0;
};

class Network {
 public:
  static Network regular_tree(int d, std::uint64_t seed = 0);
  static Network galton_watson(const DegreeDistribution& D, std::uint64_t seed);
  static Network grid(std::uint64_t seed = 0);
  static Network from_edges(const std::vector<std::pair<NodeId, NodeId>>& edges,
                            LoadStats* stats = nullptr);

  NetKind kind() const { return kind_; }
  bool is_tree() const;
  bool finite() const { return kind_ == NetKind::Explicit; }
  NodeId root() const;
  int regular_degree() const { return d_; }
  const DegreeDistribution& distribution() const { return dist_; }
  std::uint64_t seed() const { return seed_; }

  bool contains(NodeId v) const;
  int degree(NodeId v) const;
  // trees: parent first, then children in index order; grid: E, W, N, S
  void neighbors(NodeId v, std::vector<NodeId>& out) const;
  std::vector<NodeId> neighbors(NodeId v) const {
    std::vector<NodeId> out;
    neighbors(v, out);
    return out;
  }

  int distance(NodeId a, NodeId b) const;
  std::vector<NodeId> path(NodeId a, NodeId b) const;  // inclusive of both ends

  // lazy trees
  NodeId tree_parent(NodeId v) const;
  int tree_depth(NodeId v) const;

  // grid
  static NodeId grid_encode(std::int64_t x, std::int64_t y);
  static std::pair<std::int64_t, std::int64_t> grid_decode(NodeId v);
  static GridDir grid_direction(NodeId from, NodeId to);
  static NodeId grid_step(NodeId v, GridDir d);

  // explicit
  std::size_t num_nodes() const { return adj_.size(); }
  std::size_t num_edges() const;
  std::vector<NodeId> nodes() const;
  Network prune_min_degree(int k, bool iterative = true) const;

 private:
  struct TreeNode {
    NodeId parent;
    int depth;
    int degree;
    bool expanded = false;
    std::vector<NodeId> nbrs;
  };

  NetKind kind_ = NetKind::Explicit;
  int d_ = 0;
  DegreeDistribution dist_;
  std::uint64_t seed_ = 0;

  // lazy tree cache; logically const
  mutable std::unordered_map<NodeId, TreeNode> tree_;
  // explicit adjacency
  std::unordered_map<NodeId, std::vector<NodeId>> adj_;
  bool acyclic_ = false;

  int draw_degree(NodeId v) const;
  TreeNode& tree_node(NodeId v) const;
  void expand(TreeNode& tn, NodeId v) const;
  std::vector<NodeId> bfs_path(NodeId a, NodeId b) const;
};

Network load_edge_list(const std::string& path, LoadStats* stats = nullptr);

// Chung-Lu style graph with power-law expected degrees (edges drawn by weight, duplicates dropped)
Network synthetic_power_law(std::size_t n, double gamma, double mean_degree, std::uint64_t seed);

}  // namespace adlab
