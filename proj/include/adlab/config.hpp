#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "adlab/adversary.hpp"
#include "adlab/graph.hpp"
#include "adlab/spread.hpp"

namespace adlab {

enum class NetworkSpec { RegularTree, GaltonWatson, Grid, Line, File, Synthetic };

using KeyValues = std::map<std::string, std::string>;

struct ExperimentConfig {
  NetworkSpec network = NetworkSpec::RegularTree;
  int d = 3;
  DegreeDistribution dist;
  std::string graph_path;
  int prune_k = 0;
  std::size_t synth_nodes = 10000;
  double synth_gamma = 2.5;
  double synth_mean_degree = 8;
  int line_n = 101;

  ProtocolParams protocol;
  EstimatorKind estimator = EstimatorKind::SnapshotRegular;
  double p = 0;  // spy probability

  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  bool wilson = false;
  double gate_z = 3;
  bool gate = false;
  std::string out;
  std::string trials_out;

  void validate() const;
};

// "key = value" lines, '#' comments; later keys override earlier ones
KeyValues parse_key_values(const std::string& text, const std::string& origin = "config");
KeyValues load_key_values(const std::string& path);
ExperimentConfig config_from(const KeyValues& kv);
std::vector<std::string> config_keys();

// ADLAB_OUT_DIR joined with a relative name; the name unchanged otherwise
std::string resolve_output(const std::string& name);

const char* protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& s);

}  // namespace adlab
