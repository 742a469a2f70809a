#pragma once
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "adlab/config.hpp"

namespace adlab {

struct TrialRecord {
  bool detected = false;
  bool inconclusive = false;
  bool failed = false;  // the trial threw; counted as a miss
  NodeId estimate = kNoNode;
  NodeId source = kNoNode;
  double set_size = 0;
  int hop = -1;  // -1 when there is no estimate
  double infected = 0;
  int h = 0;  // virtual-source distance at T, when the protocol has one
  std::string error;
};

struct Interval {
  double lo = 0, hi = 0;
};
Interval normal_ci(std::size_t hits, std::size_t n, double z = 1.96);
Interval wilson_ci(std::size_t hits, std::size_t n, double z = 1.96);

enum class PredictionKind { None, Value, Upper, Lower };
struct Prediction {
  PredictionKind kind = PredictionKind::None;
  double value = 0;
  std::string name;
};
Prediction predict_for(const ExperimentConfig& cfg);
const char* prediction_kind_name(PredictionKind k);

struct SummaryRow {
  std::string param;
  std::string value;
  std::size_t trials = 0;
  std::size_t detected = 0;
  std::size_t inconclusive = 0;
  std::size_t failed = 0;
  double pd = 0;
  double ci_half = 0;
  Interval ci;
  double mean_hop = 0;
  double mean_infected = 0;
  double mean_h = 0;
  Prediction prediction;
  bool flagged = false;
};

struct ExperimentSummary {
  std::vector<SummaryRow> rows;
  bool any_flag() const;
};

// Network shared by all trials; lazy trees are rebuilt per trial since they cache on access.
std::shared_ptr<const Network> build_shared_network(const ExperimentConfig& cfg);

TrialRecord run_trial(const ExperimentConfig& cfg, const Network* shared, std::uint64_t trial);
std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg);
SummaryRow summarize(const ExperimentConfig& cfg, const std::vector<TrialRecord>& recs);

ExperimentSummary run_experiment(const ExperimentConfig& cfg, std::vector<TrialRecord>* records = nullptr);
ExperimentSummary sweep(const KeyValues& base, const std::string& param, const std::vector<std::string>& values);

// flags rows outside the tolerance band; returns the number flagged
int compare_with_theory(ExperimentSummary& s, double z);

void write_summary_csv(std::ostream& os, const ExperimentSummary& s);
void write_trials_csv(std::ostream& os, const ExperimentConfig& cfg, const std::vector<TrialRecord>& recs);

}  // namespace adlab
