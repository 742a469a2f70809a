#include "adlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "adlab/analysis.hpp"

namespace adlab {

Interval normal_ci(std::size_t hits, std::size_t n, double z) {
  if (n == 0) return {0, 1};
  double p = static_cast<double>(hits) / n;
  double half = z * std::sqrt(p * (1 - p) / n);
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

Interval wilson_ci(std::size_t hits, std::size_t n, double z) {
  if (n == 0) return {0, 1};
  double p = static_cast<double>(hits) / n, z2 = z * z;
  double den = 1 + z2 / n;
  double mid = (p + z2 / (2.0 * n)) / den;
  double half = z * std::sqrt(p * (1 - p) / n + z2 / (4.0 * n * n)) / den;
  return {std::max(0.0, mid - half), std::min(1.0, mid + half)};
}

const char* prediction_kind_name(PredictionKind k) {
  switch (k) {
    case PredictionKind::Value: return "value";
    case PredictionKind::Upper: return "upper";
    case PredictionKind::Lower: return "lower";
    case PredictionKind::None: break;
  }
  return "none";
}

bool ExperimentSummary::any_flag() const {
  return std::any_of(rows.begin(), rows.end(), [](const SummaryRow& r) { return r.flagged; });
}

Prediction predict_for(const ExperimentConfig& c) {
  Prediction pr;
  const auto& P = c.protocol;
  const int T = P.T;
  auto set = [&](PredictionKind k, double v, const char* name) {
    pr.kind = k;
    pr.value = v;
    pr.name = name;
  };
  if (c.estimator == EstimatorKind::FirstSpy) {
    if (c.network == NetworkSpec::RegularTree && P.kind == Protocol::Diffusion)
      set(PredictionKind::Lower, pd_first_spy_diffusion(c.d, P.q, c.p), "first_spy_diffusion");
    else
      set(PredictionKind::Lower, c.p, "spy_fraction");
    return pr;
  }
  if (c.network == NetworkSpec::Line && c.estimator == EstimatorKind::LineMl) {
    set(PredictionKind::Upper, line_bound(c.line_n), "line_bound");
    return pr;
  }
  if (c.network == NetworkSpec::Grid && P.kind == Protocol::GridAdaptive &&
      c.estimator == EstimatorKind::SnapshotRegular && T >= 2 && T % 2 == 0 && P.alpha == AlphaPolicy::Exact) {
    set(PredictionKind::Upper, grid_predictions(T).pd_upper, "grid_bound");
    return pr;
  }
  if (c.network != NetworkSpec::RegularTree) return pr;
  const int d = c.d;
  const bool exact = P.alpha == AlphaPolicy::Exact && (P.d0 == 0 || P.d0 == d);
  const bool always_pass = P.alpha == AlphaPolicy::AlwaysPass || P.d0 == kD0Infinity;
  if (P.kind == Protocol::Adaptive && c.estimator == EstimatorKind::SnapshotRegular && exact) {
    if (T == 1) set(PredictionKind::Value, 1.0, "visible_virtual_source");
    else if (T >= 2 && T % 2 == 0)
      set(PredictionKind::Value, 1.0 / (n_regular(d, T, Branch::Even) - 1), "uniform_non_virtual_source");
    else if (T >= 3) set(PredictionKind::Upper, pd_snapshot_bound(d, T), "snapshot_bound");
  } else if (P.kind == Protocol::Adaptive && c.estimator == EstimatorKind::MapLeaf && always_pass && T >= 2 &&
             T % 2 == 0) {
    set(PredictionKind::Value, pd_always_pass(d, n_regular(d, T, Branch::Even)), "always_pass");
  } else if (P.kind == Protocol::Adaptive && c.estimator == EstimatorKind::MultiSnapshot && exact && d >= 3 &&
             T >= 2 && T % 2 == 0) {
    set(PredictionKind::Value, pd_multiple_snapshots(d, T), "multiple_snapshots");
  } else if (P.kind == Protocol::TreeProtocol && d >= 3 &&
             (c.estimator == EstimatorKind::SpyMl || c.estimator == EstimatorKind::SpyIrregular)) {
    set(PredictionKind::Value, pd_spy_adaptive(d, c.p), "spy_series");
  } else if (P.kind == Protocol::TreeProtocol && d >= 3 && c.estimator == EstimatorKind::SpySnapshot && T >= 2 &&
             T % 2 == 0) {
    set(PredictionKind::Value, pd_spy_snapshot(d, c.p, T), "spy_snapshot");
  }
  return pr;
}

std::shared_ptr<const Network> build_shared_network(const ExperimentConfig& c) {
  if (c.network == NetworkSpec::File) {
    Network n = load_edge_list(c.graph_path);
    if (c.prune_k > 0) n = n.prune_min_degree(c.prune_k);
    return std::make_shared<const Network>(std::move(n));
  }
  if (c.network == NetworkSpec::Synthetic) {
    Network n = synthetic_power_law(c.synth_nodes, c.synth_gamma, c.synth_mean_degree, c.seed);
    if (c.prune_k > 0) n = n.prune_min_degree(c.prune_k);
    return std::make_shared<const Network>(std::move(n));
  }
  return nullptr;
}

namespace {

Network trial_network(const ExperimentConfig& c, std::uint64_t trial) {
  switch (c.network) {
    case NetworkSpec::RegularTree: return Network::regular_tree(c.d, mix(c.seed, trial));
    case NetworkSpec::GaltonWatson: return Network::galton_watson(c.dist, mix(c.seed, trial));
    case NetworkSpec::Grid: return Network::grid(mix(c.seed, trial));
    default: break;
  }
  throw Error(ErrorKind::Config, "network kind has no per-trial instance");
}

int d0_for(const ExperimentConfig& c) {
  if (c.protocol.d0 > 0) return c.protocol.d0;
  require(c.network == NetworkSpec::RegularTree, ErrorKind::Config, "irregular-ml needs an explicit d0");
  return c.d;
}

void finish(TrialRecord& r, const Network& net, const Estimate& e) {
  r.inconclusive = e.inconclusive;
  r.set_size = e.set_size;
  if (e.inconclusive || e.v == kNoNode) return;
  r.estimate = e.v;
  r.detected = e.v == r.source;
  r.hop = r.detected ? 0 : net.distance(e.v, r.source);
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& c, const Network* shared, std::uint64_t trial) {
  TrialRecord r;
  Rng rng = trial_rng(c.seed, trial);

  if (c.estimator == EstimatorKind::LineMl) {
    int src = 1 + static_cast<int>(pick(rng, c.line_n));
    PolyaRun run = spread_polya_line(c.line_n, src, rng);
    r.source = static_cast<NodeId>(src);
    r.h = run.hs.size() > static_cast<std::size_t>(run.T1) ? run.hs[run.T1] : 0;
    LineEstimate le = estimate_line_ml(run.T1, run.q, run.left);
    r.infected = run.T1;
    if (le.impossible) {
      r.inconclusive = true;
      return r;
    }
    r.estimate = static_cast<NodeId>(le.v);
    r.detected = le.v == src;
    r.hop = std::abs(le.v - src);
    r.set_size = 1;
    return r;
  }

  Network local;
  const Network* net = shared;
  if (!net) {
    local = trial_network(c, trial);
    net = &local;
  }
  if (net->finite()) {
    std::vector<NodeId> nodes;
    for (NodeId v : net->nodes())
      if (net->degree(v) > 0) nodes.push_back(v);
    require(!nodes.empty(), ErrorKind::Config, "network has no edges");
    r.source = nodes[pick(rng, nodes.size())];
  } else {
    r.source = net->root();
  }
  const SpySet spies{mix(c.seed ^ 0x5079ULL, trial), c.p, r.source};

  switch (c.estimator) {
    case EstimatorKind::SpyMl:
    case EstimatorKind::SpyIrregular: {
      const bool weighted = c.estimator == EstimatorKind::SpyIrregular;
      if (net->kind() == NetKind::RegularTree) {
        SpineSample ss = sample_spy_tree_regular(*net, c.p, rng);
        r.source = ss.source;
        r.infected = static_cast<double>(ss.spine.size());
        if (!ss.found) {
          r.inconclusive = true;
          return r;
        }
        // counting is exact on regular trees; enumerate only small regions
        finish(r, *net, estimate_spy_ml(*net, ss.obs, rng, weighted, 4096));
      } else {
        SpyRun run = run_tree_protocol_with_spies(*net, r.source, spies, c.protocol, rng);
        r.infected = static_cast<double>(run.snap.size());
        if (!run.spine_spy_found) {
          r.inconclusive = true;
          return r;
        }
        finish(r, *net,
               weighted ? estimate_spy_irregular(*net, run.obs, rng, &run.snap)
                        : estimate_spy_ml(*net, run.obs, rng));
      }
      return r;
    }
    default: break;
  }

  Snapshot s = spread(*net, r.source, c.protocol, rng);
  r.infected = static_cast<double>(s.size());
  r.h = s.h();
  switch (c.estimator) {
    case EstimatorKind::SnapshotRegular: finish(r, *net, estimate_snapshot_regular(s, rng)); break;
    case EstimatorKind::IrregularMl:
      finish(r, *net, estimate_irregular_ml(s, d0_for(c), rng, TieBreak::Random, !net->is_tree()));
      break;
    case EstimatorKind::MapLeaf: finish(r, *net, estimate_map_leaf(s, rng)); break;
    case EstimatorKind::PaadMap: finish(r, *net, estimate_paad_map(*net, s, c.protocol.g, rng)); break;
    case EstimatorKind::FirstSpy: finish(r, *net, estimate_first_spy(observe(s, spies), rng)); break;
    case EstimatorKind::SpySnapshot: finish(r, *net, estimate_spy_snapshot(s, observe(s, spies), rng)); break;
    case EstimatorKind::MultiSnapshot: {
      NodeId next = next_virtual_source(*net, s, c.protocol, rng);
      finish(r, *net, estimate_multi_snapshot(s, next, rng));
      break;
    }
    default: throw Error(ErrorKind::Config, "estimator does not fit this pipeline");
  }
  return r;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& c) {
  c.validate();
  auto shared = build_shared_network(c);
  std::vector<TrialRecord> recs(c.trials);
  // trial 0 runs first so configuration mistakes surface as errors instead of failed rows
  try {
    recs[0] = run_trial(c, shared.get(), 0);
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, std::string("trial 0: ") + e.what());
  }
  int workers = c.threads > 0 ? c.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = static_cast<int>(std::min<std::size_t>(workers, c.trials));
  std::atomic<std::size_t> next{1};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < c.trials;) {
      try {
        recs[i] = run_trial(c, shared.get(), i);
      } catch (const std::exception& e) {
        recs[i] = TrialRecord{};
        recs[i].failed = true;
        recs[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return recs;
}

SummaryRow summarize(const ExperimentConfig& c, const std::vector<TrialRecord>& recs) {
  SummaryRow row;
  row.trials = recs.size();
  std::size_t with_hop = 0;
  double hop = 0, inf = 0, h = 0;
  for (auto& r : recs) {
    row.detected += r.detected;
    row.inconclusive += r.inconclusive;
    row.failed += r.failed;
    if (r.hop >= 0) {
      hop += r.hop;
      ++with_hop;
    }
    inf += r.infected;
    h += r.h;
  }
  const double n = static_cast<double>(row.trials);
  row.pd = row.detected / n;
  row.ci = c.wilson ? wilson_ci(row.detected, row.trials) : normal_ci(row.detected, row.trials);
  row.ci_half = (row.ci.hi - row.ci.lo) / 2;
  row.mean_hop = with_hop ? hop / with_hop : 0;
  row.mean_infected = inf / n;
  row.mean_h = h / n;
  row.prediction = predict_for(c);
  return row;
}

int compare_with_theory(ExperimentSummary& s, double z) {
  int flagged = 0;
  for (auto& r : s.rows) {
    const auto& p = r.prediction;
    const double n = static_cast<double>(r.trials);
    // sigma from the predicted value, floored so an exact 0 or 1 is not infinitely strict
    double v = std::clamp(p.value, 0.0, 1.0);
    double sigma = std::sqrt(std::max(v * (1 - v), 1.0 / n) / n);
    double tol = z * sigma;
    switch (p.kind) {
      case PredictionKind::Value: r.flagged = std::abs(r.pd - p.value) > tol; break;
      case PredictionKind::Upper: r.flagged = r.pd > p.value + tol; break;
      case PredictionKind::Lower: r.flagged = r.pd < p.value - tol; break;
      case PredictionKind::None: r.flagged = false; break;
    }
    flagged += r.flagged;
  }
  return flagged;
}

ExperimentSummary run_experiment(const ExperimentConfig& c, std::vector<TrialRecord>* records) {
  auto recs = run_trials(c);
  ExperimentSummary s;
  s.rows.push_back(summarize(c, recs));
  compare_with_theory(s, c.gate_z);
  if (records) *records = std::move(recs);
  return s;
}

ExperimentSummary sweep(const KeyValues& base, const std::string& param, const std::vector<std::string>& values) {
  require(!values.empty(), ErrorKind::Config, "sweep needs at least one value");
  ExperimentSummary out;
  for (auto& v : values) {
    KeyValues kv = base;
    kv[param] = v;
    ExperimentConfig c = config_from(kv);
    auto s = run_experiment(c);
    for (auto& row : s.rows) {
      row.param = param;
      row.value = v;
      out.rows.push_back(row);
    }
  }
  return out;
}

void write_summary_csv(std::ostream& os, const ExperimentSummary& s) {
  os << "# adlab-csv v1\n";
  os << "param,value,trials,detected,pd,ci_half,ci_lo,ci_hi,mean_hop,mean_infected,mean_h,inconclusive,failed,"
        "prediction,predicted,prediction_kind,flag\n";
  std::ostringstream ss;
  ss << std::setprecision(10);
  for (auto& r : s.rows) {
    ss << (r.param.empty() ? "-" : r.param) << ',' << (r.value.empty() ? "-" : r.value) << ',' << r.trials << ','
       << r.detected << ',' << r.pd << ',' << r.ci_half << ',' << r.ci.lo << ',' << r.ci.hi << ',' << r.mean_hop
       << ',' << r.mean_infected << ',' << r.mean_h << ',' << r.inconclusive << ',' << r.failed << ','
       << (r.prediction.name.empty() ? "-" : r.prediction.name) << ',';
    if (r.prediction.kind == PredictionKind::None) ss << '-';
    else ss << r.prediction.value;
    ss << ',' << prediction_kind_name(r.prediction.kind) << ',' << (r.flagged ? 1 : 0) << '\n';
  }
  os << ss.str();
}

void write_trials_csv(std::ostream& os, const ExperimentConfig& c, const std::vector<TrialRecord>& recs) {
  os << "# adlab-csv v1 trials\n";
  os << "trial,estimator,estimate,set_size,detected,hop,inconclusive,failed\n";
  std::ostringstream ss;
  ss << std::setprecision(10);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    ss << i << ',' << estimator_name(c.estimator) << ',';
    if (r.estimate == kNoNode) ss << '-';
    else ss << r.estimate;
    ss << ',' << r.set_size << ',' << (r.detected ? 1 : 0) << ',' << r.hop << ',' << (r.inconclusive ? 1 : 0) << ','
       << (r.failed ? 1 : 0) << '\n';
  }
  os << ss.str();
}

}  // namespace adlab
