#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "adlab/analysis.hpp"
#include "adlab/harness.hpp"

using namespace adlab;

namespace {

constexpr int kOk = 0, kConfigError = 1, kGateFailure = 2;

struct Common {
  std::string config;
  std::vector<std::string> sets;
  KeyValues flags;
};

// every config key doubles as a --key flag; flags beat --set, which beats the file
void add_config_flags(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "flat key = value config file");
  app->add_option("--set", c.sets, "override, key=value (repeatable)");
  for (const auto& k : config_keys())
    app->add_option_function<std::string>("--" + k, [&c, k](const std::string& v) { c.flags[k] = v; }, "config key " + k);
}

KeyValues merged(const Common& c) {
  KeyValues kv;
  if (!c.config.empty()) kv = load_key_values(c.config);
  for (const auto& s : c.sets) {
    auto eq = s.find('=');
    require(eq != std::string::npos, ErrorKind::Config, "--set expects key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  for (const auto& [k, v] : c.flags) kv[k] = v;
  return kv;
}

// output stream: file (resolved against ADLAB_OUT_DIR) or stdout
struct Sink {
  std::ofstream file;
  std::ostream* os = &std::cout;
  explicit Sink(const std::string& name) {
    std::string path = resolve_output(name);
    if (path.empty() || path == "-") return;
    file.open(path);
    require(file.good(), ErrorKind::Io, "cannot write " + path);
    os = &file;
  }
};

Network make_network(const ExperimentConfig& cfg) {
  if (auto shared = build_shared_network(cfg)) return *shared;
  switch (cfg.network) {
    case NetworkSpec::RegularTree: return Network::regular_tree(cfg.d, cfg.seed);
    case NetworkSpec::GaltonWatson: return Network::galton_watson(cfg.dist, cfg.seed);
    case NetworkSpec::Grid: return Network::grid(cfg.seed);
    default: break;
  }
  throw Error(ErrorKind::Config, "network kind cannot be materialised here");
}

int cmd_spread(const Common& com, std::int64_t source_opt) {
  ExperimentConfig cfg = config_from(merged(com));
  Rng rng = trial_rng(cfg.seed, 0);
  Sink out(cfg.out);
  if (cfg.protocol.kind == Protocol::PolyaLine) {
    int src = source_opt > 0 ? static_cast<int>(source_opt) : 1 + static_cast<int>(pick(rng, cfg.line_n));
    PolyaRun r = spread_polya_line(cfg.line_n, src, rng, cfg.protocol.T);
    *out.os << "# adlab-trace v1 polya-line\nn,source,q,direction,T1,T2\n"
            << r.n << ',' << r.source << ',' << std::setprecision(10) << r.q << ',' << (r.left ? "left" : "right")
            << ',' << r.T1 << ',' << r.T2 << '\n';
    return kOk;
  }
  Network net = make_network(cfg);
  NodeId src = source_opt >= 0 ? static_cast<NodeId>(source_opt) : net.root();
  Snapshot s = spread(net, src, cfg.protocol, rng);
  write_trace_csv(*out.os, s);
  return kOk;
}

int cmd_estimate(const Common& com, const std::string& trace_path, std::int64_t next_vs) {
  ExperimentConfig cfg = config_from(merged(com));
  std::ifstream in(trace_path);
  require(in.good(), ErrorKind::Config, "cannot open trace " + trace_path);
  Snapshot s = read_trace_csv(in);
  require(s.size() > 0, ErrorKind::Config, "trace " + trace_path + " has no nodes");
  Rng rng = trial_rng(cfg.seed, 0);
  const SpySet spies{mix(cfg.seed ^ 0x5079ULL, 0), cfg.p, s.source};
  Estimate e;
  switch (cfg.estimator) {
    case EstimatorKind::SnapshotRegular: e = estimate_snapshot_regular(s, rng); break;
    case EstimatorKind::IrregularMl: {
      int d0 = cfg.protocol.d0 > 0 ? cfg.protocol.d0 : cfg.d;
      e = estimate_irregular_ml(s, d0, rng);
      break;
    }
    case EstimatorKind::MapLeaf: e = estimate_map_leaf(s, rng); break;
    case EstimatorKind::PaadMap: e = estimate_paad_map(make_network(cfg), s, cfg.protocol.g, rng); break;
    case EstimatorKind::FirstSpy: e = estimate_first_spy(observe(s, spies), rng); break;
    case EstimatorKind::SpySnapshot: e = estimate_spy_snapshot(s, observe(s, spies), rng); break;
    case EstimatorKind::SpyMl: e = estimate_spy_ml(make_network(cfg), observe(s, spies), rng); break;
    case EstimatorKind::SpyIrregular:
      e = estimate_spy_irregular(make_network(cfg), observe(s, spies), rng, &s);
      break;
    case EstimatorKind::MultiSnapshot:
      require(next_vs >= 0, ErrorKind::Config, "multi-snapshot needs --next-vs");
      e = estimate_multi_snapshot(s, static_cast<NodeId>(next_vs), rng);
      break;
    case EstimatorKind::LineMl: throw Error(ErrorKind::Config, "line-ml runs inside experiments only");
  }
  Sink out(cfg.out);
  auto& os = *out.os;
  os << std::setprecision(10) << "estimator,estimate,set_size,ties,detection,lambda,inconclusive,source,detected\n";
  os << estimator_name(e.kind) << ',';
  if (e.v == kNoNode) os << '-';
  else os << e.v;
  os << ',' << e.set_size << ',' << e.ties << ',';
  if (std::isnan(e.detection)) os << '-';
  else os << e.detection;
  os << ',' << e.lambda << ',' << (e.inconclusive ? 1 : 0) << ',';
  if (s.source == kNoNode) os << "-,-\n";
  else os << s.source << ',' << (e.v == s.source ? 1 : 0) << '\n';
  return kOk;
}

int report(const ExperimentConfig& cfg, const ExperimentSummary& s) {
  Sink out(cfg.out);
  write_summary_csv(*out.os, s);
  if (s.any_flag()) {
    std::cerr << "adlab: " << std::count_if(s.rows.begin(), s.rows.end(), [](auto& r) { return r.flagged; })
              << " row(s) disagree with theory\n";
    if (cfg.gate) return kGateFailure;
  }
  return kOk;
}

int cmd_experiment(const Common& com) {
  ExperimentConfig cfg = config_from(merged(com));
  std::vector<TrialRecord> recs;
  ExperimentSummary s = run_experiment(cfg, &recs);
  if (!cfg.trials_out.empty()) {
    Sink t(cfg.trials_out);
    write_trials_csv(*t.os, cfg, recs);
  }
  return report(cfg, s);
}

int cmd_sweep(const Common& com, const std::string& param, const std::string& values) {
  KeyValues kv = merged(com);
  ExperimentConfig cfg = config_from(kv);
  std::vector<std::string> vals;
  std::stringstream ss(values);
  for (std::string v; std::getline(ss, v, ',');)
    if (!v.empty()) vals.push_back(v);
  return report(cfg, sweep(kv, param, vals));
}

struct PredictArgs {
  std::string quantity;
  int d = 3, T = 4, n = 101;
  double p = 0.1, q = 0.1, N = -1;
  std::string branch = "auto", dist = "2:0.3,3:0.7", out;
};

int cmd_predict(const PredictArgs& a) {
  Sink out(a.out);
  auto& os = *out.os;
  os << std::setprecision(12) << "quantity,parameters,value\n";
  auto row = [&](const std::string& q, const std::string& params, double v) {
    os << q << ',' << params << ',' << v << '\n';
  };
  const std::string dT = "d=" + std::to_string(a.d) + ";T=" + std::to_string(a.T);
  const std::string dp = "d=" + std::to_string(a.d) + ";p=" + std::to_string(a.p);
  const std::string& k = a.quantity;
  bool all = k == "all", hit = false;
  auto want = [&](const char* name) {
    bool w = all || k == name;
    hit = hit || w;
    return w;
  };
  auto branch = [&] {
    if (a.branch == "pass") return Branch::Passed;
    if (a.branch == "keep") return Branch::Kept;
    if (a.branch == "even" || a.T % 2 == 0) return Branch::Even;
    if (a.branch == "auto") return Branch::Passed;
    throw Error(ErrorKind::Config, "branch must be even, keep or pass");
  };
  if (want("n_regular")) row("n_regular", dT + ";branch=" + a.branch, n_regular(a.d, a.T, branch()));
  if (want("pd_snapshot_bound")) row("pd_snapshot_bound", dT, pd_snapshot_bound(a.d, a.T));
  if (want("pd_always_pass")) {
    double N = a.N > 0 ? a.N : n_regular(a.d, a.T, a.T % 2 ? Branch::Passed : Branch::Even);
    row("pd_always_pass", "d=" + std::to_string(a.d) + ";N=" + std::to_string(N), pd_always_pass(a.d, N));
    row("leaf_count_always_pass", "d=" + std::to_string(a.d) + ";N=" + std::to_string(N),
        leaf_count_always_pass(a.d, N));
  }
  if (want("pd_multiple_snapshots")) row("pd_multiple_snapshots", dT, pd_multiple_snapshots(a.d, a.T));
  if (want("detection_exponent")) {
    auto r = detection_exponent(DegreeDistribution::parse(a.dist));
    std::string params = "dist=" + a.dist;
    row("exponent", params, r.exponent);
    row("gap", params, r.gap);
    for (std::size_t i = 0; i < r.r.size(); ++i) row("r_star_" + std::to_string(i), params, r.r[i]);
  }
  if (want("pd_spy")) row("pd_spy", dp, pd_spy_adaptive(a.d, a.p));
  if (want("expected_distance_spy")) row("expected_distance_spy", dp, expected_distance_spy(a.d, a.p));
  if (want("pd_spy_snapshot")) row("pd_spy_snapshot", dp + ";T=" + std::to_string(a.T), pd_spy_snapshot(a.d, a.p, a.T));
  if (want("grid")) {
    auto g = grid_predictions(a.T);
    const std::string t = "T=" + std::to_string(a.T);
    row("grid_n_lower", t, g.n_lower);
    row("grid_n_even", t, g.n_even);
    row("grid_pd_upper", t, g.pd_upper);
  }
  if (want("line_bound")) row("line_bound", "n=" + std::to_string(a.n), line_bound(a.n));
  if (want("first_spy_diffusion"))
    row("first_spy_diffusion", dp + ";q=" + std::to_string(a.q), pd_first_spy_diffusion(a.d, a.q, a.p));
  if (want("hop_pmf_regular")) {
    auto pmf = hop_pmf_regular(a.d, a.T);
    for (std::size_t h = 0; h < pmf.size(); ++h) row("hop_pmf_regular", dT + ";h=" + std::to_string(h + 1), pmf[h]);
  }
  if (want("hop_pmf_grid")) {
    auto pmf = hop_pmf_grid(a.T);
    for (std::size_t h = 0; h < pmf.size(); ++h)
      row("hop_pmf_grid", "T=" + std::to_string(a.T) + ";h=" + std::to_string(h + 1), pmf[h]);
  }
  require(hit, ErrorKind::Config, "unknown quantity '" + k + "'");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adlab: adaptive-diffusion source-obfuscation lab"};
  app.require_subcommand(1);

  Common c_spread, c_est, c_exp, c_sweep;
  std::int64_t source = -1, next_vs = -1;
  std::string trace, param, values;
  PredictArgs pa;

  auto* sp = app.add_subcommand("spread", "run one spread and write its trace");
  add_config_flags(sp, c_spread);
  sp->add_option("--source", source, "source node id (default: the network root)");

  auto* es = app.add_subcommand("estimate", "run an estimator on a trace file");
  add_config_flags(es, c_est);
  es->add_option("--trace", trace, "trace CSV written by `spread`")->required();
  es->add_option("--next-vs", next_vs, "next virtual source, for multi-snapshot");

  auto* ex = app.add_subcommand("experiment", "Monte Carlo experiment, summary CSV");
  add_config_flags(ex, c_exp);

  auto* sw = app.add_subcommand("sweep", "experiment over a list of values for one key");
  add_config_flags(sw, c_sweep);
  sw->add_option("--param", param, "config key to vary")->required();
  sw->add_option("--values", values, "comma-separated values")->required();

  auto* pr = app.add_subcommand("predict", "closed-form predictions as CSV");
  pr->add_option("quantity", pa.quantity, "quantity name or `all`")->required();
  pr->add_option("--d", pa.d);
  pr->add_option("--T", pa.T);
  pr->add_option("--n", pa.n);
  pr->add_option("--p", pa.p);
  pr->add_option("--q", pa.q);
  pr->add_option("--N", pa.N, "infected-set size for pd_always_pass");
  pr->add_option("--branch", pa.branch, "even, keep or pass");
  pr->add_option("--dist", pa.dist, "degree distribution, e.g. 2:0.3,3:0.7");
  pr->add_option("--out", pa.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*sp) return cmd_spread(c_spread, source);
    if (*es) return cmd_estimate(c_est, trace, next_vs);
    if (*ex) return cmd_experiment(c_exp);
    if (*sw) return cmd_sweep(c_sweep, param, values);
    if (*pr) return cmd_predict(pa);
  } catch (const Error& e) {
    std::cerr << "adlab: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "adlab: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
