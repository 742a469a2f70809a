#include "adlab/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace adlab {

namespace {

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

const std::vector<std::string> kKeys = {
    "network",  "d",       "degree_dist", "graph",      "prune_k",    "synth_nodes", "synth_gamma",
    "synth_mean_degree",   "line_n",      "protocol",   "alpha",      "d0",          "alpha_table",
    "q",        "g",       "fanout_cap",  "T",          "estimator",  "p",           "trials",
    "seed",     "threads", "ci",          "gate",       "gate_z",     "out",         "trials_out"};

template <class F>
auto convert(const std::string& key, const std::string& v, F f) {
  try {
    std::size_t used = 0;
    auto x = f(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    throw Error(ErrorKind::Config, "bad value for '" + key + "': '" + v + "'");
  }
}

int to_int(const std::string& k, const std::string& v) {
  return convert(k, v, [](const std::string& s, std::size_t* u) { return std::stoi(s, u); });
}
double to_double(const std::string& k, const std::string& v) {
  return convert(k, v, [](const std::string& s, std::size_t* u) { return std::stod(s, u); });
}
std::uint64_t to_u64(const std::string& k, const std::string& v) {
  require(!v.empty() && v[0] != '-', ErrorKind::Config, "bad value for '" + k + "': '" + v + "'");
  return convert(k, v, [](const std::string& s, std::size_t* u) { return std::stoull(s, u); });
}
bool to_bool(const std::string& k, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(ErrorKind::Config, "bad value for '" + k + "': '" + v + "'");
}

}  // namespace

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Adaptive: return "adaptive";
    case Protocol::TreeProtocol: return "tree";
    case Protocol::GridAdaptive: return "grid";
    case Protocol::Paad: return "paad";
    case Protocol::Diffusion: return "diffusion";
    case Protocol::Deterministic: return "flood";
    case Protocol::PolyaLine: return "polya-line";
  }
  return "?";
}

Protocol protocol_from_name(const std::string& s) {
  for (Protocol p : {Protocol::Adaptive, Protocol::TreeProtocol, Protocol::GridAdaptive, Protocol::Paad,
                     Protocol::Diffusion, Protocol::Deterministic, Protocol::PolyaLine})
    if (s == protocol_name(p)) return p;
  throw Error(ErrorKind::Config, "unknown protocol '" + s + "'");
}

std::vector<std::string> config_keys() { return kKeys; }

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::Config,
            origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string k = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
    require(!k.empty(), ErrorKind::Config, origin + ":" + std::to_string(lineno) + ": empty key");
    kv[k] = v;
  }
  return kv;
}

KeyValues load_key_values(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), ErrorKind::Config, "cannot open config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_key_values(ss.str(), path);
}

ExperimentConfig config_from(const KeyValues& kv) {
  for (auto& [k, v] : kv) {
    bool known = false;
    for (auto& key : kKeys) known = known || key == k;
    require(known, ErrorKind::Config, "unknown config key '" + k + "'");
  }
  ExperimentConfig c;
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto v = get("network")) {
    if (*v == "regular") c.network = NetworkSpec::RegularTree;
    else if (*v == "gw") c.network = NetworkSpec::GaltonWatson;
    else if (*v == "grid") c.network = NetworkSpec::Grid;
    else if (*v == "line") c.network = NetworkSpec::Line;
    else if (*v == "file") c.network = NetworkSpec::File;
    else if (*v == "synthetic") c.network = NetworkSpec::Synthetic;
    else throw Error(ErrorKind::Config, "unknown network '" + *v + "'");
  }
  if (auto v = get("d")) c.d = to_int("d", *v);
  if (auto v = get("degree_dist")) {
    try {
      c.dist = DegreeDistribution::parse(*v);
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, std::string("degree_dist: ") + e.what());
    }
  }
  if (auto v = get("graph")) c.graph_path = *v;
  if (auto v = get("prune_k")) c.prune_k = to_int("prune_k", *v);
  if (auto v = get("synth_nodes")) c.synth_nodes = to_u64("synth_nodes", *v);
  if (auto v = get("synth_gamma")) c.synth_gamma = to_double("synth_gamma", *v);
  if (auto v = get("synth_mean_degree")) c.synth_mean_degree = to_double("synth_mean_degree", *v);
  if (auto v = get("line_n")) c.line_n = to_int("line_n", *v);

  if (auto v = get("protocol")) c.protocol.kind = protocol_from_name(*v);
  if (auto v = get("alpha")) {
    if (*v == "exact") c.protocol.alpha = AlphaPolicy::Exact;
    else if (*v == "always-pass") c.protocol.alpha = AlphaPolicy::AlwaysPass;
    else if (*v == "table") c.protocol.alpha = AlphaPolicy::FixedTable;
    else throw Error(ErrorKind::Config, "unknown alpha policy '" + *v + "'");
  }
  if (auto v = get("d0")) c.protocol.d0 = *v == "inf" ? kD0Infinity : to_int("d0", *v);
  if (auto v = get("alpha_table")) {
    std::stringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ',')) c.protocol.alpha_table.push_back(to_double("alpha_table", trim(tok)));
  }
  if (auto v = get("q")) c.protocol.q = to_double("q", *v);
  if (auto v = get("g")) c.protocol.g = to_int("g", *v);
  if (auto v = get("fanout_cap")) c.protocol.fanout_cap = to_int("fanout_cap", *v);
  if (auto v = get("T")) c.protocol.T = to_int("T", *v);
  if (auto v = get("estimator")) c.estimator = estimator_from_name(*v);
  if (auto v = get("p")) c.p = to_double("p", *v);
  if (auto v = get("trials")) c.trials = to_u64("trials", *v);
  if (auto v = get("seed")) c.seed = to_u64("seed", *v);
  if (auto v = get("threads")) c.threads = to_int("threads", *v);
  if (auto v = get("ci")) {
    if (*v == "wilson") c.wilson = true;
    else if (*v == "normal") c.wilson = false;
    else throw Error(ErrorKind::Config, "ci must be normal or wilson");
  }
  if (auto v = get("gate")) c.gate = to_bool("gate", *v);
  if (auto v = get("gate_z")) c.gate_z = to_double("gate_z", *v);
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("trials_out")) c.trials_out = *v;
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  auto cfg = [](bool ok, const std::string& m) { require(ok, ErrorKind::Config, m); };
  cfg(trials >= 1, "trials must be >= 1");
  cfg(p >= 0 && p < 1, "spy probability p must lie in [0,1)");
  cfg(threads >= 0, "threads must be >= 0");
  cfg(gate_z > 0, "gate_z must be positive");
  if (network == NetworkSpec::RegularTree) cfg(d >= 2, "d must be >= 2");
  if (network == NetworkSpec::GaltonWatson) cfg(!dist.f.empty(), "gw network needs degree_dist");
  if (network == NetworkSpec::File) cfg(!graph_path.empty(), "file network needs graph");
  if (network == NetworkSpec::Line) {
    cfg(line_n >= 1, "line_n must be >= 1");
    cfg(protocol.kind == Protocol::PolyaLine, "line network runs the polya-line protocol");
  }
  if (protocol.kind == Protocol::PolyaLine) {
    cfg(network == NetworkSpec::Line, "polya-line protocol needs network = line");
    cfg(estimator == EstimatorKind::LineMl, "polya-line protocol pairs with the line-ml estimator");
  }
  if (protocol.kind == Protocol::GridAdaptive) cfg(network == NetworkSpec::Grid, "grid protocol needs network = grid");
  bool spy = estimator == EstimatorKind::SpyMl || estimator == EstimatorKind::SpyIrregular ||
             estimator == EstimatorKind::FirstSpy || estimator == EstimatorKind::SpySnapshot;
  if (spy) cfg(p > 0, "spy estimators need p > 0");
  try {
    protocol.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
}

std::string resolve_output(const std::string& name) {
  if (name.empty() || name == "-") return name;
  std::filesystem::path p(name);
  const char* dir = std::getenv("ADLAB_OUT_DIR");
  if (p.is_absolute() || !dir || !*dir) return name;
  return (std::filesystem::path(dir) / p).string();
}

}  // namespace adlab
