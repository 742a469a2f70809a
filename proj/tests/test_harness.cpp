#include <doctest.h>

#include <cstdlib>
#include <functional>
#include <sstream>

#include "adlab/analysis.hpp"
#include "adlab/config.hpp"
#include "adlab/harness.hpp"

using namespace adlab;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::InvalidParameter;
}

std::string summary_text(const KeyValues& kv) {
  auto s = run_experiment(config_from(kv));
  std::ostringstream os;
  write_summary_csv(os, s);
  return os.str();
}

}  // namespace

TEST_CASE("key-value parsing") {
  auto kv = parse_key_values("# comment\nd = 4\n\nT=6 # trailing\nd=5\n");
  CHECK(kv.at("d") == "5");
  CHECK(kv.at("T") == "6");
  CHECK(kind_of([] { parse_key_values("d 4\n"); }) == ErrorKind::Config);
  CHECK(kind_of([] { config_from({{"bogus", "1"}}); }) == ErrorKind::Config);
  CHECK(kind_of([] { config_from({{"d", "three"}}); }) == ErrorKind::Config);
  CHECK(kind_of([] { config_from({{"trials", "0"}}).validate(); }) == ErrorKind::Config);
  CHECK(kind_of([] { config_from({{"p", "1"}, {"estimator", "spy-ml"}, {"protocol", "tree"}}).validate(); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { config_from({{"estimator", "spy-ml"}, {"protocol", "tree"}}).validate(); }) ==
        ErrorKind::Config);
  CHECK(kind_of([] { config_from({{"protocol", "grid"}}).validate(); }) == ErrorKind::Config);
  auto c = config_from({{"network", "gw"}, {"degree_dist", "3:0.5,4:0.5"}, {"d0", "inf"}, {"T", "6"}});
  CHECK(c.network == NetworkSpec::GaltonWatson);
  CHECK(c.protocol.d0 == kD0Infinity);
  CHECK(c.protocol.T == 6);
  for (auto& k : config_keys()) CHECK_FALSE(k.empty());
}

TEST_CASE("output directory from the environment") {
  ::setenv("ADLAB_OUT_DIR", "/tmp/adlab_out", 1);
  CHECK(resolve_output("x.csv") == "/tmp/adlab_out/x.csv");
  CHECK(resolve_output("/abs/x.csv") == "/abs/x.csv");
  ::unsetenv("ADLAB_OUT_DIR");
  CHECK(resolve_output("x.csv") == "x.csv");
}

TEST_CASE("results do not depend on the worker count") {
  KeyValues kv{{"d", "3"}, {"T", "6"}, {"trials", "600"}, {"seed", "11"}};
  kv["threads"] = "1";
  std::string one = summary_text(kv);
  kv["threads"] = "7";
  std::string seven = summary_text(kv);
  CHECK(one == seven);
  CHECK(one.rfind("# adlab-csv v1", 0) == 0);

  KeyValues spy{{"protocol", "tree"}, {"estimator", "spy-ml"}, {"p", "0.2"}, {"trials", "400"}, {"seed", "3"}};
  spy["threads"] = "1";
  std::string a = summary_text(spy);
  spy["threads"] = "5";
  CHECK(a == summary_text(spy));

  // per-trial CSV too
  auto cfg = config_from({{"d", "3"}, {"T", "4"}, {"trials", "200"}, {"threads", "3"}});
  std::vector<TrialRecord> r1, r2;
  run_experiment(cfg, &r1);
  cfg.threads = 1;
  run_experiment(cfg, &r2);
  std::ostringstream o1, o2;
  write_trials_csv(o1, cfg, r1);
  write_trials_csv(o2, cfg, r2);
  CHECK(o1.str() == o2.str());
}

TEST_CASE("detection accounting") {
  auto cfg = config_from({{"d", "3"}, {"T", "4"}, {"trials", "300"}, {"threads", "2"}});
  std::vector<TrialRecord> recs;
  auto s = run_experiment(cfg, &recs);
  REQUIRE(recs.size() == 300);
  std::size_t det = 0;
  for (auto& r : recs) {
    if (r.detected) {
      ++det;
      CHECK(r.hop == 0);
      CHECK(r.estimate == r.source);
    }
    CHECK(r.infected == 10);
  }
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].detected == det);
  CHECK(s.rows[0].pd == doctest::Approx(det / 300.0));
  CHECK(s.rows[0].prediction.kind == PredictionKind::Value);
  CHECK(s.rows[0].prediction.value == doctest::Approx(1.0 / 9));
}

TEST_CASE("confidence intervals cover at the nominal rate") {
  // Bernoulli self-test with known p
  for (double p : {0.1, 0.3, 0.5}) {
    Rng rng(static_cast<std::uint64_t>(p * 1000));
    int covered = 0;
    const int experiments = 1000, n = 400;
    for (int e = 0; e < experiments; ++e) {
      std::size_t hits = 0;
      for (int i = 0; i < n; ++i) hits += bernoulli(rng, p);
      auto ci = normal_ci(hits, n);
      covered += ci.lo <= p && p <= ci.hi;
    }
    CHECK(covered >= 930);
    CHECK(covered <= 970);
  }
  auto w = wilson_ci(0, 20);
  CHECK(w.lo == 0);
  CHECK(w.hi > 0.1);
  auto nrm = normal_ci(0, 20);
  CHECK(nrm.hi == 0);
  auto c = normal_ci(50, 100);
  CHECK(c.hi - c.lo == doctest::Approx(2 * 1.96 * 0.05));
}

TEST_CASE("theory comparison flags only real disagreements") {
  ExperimentSummary s;
  SummaryRow ok;
  ok.trials = 10000;
  ok.pd = 0.11;
  ok.prediction = {PredictionKind::Value, 1.0 / 9, "x"};
  SummaryRow bad = ok;
  bad.pd = 0.2;
  SummaryRow bound = ok;
  bound.pd = 0.05;
  bound.prediction = {PredictionKind::Upper, 0.06, "y"};
  SummaryRow over = bound;
  over.pd = 0.2;
  SummaryRow lower = ok;
  lower.pd = 0.5;
  lower.prediction = {PredictionKind::Lower, 0.3, "z"};
  SummaryRow none = ok;
  none.prediction = {};
  s.rows = {ok, bad, bound, over, lower, none};
  CHECK(compare_with_theory(s, 3) == 2);
  CHECK_FALSE(s.rows[0].flagged);
  CHECK(s.rows[1].flagged);
  CHECK_FALSE(s.rows[2].flagged);
  CHECK(s.rows[3].flagged);
  CHECK_FALSE(s.rows[4].flagged);
  CHECK_FALSE(s.rows[5].flagged);
  CHECK(s.any_flag());
}

TEST_CASE("predictions for common configurations") {
  auto pr = [](const KeyValues& kv) { return predict_for(config_from(kv)); };
  CHECK(pr({{"d", "3"}, {"T", "8"}}).value == doctest::Approx(1.0 / (n_regular(3, 8, Branch::Even) - 1)));
  CHECK(pr({{"d", "3"}, {"T", "7"}}).kind == PredictionKind::Upper);
  auto ap = pr({{"d", "3"}, {"T", "4"}, {"alpha", "always-pass"}, {"estimator", "map-leaf"}});
  CHECK(ap.value == doctest::Approx(1.0 / 6));
  auto sp = pr({{"d", "4"}, {"protocol", "tree"}, {"estimator", "spy-ml"}, {"p", "0.1"}});
  CHECK(sp.value == doctest::Approx(pd_spy_adaptive(4, 0.1)));
  auto fs = pr({{"d", "5"}, {"protocol", "diffusion"}, {"q", "0.3"}, {"T", "6"}, {"estimator", "first-spy"},
                {"p", "0.2"}});
  CHECK(fs.kind == PredictionKind::Lower);
  CHECK(fs.value == doctest::Approx(pd_first_spy_diffusion(5, 0.3, 0.2)));
}

TEST_CASE("sweep produces one row per value") {
  KeyValues base{{"d", "3"}, {"trials", "100"}, {"threads", "2"}};
  auto s = sweep(base, "T", {"2", "4", "6"});
  REQUIRE(s.rows.size() == 3);
  CHECK(s.rows[0].param == "T");
  CHECK(s.rows[2].value == "6");
  CHECK(s.rows[1].mean_infected == doctest::Approx(10));
  CHECK(kind_of([&] { sweep(base, "nope", {"1"}); }) == ErrorKind::Config);
}

TEST_CASE("explicit graph experiment and failed-trial accounting") {
  auto cfg = config_from({{"network", "synthetic"},
                          {"synth_nodes", "800"},
                          {"prune_k", "3"},
                          {"protocol", "tree"},
                          {"estimator", "spy-irregular"},
                          {"p", "0.1"},
                          {"T", "20"},
                          {"trials", "40"},
                          {"threads", "2"}});
  std::vector<TrialRecord> recs;
  auto s = run_experiment(cfg, &recs);
  REQUIRE(s.rows.size() == 1);
  CHECK(s.rows[0].trials == 40);
  CHECK(s.rows[0].pd >= 0);
  CHECK(s.rows[0].pd <= 1);
  for (auto& r : recs) CHECK_FALSE(r.failed);
}

TEST_CASE("spy estimate distance stays above the series bound") {
  for (int d : {3, 4, 6}) {
    auto s = run_experiment(config_from({{"protocol", "tree"},
                                         {"estimator", "spy-ml"},
                                         {"d", std::to_string(d)},
                                         {"p", "0.2"},
                                         {"trials", "3000"},
                                         {"seed", "17"}}));
    REQUIRE(s.rows.size() == 1);
    CHECK(s.rows[0].inconclusive == 0);
    CHECK(s.rows[0].mean_hop >= expected_distance_spy(d, 0.2));
  }
}
