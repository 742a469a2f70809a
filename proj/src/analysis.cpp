#include "adlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace adlab {

namespace {

void check_d(int d, int lo) {
  require(d >= lo, ErrorKind::InvalidParameter, "degree d must be >= " + std::to_string(lo));
}

void check_p(double p) { require(p >= 0 && p <= 1, ErrorKind::InvalidParameter, "p must lie in [0,1]"); }

// ((d-1)^k - 1)/(d-2), nodes in a down subtree of spine k
double subtree(int d, int k) { return d == 2 ? k : (std::pow(d - 1.0, k) - 1) / (d - 2.0); }

// (1-p)^n without losing precision for large n
double surv(double p, double n) {
  if (p >= 1) return n > 0 ? 0.0 : 1.0;
  return std::exp(n * std::log1p(-p));
}

// series depth: stop once 2 (d-1)^-k drops under 1e-14
int series_depth(int d) { return static_cast<int>(std::ceil(std::log(2e14) / std::log(d - 1.0))) + 2; }

}  // namespace

double n_regular(int d, int T, Branch b) {
  check_d(d, 2);
  require(T >= 0, ErrorKind::InvalidParameter, "T must be >= 0");
  const bool even = T % 2 == 0;
  require(even == (b == Branch::Even), ErrorKind::InvalidParameter, "branch does not match the parity of T");
  if (T == 0) return 1;
  if (d == 2) {
    if (b == Branch::Passed) return T + 1;
    if (b == Branch::Kept) return T + 2;
    return T + 1;
  }
  const double r = d - 1.0;
  switch (b) {
    case Branch::Passed: return (2 * std::pow(r, (T + 1) / 2) - 2) / (d - 2);
    case Branch::Kept: return (d * std::pow(r, (T + 1) / 2) - 2) / (d - 2);
    case Branch::Even: break;
  }
  return (d * std::pow(r, T / 2) - 2) / (d - 2);
}

double leaves_regular(int d, int T) {
  check_d(d, 2);
  require(T >= 2 && T % 2 == 0, ErrorKind::InvalidParameter, "leaf count needs an even T >= 2");
  return d * std::pow(d - 1.0, T / 2 - 1);
}

double pd_snapshot_bound(int d, int T) {
  check_d(d, 2);
  require(T >= 1, ErrorKind::InvalidParameter, "T must be >= 1");
  if (d == 2) return 1.0 / T;
  return (d - 2.0) / (2 * std::pow(d - 1.0, (T + 1) / 2.0) - d);
}

double pd_always_pass(int d, double N) {
  check_d(d, 2);
  require(N >= 1, ErrorKind::InvalidParameter, "N_T must be >= 1");
  return (d - 1.0) / (2 + (d - 2.0) * N);
}

double leaf_count_always_pass(int d, double N) {
  check_d(d, 2);
  return ((d - 2.0) * N + 2) / (d - 1.0);
}

double pd_multiple_snapshots(int d, int T) {
  check_d(d, 3);
  require(T >= 2 && T % 2 == 0, ErrorKind::InvalidParameter, "multiple-snapshot value needs an even T >= 2");
  return (d - 2.0) / (d - 1.0) * (T / 2.0) / (std::pow(d - 1.0, T / 2) - 1);
}

double kl_divergence(const std::vector<double>& r, const std::vector<double>& beta) {
  double s = 0;
  for (std::size_t i = 0; i < r.size(); ++i)
    if (r[i] > 0) s += r[i] * std::log2(r[i] / beta[i]);
  return s;
}

ExponentResult detection_exponent(const DegreeDistribution& D) {
  D.validate();
  ExponentResult out;
  const std::size_t n = D.f.size();
  out.mu = D.mean_offspring();
  require(out.mu > 1, ErrorKind::InvalidParameter, "subcritical distribution: mean offspring must exceed 1");
  std::vector<double> c(n), beta(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::log2(D.f[i] - 1.0);
    beta[i] = D.p[i] * (D.f[i] - 1) / out.mu;
  }
  const double budget = std::log2(out.mu);
  out.r.assign(n, 0.0);
  if (D.p[0] * (D.f[0] - 1) > 1) {
    out.case_a = true;
    out.r[0] = 1;
  } else {
    // minimiser of <r,c> + KL/theta is the tilt r_i ~ beta_i (f_i-1)^-theta; KL grows with theta
    auto tilt = [&](double th) {
      std::vector<double> r(n);
      double z = 0;
      for (std::size_t i = 0; i < n; ++i) z += r[i] = beta[i] * std::exp2(-th * c[i]);
      for (auto& x : r) x /= z;
      return r;
    };
    double lo = 0, hi = 1;
    while (kl_divergence(tilt(hi), beta) < budget && hi < 1e6) hi *= 2;
    for (int it = 0; it < 200; ++it) {
      double mid = (lo + hi) / 2;
      (kl_divergence(tilt(mid), beta) < budget ? lo : hi) = mid;
    }
    out.r = tilt(lo);
  }
  out.exponent = 0;
  for (std::size_t i = 0; i < n; ++i) out.exponent += out.r[i] * c[i];
  out.gap = budget - out.exponent;
  return out;
}

double pd_spy_adaptive(int d, double p) {
  check_d(d, 3);
  check_p(p);
  double sum = 0;
  for (int k = 1, K = series_depth(d); k <= K; ++k) {
    double a = surv(p, subtree(d, k)), b = surv(p, subtree(d, k + 1));
    double qk = std::pow(1 - a, d - 1) + b;
    sum += qk * std::pow(d - 1.0, -k);
  }
  return p + 1.0 / (d - 2) - sum;
}

double expected_distance_spy(int d, double p) {
  check_d(d, 3);
  check_p(p);
  double sum = 0;
  for (int k = 1, K = series_depth(d); k <= K; ++k) {
    double a = surv(p, subtree(d, k));
    double rk = (std::pow(1 - a, d - 1) + (d - 1) * a - (d - 2) * std::pow(a, d - 1) - 1) / (d - 1);
    sum += k * rk;
  }
  return 2 * sum;
}

double pd_spy_snapshot(int d, double p, int T) {
  check_d(d, 3);
  check_p(p);
  require(T >= 2 && T % 2 == 0, ErrorKind::InvalidParameter, "spy+snapshot value needs an even T >= 2");
  const double r = d - 1.0;
  const double S = (d * std::pow(r, T / 2) - 2) / (d - 2);
  const double dS = d * std::pow(r, T / 2 - 1);
  double val = surv(p, S - 1) / dS;
  for (int k = 1; k <= T / 2; ++k) {
    const double Tk = subtree(d, k), Tk1 = subtree(d, k + 1), dTk = std::pow(r, k - 1);
    const double q = surv(p, Tk);
    // X ~ Binomial(d-2, q), summed exactly over X != d-2
    double e3 = 0, e4 = 0;
    for (int x = 0; x <= d - 3; ++x) {
      double pmf = std::exp(std::lgamma(d - 1.0) - std::lgamma(x + 1.0) - std::lgamma(d - 1.0 - x)) *
                   std::pow(q, x) * std::pow(1 - q, d - 2 - x);
      e3 += pmf / ((x + 1) * dTk);
      e4 += pmf / (dS - (d - 2 - x) * dTk);
    }
    val += surv(p, Tk - 1) * p / dTk;
    val += q * (1 - surv(p, S - Tk1)) * e3;
    val += surv(p, S - (Tk1 - Tk)) * e4;
  }
  return val;
}

GridPrediction grid_predictions(int T) {
  require(T >= 2, ErrorKind::InvalidParameter, "grid bound is defined for T >= 2");
  GridPrediction g;
  g.n_lower = (T + 1.0) * (T + 1.0) / 2;
  g.n_even = (static_cast<double>(T) * T + 2.0 * T + 2) / 2;
  g.pd_upper = 2.0 / ((T + 3.0) * (T - 1.0));
  return g;
}

double line_bound(int n) {
  require(n >= 1, ErrorKind::InvalidParameter, "n must be >= 1");
  return std::numbers::pi * std::sqrt(8.0) / std::sqrt(static_cast<double>(n)) + 2.0 / n;
}

std::vector<double> hop_pmf_regular(int d, int t) {
  check_d(d, 2);
  require(t >= 2 && t % 2 == 0, ErrorKind::InvalidParameter, "t must be even and >= 2");
  const double others = n_regular(d, t, Branch::Even) - 1;
  std::vector<double> pmf;
  for (int h = 1; h <= t / 2; ++h) pmf.push_back((d == 2 ? 2.0 : d * std::pow(d - 1.0, h - 1)) / others);
  return pmf;
}

std::vector<double> hop_pmf_grid(int t) {
  require(t >= 2 && t % 2 == 0, ErrorKind::InvalidParameter, "t must be even and >= 2");
  std::vector<double> pmf;
  for (int h = 1; h <= t / 2; ++h) pmf.push_back(4.0 * h / (t * (t / 2.0 + 1)));
  return pmf;
}

double pd_first_spy_diffusion(int d, double q, double p) {
  check_d(d, 2);
  check_p(p);
  return 1 - std::pow(1 - q * p, d);
}

}  // namespace adlab
