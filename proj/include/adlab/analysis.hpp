#pragma once
#include <vector>

#include "adlab/graph.hpp"

namespace adlab {

enum class Branch { Even, Kept, Passed };

// infected-set size on a d-regular tree
double n_regular(int d, int T, Branch b);
double leaves_regular(int d, int T);  // boundary size at even T

double pd_snapshot_bound(int d, int T);
double pd_always_pass(int d, double N);
double leaf_count_always_pass(int d, double N);
double pd_multiple_snapshots(int d, int T);

struct ExponentResult {
  std::vector<double> r;  // r*, aligned with the distribution support
  double exponent = 0;    // <r*, log2(f-1)>
  double gap = 0;         // log2(mu) - exponent
  double mu = 0;
  bool case_a = false;
};
// base-2 logs throughout
ExponentResult detection_exponent(const DegreeDistribution& D);
double kl_divergence(const std::vector<double>& r, const std::vector<double>& beta);  // bits

// spy model on a d-regular tree, tree protocol
double pd_spy_adaptive(int d, double p);
double expected_distance_spy(int d, double p);  // lower bound
double pd_spy_snapshot(int d, double p, int T);

struct GridPrediction {
  double n_lower = 0;   // (T+1)^2/2
  double n_even = 0;    // exact size at even T
  double pd_upper = 0;  // 2/((T+3)(T-1))
};
GridPrediction grid_predictions(int T);

double line_bound(int n);

// distribution of h_t at even t that the keep probabilities are designed to hit
std::vector<double> hop_pmf_regular(int d, int t);  // index h-1
std::vector<double> hop_pmf_grid(int t);

// first-spy lower bound for diffusion on a d-regular tree
double pd_first_spy_diffusion(int d, double q, double p);

}  // namespace adlab
