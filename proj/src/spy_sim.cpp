#include <cmath>
#include <vector>

#include "adlab/spread.hpp"

namespace adlab {

SpineSample sample_spy_tree_regular(const Network& net, double p, Rng& rng, int cap) {
  require(net.kind() == NetKind::RegularTree, ErrorKind::Unsupported,
          "structural spy sampler needs a regular tree");
  require(p > 0 && p < 1, ErrorKind::InvalidParameter, "spy probability must lie in (0,1)");
  const int d = net.regular_degree();
  const double r = d - 1.0;
  const double lq = std::log1p(-p);

  SpineSample out;
  out.source = net.root();
  out.spine.push_back(out.source);
  std::vector<NodeId> nb;
  net.neighbors(out.source, nb);
  out.spine.push_back(nb[pick(rng, nb.size())]);

  for (int k = 1; k <= cap; ++k) {
    NodeId sk = out.spine[k], prev = out.spine[k - 1];
    if (bernoulli(rng, p)) {
      out.obs.push_back({sk, k, prev, Dir::Up, k});
      out.found = true;
      return out;
    }
    net.neighbors(sk, nb);
    std::vector<NodeId> fwd;
    for (NodeId w : nb)
      if (w != prev) fwd.push_back(w);
    std::size_t up = pick(rng, fwd.size());

    // |T_k| nodes in each down branch; inf once it stops fitting
    double size = d == 2 ? k : (std::pow(r, k) - 1) / (d - 2.0);
    double hit = -std::expm1(size * lq);
    for (std::size_t b = 0; b < fwd.size(); ++b) {
      if (b == up || !bernoulli(rng, hit)) continue;
      // first spy in BFS order: truncated geometric index
      double u = uniform01(rng);
      double i = 1 + std::floor(std::log1p(-u * hit) / lq);
      if (std::isfinite(size)) i = std::min(i, size);
      int j = 0;
      double cum = 1, width = 1;
      while (cum < i && j < k - 1) {
        width *= r;
        cum += width;
        ++j;
      }
      NodeId x = fwd[b], par = sk;
      for (int step = 0; step < j; ++step) {
        net.neighbors(x, nb);
        std::vector<NodeId> kids;
        for (NodeId w : nb)
          if (w != par) kids.push_back(w);
        par = x;
        x = kids[pick(rng, kids.size())];
      }
      out.obs.push_back({x, k + 1 + j, par, Dir::Down, k - 1 - j});
    }
    out.spine.push_back(fwd[up]);
  }
  return out;
}

}  // namespace adlab
