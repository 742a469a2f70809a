#include <algorithm>
#include <cstdlib>

#include "adlab/spread.hpp"

namespace adlab {

namespace {

int l1(std::int64_t x0, std::int64_t y0, std::int64_t x1, std::int64_t y1) {
  return static_cast<int>(std::llabs(x0 - x1) + std::llabs(y0 - y1));
}

void grid_infect(const Network& net, Snapshot& s, std::int64_t x, std::int64_t y, int t) {
  NodeId z = Network::grid_encode(x, y);
  if (s.infected(z)) return;
  int par = -1;
  for (int k = 0; k < 4 && par < 0; ++k) {
    int j = s.idx(Network::grid_step(z, static_cast<GridDir>(k)));
    if (j >= 0 && s.time[j] < t) par = j;
  }
  s.add(z, t, par, net.degree(z));
}

// every node of the L1 sphere of radius r around (cx, cy) that satisfies keep(x, y)
template <class F>
void sphere(std::int64_t cx, std::int64_t cy, int r, F&& visit) {
  if (r == 0) {
    visit(cx, cy);
    return;
  }
  for (int i = 0; i < r; ++i) {
    visit(cx + r - i, cy + i);
    visit(cx - i, cy + r - i);
    visit(cx - r + i, cy - i);
    visit(cx + i, cy - r + i);
  }
}

}  // namespace

Snapshot spread_grid(const Network& net, NodeId source, const ProtocolParams& p, Rng& rng) {
  require(net.kind() == NetKind::Grid, ErrorKind::Unsupported, "grid adaptive diffusion needs a grid network");
  p.validate();
  Snapshot s;
  s.protocol = Protocol::GridAdaptive;
  s.T = p.T;
  s.source = source;
  s.add(source, 0, -1, 4);
  s.vs.assign(p.T + 1, source);
  s.hs.assign(p.T + 1, 0);
  if (p.T == 0) return s;

  auto [x, y] = Network::grid_decode(source);
  GridDir d0 = static_cast<GridDir>(pick(rng, 4));
  NodeId u = Network::grid_step(source, d0);
  s.add(u, 1, 0, 4);
  auto [cx, cy] = Network::grid_decode(u);
  s.hH = cx - x;
  s.hV = cy - y;
  s.vs[1] = u;
  s.hs[1] = 1;
  if (p.T == 1) return s;
  sphere(cx, cy, 1, [&](std::int64_t a, std::int64_t b) { grid_infect(net, s, a, b, 2); });
  s.vs[2] = u;
  s.hs[2] = 1;

  for (int t = 3; t <= p.T; t += 2) {
    const int r = (t - 1) / 2;
    const int h = static_cast<int>(std::llabs(s.hH) + std::llabs(s.hV));
    if (uniform01(rng) < alpha_grid(t - 1, h)) {
      sphere(cx, cy, r + 1, [&](std::int64_t a, std::int64_t b) { grid_infect(net, s, a, b, t); });
      s.last_pass = false;
    } else {
      // moving must not shrink |hH|+|hV|
      std::vector<GridDir> allowed;
      if (s.hH >= 0) allowed.push_back(GridDir::E);
      if (s.hH <= 0) allowed.push_back(GridDir::W);
      if (s.hV >= 0) allowed.push_back(GridDir::N);
      if (s.hV <= 0) allowed.push_back(GridDir::S);
      GridDir dir = allowed[pick(rng, allowed.size())];
      std::int64_t nx = cx + (dir == GridDir::E) - (dir == GridDir::W);
      std::int64_t ny = cy + (dir == GridDir::N) - (dir == GridDir::S);
      s.hH += nx - cx;
      s.hV += ny - cy;
      // first wave: the part of the new ball one hop beyond the old one
      sphere(cx, cy, r + 1, [&](std::int64_t a, std::int64_t b) {
        if (l1(a, b, nx, ny) <= r + 1) grid_infect(net, s, a, b, t);
      });
      if (t + 1 <= p.T)
        sphere(nx, ny, r + 1, [&](std::int64_t a, std::int64_t b) { grid_infect(net, s, a, b, t + 1); });
      cx = nx;
      cy = ny;
      s.last_pass = true;
    }
    NodeId c = Network::grid_encode(cx, cy);
    int hnow = static_cast<int>(std::llabs(s.hH) + std::llabs(s.hV));
    for (int k = t; k <= std::min(t + 1, p.T); ++k) {
      s.vs[k] = c;
      s.hs[k] = hnow;
    }
  }
  return s;
}

PolyaRun spread_polya_line(int n, int source, Rng& rng, int horizon) {
  require(n >= 1, ErrorKind::InvalidParameter, "line needs n >= 1");
  require(source >= 1 && source <= n, ErrorKind::InvalidParameter, "source must lie in [1, n]");
  PolyaRun r;
  r.n = n;
  r.source = source;
  r.left = bernoulli(rng, 0.5);
  r.q = uniform01(rng);
  const int dir = r.left ? -1 : 1;
  int lo = source, hi = source;  // infected interval, unclipped
  int h = 0;
  r.hs.push_back(0);
  auto note = [&](int t) {
    if (r.T1 == 0 && lo <= 0) r.T1 = t;
    if (r.T2 == 0 && hi >= n + 1) r.T2 = t;
  };
  auto extend = [&](int side) {
    if (side < 0) --lo;
    else ++hi;
  };
  // t = 1: token to the neighbour in direction D; t = 2: that neighbour infects its far side
  h = 1;
  extend(dir);
  r.hs.push_back(h);
  note(1);
  extend(dir);
  r.hs.push_back(h);
  note(2);
  int t = 3;
  while (r.T1 == 0 || r.T2 == 0 || t <= horizon) {
    if (bernoulli(rng, r.q)) {
      ++h;
      extend(dir);
      r.hs.push_back(h);
      note(t);
      extend(dir);
      r.hs.push_back(h);
      note(t + 1);
    } else {
      extend(-1);
      extend(1);
      r.hs.push_back(h);
      note(t);
      r.hs.push_back(h);
      note(t + 1);
    }
    t += 2;
  }
  return r;
}

}  // namespace adlab
