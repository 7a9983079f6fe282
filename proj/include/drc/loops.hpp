#pragma once

// Cluster boundary loops, holes and their parities, the loop-family metric,
// and conformal radii via random-walk exit sampling.

#include <drc/fields.hpp>

namespace drc {

struct Loop {
  std::vector<Vec2> points;  // closed polyline (first point not repeated)
  int cluster = -1;
  bool is_outer = false;  // outer boundary of its cluster
  bool hole_odd = false;  // for inner boundaries
  double area = 0.0;      // signed area of the polyline

  double diameter() const {
    double d = 0;
    for (size_t i = 0; i < points.size(); ++i)
      for (size_t j = i + 1; j < points.size(); ++j) d = std::max(d, (points[i] - points[j]).norm());
    return d;
  }
};

inline double signed_area(const std::vector<Vec2>& pts) {
  double a = 0;
  for (size_t i = 0; i < pts.size(); ++i) a += cross(pts[i], pts[(i + 1) % pts.size()]);
  return a / 2;
}

inline bool point_in_polygon(const std::vector<Vec2>& pts, Vec2 p) {
  bool in = false;
  for (size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++) {
    if (((pts[i].y > p.y) != (pts[j].y > p.y)) &&
        (p.x < (pts[j].x - pts[i].x) * (p.y - pts[i].y) / (pts[j].y - pts[i].y) + pts[i].x))
      in = !in;
  }
  return in;
}

struct LoopFamily {
  std::vector<Loop> loops;
  std::vector<int> parent;  // nesting forest: enclosing loop id or -1
};

namespace detail {

// Position used for a dual vertex when tracing loops; visits to the outer
// face take a point pushed outward from the crossing.
}  // namespace detail

// Trace the loops of the directed crossing set {half-edges origin in S, dest
// not in S} keeping S on the left. `member` maps vertex -> in S.
inline std::vector<Loop> trace_crossing_loops(const PlanarMap& g, const std::vector<char>& member) {
  std::vector<char> used(g.halves.size(), 0);
  std::vector<Loop> out;
  for (int h0 = 0; h0 < static_cast<int>(g.halves.size()); ++h0) {
    if (used[h0]) continue;
    if (!member[g.halves[h0].origin] || member[g.dest(h0)]) continue;
    Loop loop;
    int h = h0;
    do {
      used[h] = 1;
      // point at the crossing: midpoint of the edge
      Vec2 a = g.pos[g.halves[h].origin], b = g.pos[g.dest(h)];
      Vec2 mid = (a + b) * 0.5;
      loop.points.push_back(mid);
      int f = g.halves[h].face;
      bool outer = g.faces[f].outer;
      if (!outer) {
        loop.points.push_back(g.face_centroid(f));
      } else {
        Vec2 d = b - a;
        Vec2 left{-d.y, d.x};
        loop.points.push_back(mid + left * 0.35);
      }
      // next crossing around f: follow the face cycle backward (toward the
      // origin side of h), which keeps the cluster on the left also at saddle
      // faces; through the outer face the walk hugs the boundary just outside
      int m = g.halves[h].prev;
      int guard = 0;
      while (!(member[g.dest(m)] && !member[g.halves[m].origin])) {
        if (outer) {
          Vec2 pa = g.pos[g.halves[m].origin], pb = g.pos[g.dest(m)];
          Vec2 d = pb - pa;
          Vec2 left{-d.y, d.x};
          loop.points.push_back((pa + pb) * 0.5 + left * 0.35);
        }
        m = g.halves[m].prev;
        if (++guard > 4 * g.num_edges()) throw std::runtime_error("loop trace stuck");
      }
      h = g.halves[m].twin;
    } while (h != h0);
    loop.area = signed_area(loop.points);
    out.push_back(std::move(loop));
  }
  return out;
}

// Holes of one cluster: bounded components of the face graph with the
// cluster's edges removed; their boundary loops cross only cluster edges.
struct Hole {
  std::vector<int> faces;
  bool odd = false;
  Loop boundary;
};

inline std::vector<Hole> cluster_holes(const PlanarMap& g, const std::vector<std::uint8_t>& cls,
                                       const ClusterData& cd, int cluster,
                                       const std::vector<std::vector<char>>& odd_around) {
  // face components avoiding the cluster's edges
  std::vector<int> comp(g.num_faces(), -1);
  int ncomp = 0;
  for (int f0 = 0; f0 < g.num_faces(); ++f0) {
    if (comp[f0] != -1) continue;
    std::vector<int> stack{f0};
    comp[f0] = ncomp;
    while (!stack.empty()) {
      int f = stack.back();
      stack.pop_back();
      for (int h : g.face_cycle(f)) {
        int e = g.halves[h].edge;
        if (cd.of_edge[e] == cluster && cls[e] != ClassZero) continue;  // blocked
        int o = g.halves[g.halves[h].twin].face;
        if (comp[o] == -1) {
          comp[o] = ncomp;
          stack.push_back(o);
        }
      }
    }
    ++ncomp;
  }
  int outside = comp[g.outer_face];
  std::vector<Hole> holes(ncomp);
  for (int f = 0; f < g.num_faces(); ++f)
    if (comp[f] != outside) holes[comp[f]].faces.push_back(f);
  std::vector<Hole> out;
  for (int k = 0; k < ncomp; ++k) {
    if (k == outside || holes[k].faces.empty()) continue;
    Hole& hl = holes[k];
    hl.odd = odd_around[hl.faces.front()][cluster];
    // boundary loop: the largest closed curve of half-edges whose face is in
    // the hole and whose twin's face is not
    std::vector<char> used(g.halves.size(), 0);
    for (int h0 = 0; h0 < static_cast<int>(g.halves.size()); ++h0) {
      if (used[h0]) continue;
      if (comp[g.halves[h0].face] != k) continue;
      if (comp[g.halves[g.halves[h0].twin].face] == k) continue;
      Loop cur;
      int h = h0;
      do {
        used[h] = 1;
        Vec2 a = g.pos[g.halves[h].origin], b = g.pos[g.dest(h)];
        cur.points.push_back((a + b) * 0.5);
        // advance along the component boundary around dest(h)
        int m = g.halves[h].next;
        int guard = 0;
        while (comp[g.halves[m].face] != k ||
               comp[g.halves[g.halves[m].twin].face] == k) {
          m = g.halves[g.halves[m].twin].next;
          if (++guard > 4 * static_cast<int>(g.halves.size()))
            throw std::runtime_error("hole trace stuck");
        }
        h = m;
      } while (h != h0);
      cur.area = signed_area(cur.points);
      cur.hole_odd = hl.odd;
      cur.cluster = cluster;
      if (std::abs(cur.area) > std::abs(hl.boundary.area) || hl.boundary.points.empty())
        hl.boundary = std::move(cur);
    }
    out.push_back(std::move(hl));
  }
  return out;
}

// Full loop family of a trace: per cluster one outer boundary plus hole
// boundaries, with parities, and the nesting forest.
inline LoopFamily extract_loops(const PlanarMap& g, const std::vector<std::uint8_t>& cls,
                                const ClusterData& cd) {
  LoopFamily fam;
  auto odd = odd_around_faces(g, cls, cd);
  for (int c = 0; c < cd.count; ++c) {
    std::vector<char> member(g.num_vertices(), 0);
    for (int v = 0; v < g.num_vertices(); ++v) member[v] = cd.of_vertex[v] == c;
    auto raw = trace_crossing_loops(g, member);
    // the outer boundary is the loop with the largest absolute area
    int best = -1;
    double besta = -1;
    for (size_t i = 0; i < raw.size(); ++i)
      if (std::abs(raw[i].area) > besta) {
        besta = std::abs(raw[i].area);
        best = static_cast<int>(i);
      }
    if (best >= 0) {
      raw[best].is_outer = true;
      raw[best].cluster = c;
      fam.loops.push_back(std::move(raw[best]));
    }
    for (auto& hl : cluster_holes(g, cls, cd, c, odd))
      if (!hl.boundary.points.empty()) fam.loops.push_back(std::move(hl.boundary));
  }
  // nesting forest by containment (test one point, break area ties by size)
  int n = static_cast<int>(fam.loops.size());
  fam.parent.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    double besta = 1e300;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if (std::abs(fam.loops[j].area) <= std::abs(fam.loops[i].area)) continue;
      if (!point_in_polygon(fam.loops[j].points, fam.loops[i].points.front())) continue;
      if (std::abs(fam.loops[j].area) < besta) {
        besta = std::abs(fam.loops[j].area);
        fam.parent[i] = j;
      }
    }
  }
  return fam;
}

// ---------------------------------------------------------------------------
// Loop-family metric. Loops are resampled to a fixed number of arclength-
// uniform points; the loop distance is the sup distance minimized over cyclic
// shifts and orientation, and d(F,F') is the smallest epsilon on the grid
// admitting one-to-one matchings of the epsilon-large loops both ways.

inline std::vector<Vec2> resample_loop(const std::vector<Vec2>& pts, int n) {
  size_t m = pts.size();
  std::vector<double> cum(m + 1, 0.0);
  for (size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + (pts[(i + 1) % m] - pts[i]).norm();
  double total = cum[m];
  std::vector<Vec2> out;
  out.reserve(n);
  size_t i = 0;
  for (int k = 0; k < n; ++k) {
    double target = total * k / n;
    while (i + 1 < m && cum[i + 1] < target) ++i;
    double seg = cum[i + 1] - cum[i];
    double t = seg > 0 ? (target - cum[i]) / seg : 0.0;
    Vec2 a = pts[i], b = pts[(i + 1) % m];
    out.push_back(a + (b - a) * std::clamp(t, 0.0, 1.0));
  }
  return out;
}

inline double loop_distance(const Loop& g1, const Loop& g2, int n = 64) {
  auto a = resample_loop(g1.points, n);
  auto b = resample_loop(g2.points, n);
  double best = 1e300;
  for (int dir = 0; dir < 2; ++dir) {
    for (int s = 0; s < n; ++s) {
      double worst = 0;
      for (int k = 0; k < n && worst < best; ++k) {
        int j = dir ? (s - k % n + 2 * n) % n : (s + k) % n;
        worst = std::max(worst, (a[k] - b[j]).norm());
      }
      best = std::min(best, worst);
    }
  }
  return best;
}

namespace detail {

inline bool bipartite_match(const std::vector<std::vector<char>>& ok, std::vector<int>& match_r,
                            int nl, int nr) {
  match_r.assign(nr, -1);
  std::vector<int> match_l(nl, -1);
  std::function<bool(int, std::vector<char>&)> aug = [&](int u, std::vector<char>& vis) {
    for (int v = 0; v < nr; ++v) {
      if (!ok[u][v] || vis[v]) continue;
      vis[v] = 1;
      if (match_r[v] == -1 || aug(match_r[v], vis)) {
        match_r[v] = u;
        match_l[u] = v;
        return true;
      }
    }
    return false;
  };
  for (int u = 0; u < nl; ++u) {
    std::vector<char> vis(nr, 0);
    if (!aug(u, vis)) return false;
  }
  return true;
}

}  // namespace detail

inline bool families_match_at(const LoopFamily& f1, const LoopFamily& f2, double eps) {
  std::vector<int> big1, big2;
  for (size_t i = 0; i < f1.loops.size(); ++i)
    if (f1.loops[i].diameter() > eps) big1.push_back(static_cast<int>(i));
  for (size_t i = 0; i < f2.loops.size(); ++i)
    if (f2.loops[i].diameter() > eps) big2.push_back(static_cast<int>(i));
  auto one_way = [&](const std::vector<int>& from, const LoopFamily& ff, const std::vector<int>& to,
                     const LoopFamily& tf) {
    int nl = static_cast<int>(from.size()), nr = static_cast<int>(to.size());
    if (nl == 0) return true;
    if (nl > nr) return false;
    std::vector<std::vector<char>> ok(nl, std::vector<char>(nr, 0));
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nr; ++j)
        ok[i][j] = loop_distance(ff.loops[from[i]], tf.loops[to[j]]) <= eps;
    std::vector<int> mr;
    return detail::bipartite_match(ok, mr, nl, nr);
  };
  return one_way(big1, f1, big2, f2) && one_way(big2, f2, big1, f1);
}

inline double loop_metric(const LoopFamily& f1, const LoopFamily& f2,
                          const std::vector<double>& eps_grid) {
  for (double e : eps_grid)
    if (families_match_at(f1, f2, e)) return e;
  return eps_grid.empty() ? 0.0 : eps_grid.back() * 2;  // beyond the grid
}

// ---------------------------------------------------------------------------
// Conformal radius of a loop around z0: log R = E[log |B_exit - z0|] for a
// random walk started at z0 and stopped when it leaves the enclosed region.

struct ConformalRadius {
  double radius = 0.0;
  double stderr_log = 0.0;
};

inline ConformalRadius conformal_radius(const Loop& loop, Vec2 z0, std::mt19937_64& rng,
                                        int n_paths = 400, double step_hint = 0.0) {
  if (!point_in_polygon(loop.points, z0)) throw std::invalid_argument("z0 outside the loop");
  // bitmap of the inside at resolution ~ step
  double minx = 1e300, maxx = -1e300, miny = 1e300, maxy = -1e300;
  for (auto& p : loop.points) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  double diam = std::max(maxx - minx, maxy - miny);
  double step = step_hint > 0 ? step_hint : diam / 96.0;
  int nx = static_cast<int>((maxx - minx) / step) + 3;
  int ny = static_cast<int>((maxy - miny) / step) + 3;
  std::vector<char> inside(static_cast<size_t>(nx) * ny, 0);
  auto idx = [&](int i, int j) { return static_cast<size_t>(j) * nx + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Vec2 p{minx + (i - 1) * step, miny + (j - 1) * step};
      inside[idx(i, j)] = point_in_polygon(loop.points, p);
    }
  auto cell = [&](Vec2 p) {
    int i = static_cast<int>(std::floor((p.x - minx) / step)) + 1;
    int j = static_cast<int>(std::floor((p.y - miny) / step)) + 1;
    return std::pair<int, int>(std::clamp(i, 0, nx - 1), std::clamp(j, 0, ny - 1));
  };
  double sum = 0, sumsq = 0;
  for (int k = 0; k < n_paths; ++k) {
    auto [i, j] = cell(z0);
    int guard = 0;
    while (inside[idx(i, j)]) {
      int dir = static_cast<int>(uniform01(rng) * 4);
      i += dir == 0 ? 1 : dir == 1 ? -1 : 0;
      j += dir == 2 ? 1 : dir == 3 ? -1 : 0;
      i = std::clamp(i, 0, nx - 1);
      j = std::clamp(j, 0, ny - 1);
      if (++guard > 40000000) throw std::runtime_error("walk did not exit");
    }
    Vec2 p{minx + (i - 1) * step, miny + (j - 1) * step};
    double lg = std::log((p - z0).norm());
    sum += lg;
    sumsq += lg * lg;
  }
  ConformalRadius cr;
  double mean = sum / n_paths;
  cr.radius = std::exp(mean);
  cr.stderr_log = std::sqrt(std::max(0.0, sumsq / n_paths - mean * mean) / n_paths);
  return cr;
}

}  // namespace drc
