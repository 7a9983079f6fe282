#pragma once

// Quantitative experiments: Green's function of a rectangle, height moments
// against the pairing targets, crossing-event counters, conformal-radius
// driven cluster counts, and the Brownian exit-time constant.

#include <thread>

#include <drc/fields.hpp>
#include <drc/loops.hpp>
#include <drc/wolff.hpp>

namespace drc {

inline double gff_lambda() { return std::sqrt(std::numbers::pi / 8); }

// ---------------------------------------------------------------------------
// Dirichlet Green's function of the rectangle (0,w)x(0,h), normalized by
// Delta G = -delta_x (half-plane form (1/2pi) log |(z-bar w)/(z-w)|). The
// eigenseries is resummed: per horizontal mode the vertical factor minus its
// strip limit decays exponentially, and the strip part has a closed form.
inline double green_rectangle(Vec2 a, Vec2 b, double w, double h, double tail_tol = 1e-9) {
  if ((a - b).norm() < 1e-14) throw std::invalid_argument("coincident points");
  double A = std::numbers::pi * a.x / w, B = std::numbers::pi * b.x / w;
  double ylo = std::min(a.y, b.y), yhi = std::max(a.y, b.y);
  double delta = yhi - ylo;
  double q = std::exp(-std::numbers::pi * delta / w);
  // strip part: sum sin(mA) sin(mB) q^m / (m pi)
  double strip = (1.0 / (4 * std::numbers::pi)) *
                 std::log((1 - 2 * q * std::cos(A + B) + q * q) /
                          (1 - 2 * q * std::cos(A - B) + q * q));
  double corr = 0;
  for (int m = 1;; ++m) {
    double k = m * std::numbers::pi / w;
    double e_d = std::exp(-k * delta);
    double e_lo = std::exp(-2 * k * ylo);
    double e_hi = std::exp(-2 * k * (h - yhi));
    double e_h = std::exp(-2 * k * h);
    double gm = e_d * (1 - e_lo) * (1 - e_hi) / (2 * k * (1 - e_h));
    double cm = gm - e_d / (2 * k);
    corr += (2.0 / w) * std::sin(m * A) * std::sin(m * B) * cm;
    // crude geometric tail bound on the correction terms
    double bound = (2.0 / w) * (e_d * (e_lo + e_hi + 2 * e_h)) / (2 * k * (1 - e_h));
    double ratio = std::exp(-std::numbers::pi * (delta + 2 * std::min(ylo, h - yhi)) / w);
    if (bound / std::max(1e-300, 1 - ratio) < tail_tol && m > 4) break;
    if (m > 100000) break;
  }
  return strip + corr;
}

// Plain truncated double series, kept as an independent cross-check.
inline double green_rectangle_series(Vec2 a, Vec2 b, double w, double h, int mmax) {
  double s = 0;
  for (int m = 1; m <= mmax; ++m)
    for (int n = 1; n <= mmax; ++n) {
      double num = std::sin(m * std::numbers::pi * a.x / w) * std::sin(m * std::numbers::pi * b.x / w) *
                   std::sin(n * std::numbers::pi * a.y / h) * std::sin(n * std::numbers::pi * b.y / h);
      double lam = std::numbers::pi * std::numbers::pi * (m * m / (w * w) + n * n / (h * h));
      s += 4.0 / (w * h) * num / lam;
    }
  return s;
}

inline double green_half_plane(cplx x, cplx y) {
  return std::log(std::abs((x - std::conj(y)) / (x - y))) / (2 * std::numbers::pi);
}

// ---------------------------------------------------------------------------
// Point heights through the windowed sampler. Heights on faces of G need only
// road states along a dual path from the outer face.

struct HeightWindow {
  std::vector<int> window;  // C_G road edge ids (the joint sampling window)
  struct Term {
    int index;  // into window
    int sign;
  };
  std::vector<std::vector<Term>> paths;  // per target face
};

inline HeightWindow build_height_window(const CityGraph& cg, const std::vector<int>& target_faces) {
  const PlanarMap& c = cg.map;
  // BFS over C_G faces crossing only roads, rooted at the outer face
  std::vector<int> prev(c.num_faces(), -2), via(c.num_faces(), -1);
  std::queue<int> q;
  prev[c.outer_face] = -1;
  q.push(c.outer_face);
  while (!q.empty()) {
    int f = q.front();
    q.pop();
    for (int half : c.face_cycle(f)) {
      int e = c.halves[half].edge;
      if (cg.kind[e] != CityGraph::Road) continue;
      int o = c.halves[c.halves[half].twin].face;
      if (prev[o] != -2) continue;
      prev[o] = f;
      via[o] = half;  // half-edge seen from f; twin's face is o
      q.push(o);
    }
  }
  HeightWindow hw;
  std::map<int, int> edge_slot;
  for (int uface : target_faces) {
    if (prev[uface] == -2) throw std::runtime_error("face unreachable through roads");
    std::vector<HeightWindow::Term> path;
    for (int f = uface; prev[f] != -1; f = prev[f]) {
      int half = via[f];  // crossing from prev[f] into f
      int e = c.halves[half].edge;
      auto [it, fresh] = edge_slot.try_emplace(e, static_cast<int>(hw.window.size()));
      if (fresh) hw.window.push_back(e);
      int tw = c.halves[half].twin;  // the half-edge whose face is the target side
      int sgn = cg.black[c.halves[tw].origin] ? -1 : +1;
      path.push_back({it->second, sgn});
    }
    hw.paths.push_back(std::move(path));
  }
  return hw;
}

// Doubled heights of the target faces for one windowed sample.
inline std::vector<int> window_heights(const HeightWindow& hw, const std::vector<char>& included) {
  std::vector<int> out;
  out.reserve(hw.paths.size());
  for (auto& path : hw.paths) {
    int twice = 0;
    for (auto& t : path) twice += t.sign * (2 * included[t.index] - 1);
    out.push_back(twice);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Moment estimation with standard errors and pairing-formula targets.

struct MomentRow {
  std::vector<int> tuple;  // indices into the point list
  double estimate = 0.0;
  double stderr_ = 0.0;
  double target = 0.0;
  bool has_target = false;
  double z = 0.0;
};

struct MomentReport {
  std::vector<Vec2> points;
  long long samples = 0;
  std::vector<MomentRow> rows;
};

inline double pairing_target(const std::vector<int>& tuple, const std::vector<Vec2>& pts, double w,
                             double h) {
  int n = static_cast<int>(tuple.size());
  if (n % 2) return 0.0;
  // sum over pairings of products of (1/pi) G
  std::vector<int> idx(tuple.begin(), tuple.end());
  std::function<double(std::vector<int>&)> rec = [&](std::vector<int>& rest) -> double {
    if (rest.empty()) return 1.0;
    double total = 0;
    int a = rest[0];
    for (size_t k = 1; k < rest.size(); ++k) {
      int b = rest[k];
      std::vector<int> nxt;
      for (size_t j = 1; j < rest.size(); ++j)
        if (j != k) nxt.push_back(rest[j]);
      total += green_rectangle(pts[a], pts[b], w, h) / std::numbers::pi * rec(nxt);
    }
    return total;
  };
  return rec(idx);
}

// Accumulators for products of heights over tuples.
struct MomentAccum {
  std::vector<double> sum, sumsq;
  long long n = 0;
  void add(const std::vector<double>& vals) {
    if (sum.empty()) {
      sum.assign(vals.size(), 0);
      sumsq.assign(vals.size(), 0);
    }
    for (size_t i = 0; i < vals.size(); ++i) {
      sum[i] += vals[i];
      sumsq[i] += vals[i] * vals[i];
    }
    ++n;
  }
  void merge(const MomentAccum& o) {
    if (sum.empty()) {
      sum = o.sum;
      sumsq = o.sumsq;
      n = o.n;
      return;
    }
    for (size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sumsq[i] += o.sumsq[i];
    }
    n += o.n;
  }
};

// Height moments on a square domain at the faces containing the given points.
// Tuples index the point list; runs the windowed sampler with per-index rng
// streams, optionally threaded.
inline MomentReport estimate_height_moments(const Domain& dom, const CurrentSampler& sampler,
                                            const std::vector<Vec2>& points,
                                            const std::vector<std::vector<int>>& tuples,
                                            long long n_samples, std::uint64_t seed,
                                            int workers = 1) {
  const PlanarMap& g = dom.map;
  // face containing each point
  std::vector<int> faces;
  for (auto p : points) {
    int found = -1;
    for (int f = 0; f < g.num_faces() && found < 0; ++f) {
      if (g.faces[f].outer) continue;
      auto cyc = g.face_cycle(f);
      std::vector<Vec2> poly;
      for (int h : cyc) poly.push_back(g.pos[g.halves[h].origin]);
      if (point_in_polygon(poly, p)) found = f;
    }
    if (found < 0) throw std::invalid_argument("point outside the domain");
    faces.push_back(sampler.cg.face_of_u[found]);
  }
  HeightWindow hw = build_height_window(sampler.cg, faces);

  auto run_block = [&](long long lo, long long hi, MomentAccum& acc) {
    for (long long i = lo; i < hi; ++i) {
      auto rng = stream_for(seed, static_cast<std::uint64_t>(i));
      auto inc = sample_edge_window(sampler.km, sampler.kinv, hw.window, rng);
      auto twice = window_heights(hw, inc);
      std::vector<double> vals;
      vals.reserve(tuples.size());
      for (auto& t : tuples) {
        double prod = 1;
        for (int ix : t) prod *= twice[ix] / 2.0;
        vals.push_back(prod);
      }
      acc.add(vals);
    }
  };
  MomentAccum total;
  if (workers <= 1) {
    run_block(0, n_samples, total);
  } else {
    std::vector<MomentAccum> parts(workers);
    std::vector<std::thread> threads;
    for (int t = 0; t < workers; ++t)
      threads.emplace_back([&, t] {
        long long lo = n_samples * t / workers, hi = n_samples * (t + 1) / workers;
        run_block(lo, hi, parts[t]);
      });
    for (auto& th : threads) th.join();
    for (auto& p : parts) total.merge(p);
  }
  MomentReport rep;
  rep.points = points;
  rep.samples = total.n;
  double w = dom.shape.w, h = dom.shape.h;
  for (size_t k = 0; k < tuples.size(); ++k) {
    MomentRow row;
    row.tuple = tuples[k];
    row.estimate = total.sum[k] / total.n;
    double var = total.sumsq[k] / total.n - row.estimate * row.estimate;
    row.stderr_ = std::sqrt(std::max(var, 0.0) / total.n);
    // the pairing target is defined only for tuples of distinct points
    std::vector<int> sorted = tuples[k];
    std::sort(sorted.begin(), sorted.end());
    row.has_target = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
    if (row.has_target) {
      row.target = pairing_target(tuples[k], points, w, h);
      row.z = row.stderr_ > 0 ? (row.estimate - row.target) / row.stderr_ : 0.0;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Crossing events in a square annulus Lambda_R(x) minus the open interior of
// Lambda_{r}(x) (sup-norm boxes).

struct CrossingCounts {
  int k_clusters = 0;        // distinct annulus clusters crossing
  bool four_arm_square = false;  // two Lambda_R-clusters crossing
  bool four_arm_hole = false;    // two crossing holes with even flux between
};

inline CrossingCounts crossing_counts(const PlanarMap& g, const std::vector<std::uint8_t>& cls,
                                      Vec2 center, double r, double R) {
  auto supdist = [&](Vec2 p) { return std::max(std::abs(p.x - center.x), std::abs(p.y - center.y)); };
  auto in_ann = [&](Vec2 p) { return supdist(p) <= R + 1e-9 && supdist(p) >= r - 1e-9; };
  auto in_box = [&](Vec2 p) { return supdist(p) <= R + 1e-9; };

  CrossingCounts out;
  auto count_crossers = [&](auto&& edge_ok) {
    std::vector<int> parent(g.num_vertices());
    for (int v = 0; v < g.num_vertices(); ++v) parent[v] = v;
    std::function<int(int)> find = [&](int v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    for (int e = 0; e < g.num_edges(); ++e) {
      if (cls[e] == ClassZero || !edge_ok(e)) continue;
      auto [h, t] = g.edge_halves(e);
      parent[find(g.halves[h].origin)] = find(g.halves[t].origin);
    }
    std::map<int, std::pair<bool, bool>> touch;  // root -> (inner, outer)
    for (int v = 0; v < g.num_vertices(); ++v) {
      bool active = false;
      for (int hh : g.outgoing(v)) {
        int e = g.halves[hh].edge;
        if (cls[e] != ClassZero && edge_ok(e)) active = true;
      }
      if (!active) continue;
      auto& tt = touch[find(v)];
      if (supdist(g.pos[v]) <= r + 1e-9) tt.first = true;
      if (supdist(g.pos[v]) >= R - 1e-9) tt.second = true;
    }
    int k = 0;
    for (auto& [root, tt] : touch)
      if (tt.first && tt.second) ++k;
    return k;
  };
  out.k_clusters = count_crossers([&](int e) {
    auto [h, t] = g.edge_halves(e);
    return in_ann(g.pos[g.halves[h].origin]) && in_ann(g.pos[g.halves[t].origin]);
  });
  int k_box = count_crossers([&](int e) {
    auto [h, t] = g.edge_halves(e);
    return in_box(g.pos[g.halves[h].origin]) && in_box(g.pos[g.halves[t].origin]);
  });
  out.four_arm_square = k_box >= 2;

  // holes: components of annulus faces connected across zero-class edges
  std::vector<int> comp(g.num_faces(), -1);
  auto face_in_ann = [&](int f) {
    if (g.faces[f].outer) return false;
    return in_ann(g.face_centroid(f));
  };
  int ncomp = 0;
  for (int f0 = 0; f0 < g.num_faces(); ++f0) {
    if (comp[f0] != -1 || !face_in_ann(f0)) continue;
    std::vector<int> stack{f0};
    comp[f0] = ncomp;
    while (!stack.empty()) {
      int f = stack.back();
      stack.pop_back();
      for (int h : g.face_cycle(f)) {
        if (cls[g.halves[h].edge] != ClassZero) continue;
        int o = g.halves[g.halves[h].twin].face;
        if (comp[o] == -1 && face_in_ann(o)) {
          comp[o] = ncomp;
          stack.push_back(o);
        }
      }
    }
    ++ncomp;
  }
  std::vector<std::pair<bool, bool>> htouch(ncomp, {false, false});
  for (int f = 0; f < g.num_faces(); ++f) {
    if (comp[f] == -1) continue;
    double d = supdist(g.face_centroid(f));
    if (d <= r + 0.51) htouch[comp[f]].first = true;
    if (d >= R - 0.51) htouch[comp[f]].second = true;
  }
  std::vector<int> crossing_holes;
  for (int k = 0; k < ncomp; ++k)
    if (htouch[k].first && htouch[k].second) crossing_holes.push_back(k);
  if (crossing_holes.size() >= 2) {
    // shortest dual path between the first two crossing holes, flux parity
    int h1 = crossing_holes[0], h2 = crossing_holes[1];
    std::vector<int> dist(g.num_faces(), -1), par(g.num_faces(), 0);
    std::queue<int> q;
    for (int f = 0; f < g.num_faces(); ++f)
      if (comp[f] == h1) {
        dist[f] = 0;
        par[f] = 0;
        q.push(f);
      }
    int found = -1;
    while (!q.empty() && found < 0) {
      int f = q.front();
      q.pop();
      for (int h : g.face_cycle(f)) {
        int o = g.halves[g.halves[h].twin].face;
        if (dist[o] != -1 || !face_in_ann(o)) continue;
        dist[o] = dist[f] + 1;
        par[o] = par[f] ^ (cls[g.halves[h].edge] == ClassOdd ? 1 : 0);
        if (comp[o] == h2) {
          found = o;
          break;
        }
        q.push(o);
      }
    }
    if (found >= 0) out.four_arm_hole = (par[found] % 2) == 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Brownian exit times: T1 exits [-pi, (sqrt2 - 1) pi], T2 exits [-pi, pi].
// Euler scheme with a Brownian-bridge barrier test; the expectation target is
// sqrt(2) pi^2.

struct ExitMeanResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  long long paths = 0;
};

inline double exit_time_once(double lo, double hi, double dt, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, std::sqrt(dt));
  double x = 0.0, t = 0.0;
  for (;;) {
    double xn = x + nd(rng);
    t += dt;
    if (xn <= lo || xn >= hi) return t;
    // bridge crossing probabilities against both barriers
    double p_hi = std::exp(-2.0 * (hi - x) * (hi - xn) / dt);
    double p_lo = std::exp(-2.0 * (x - lo) * (xn - lo) / dt);
    if (uniform01(rng) < p_hi + p_lo) return t;
    x = xn;
  }
}

inline ExitMeanResult brownian_exit_mean(long long n_paths, std::uint64_t seed, int workers = 1,
                                         double dt = 1e-3) {
  const double pi = std::numbers::pi;
  const double hi1 = (std::sqrt(2.0) - 1.0) * pi;
  struct Acc {
    double s = 0, ss = 0;
    long long n = 0;
  };
  auto block = [&](long long lo, long long hic, Acc& a) {
    for (long long i = lo; i < hic; ++i) {
      auto rng = stream_for(seed, static_cast<std::uint64_t>(i));
      double t = exit_time_once(-pi, hi1, dt, rng) + exit_time_once(-pi, pi, dt, rng);
      a.s += t;
      a.ss += t * t;
      a.n++;
    }
  };
  Acc total;
  if (workers <= 1) {
    block(0, n_paths, total);
  } else {
    std::vector<Acc> parts(workers);
    std::vector<std::thread> ths;
    for (int t = 0; t < workers; ++t)
      ths.emplace_back([&, t] {
        block(n_paths * t / workers, n_paths * (t + 1) / workers, parts[t]);
      });
    for (auto& th : ths) th.join();
    for (auto& p : parts) {
      total.s += p.s;
      total.ss += p.ss;
      total.n += p.n;
    }
  }
  ExitMeanResult r;
  r.paths = total.n;
  r.mean = total.s / total.n;
  double var = total.ss / total.n - r.mean * r.mean;
  r.stderr_ = std::sqrt(std::max(var, 0.0) / total.n);
  return r;
}

inline ExitMeanResult brownian_single_exit_mean(double lo, double hi, long long n_paths,
                                                std::uint64_t seed, double dt = 1e-3) {
  double s = 0, ss = 0;
  for (long long i = 0; i < n_paths; ++i) {
    auto rng = stream_for(seed, static_cast<std::uint64_t>(i));
    double t = exit_time_once(lo, hi, dt, rng);
    s += t;
    ss += t * t;
  }
  ExitMeanResult r;
  r.paths = n_paths;
  r.mean = s / n_paths;
  r.stderr_ = std::sqrt(std::max(ss / n_paths - r.mean * r.mean, 0.0) / n_paths);
  return r;
}

// ---------------------------------------------------------------------------
// Cluster-count experiment: clusters surrounding the origin of a disk domain
// with outer-boundary conformal radius at least eps.

struct ClusterCountRow {
  double eps = 0.0;
  double mean_count = 0.0;
  double stderr_ = 0.0;
  double ratio = 0.0;  // mean / log(1/eps)
};

struct ClusterCountTable {
  std::vector<ClusterCountRow> rows;
  long long samples = 0;
};

inline ClusterCountTable cluster_count_experiment(const PlanarMap& disk, double x,
                                                  const std::vector<double>& eps_list,
                                                  long long n_samples, std::uint64_t seed) {
  auto rng = stream_for(seed, 0);
  McmcTraceSampler sampler = McmcTraceSampler::make(disk, x, rng);
  std::vector<double> sums(eps_list.size(), 0), sumsq(eps_list.size(), 0);
  for (long long i = 0; i < n_samples; ++i) {
    CurrentTrace tr = sampler.sample(rng);
    ClusterData cd = primal_clusters(disk, tr.primal);
    LoopFamily fam = extract_loops(disk, tr.primal, cd);
    std::vector<double> radii;
    for (auto& l : fam.loops) {
      if (!l.is_outer) continue;
      if (!point_in_polygon(l.points, {0, 0})) continue;
      radii.push_back(conformal_radius(l, {0, 0}, rng, 160).radius);
    }
    for (size_t k = 0; k < eps_list.size(); ++k) {
      int count = 0;
      for (double rad : radii)
        if (rad >= eps_list[k]) ++count;
      sums[k] += count;
      sumsq[k] += count * count;
    }
  }
  ClusterCountTable tbl;
  tbl.samples = n_samples;
  for (size_t k = 0; k < eps_list.size(); ++k) {
    ClusterCountRow row;
    row.eps = eps_list[k];
    row.mean_count = sums[k] / n_samples;
    row.stderr_ = std::sqrt(std::max(sumsq[k] / n_samples - row.mean_count * row.mean_count, 0.0) /
                            n_samples);
    row.ratio = row.mean_count / std::log(1.0 / eps_list[k]);
    tbl.rows.push_back(row);
  }
  return tbl;
}

}  // namespace drc
