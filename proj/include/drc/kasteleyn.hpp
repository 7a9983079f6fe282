#pragma once

// Kasteleyn weighting, determinants and inverse on the city graph, exact
// dimer sampling, and the windowed determinantal sampler for selected edges.

#include <Eigen/Dense>
#include <complex>
#include <numbers>
#include <queue>

#include <drc/decorations.hpp>
#include <drc/rng.hpp>

#ifdef DRC_USE_LAPACKE
#include <lapacke.h>
#endif

namespace drc {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Phase assignment.

struct PhaseAssignment {
  std::vector<cplx> phase;  // per C_G edge, |phase| = 1
  bool lattice = true;      // diamond-angle weighting (theta = pi/2) vs generic
};

// Alternating product condition around every bounded face:
// prod varsigma_{e1} varsigma_{e2}^{-1} ... = (-1)^{k+1} for a 2k-cycle.
inline bool kasteleyn_condition_ok(const CityGraph& cg, const PhaseAssignment& pa,
                                   double tol = 1e-9) {
  const PlanarMap& m = cg.map;
  for (int f = 0; f < m.num_faces(); ++f) {
    if (f == m.outer_face) continue;
    auto cyc = m.face_cycle(f);
    int k2 = static_cast<int>(cyc.size());
    if (k2 % 2) return false;
    cplx prod(1, 0);
    for (int i = 0; i < k2; ++i) {
      cplx s = pa.phase[m.halves[cyc[i]].edge];
      prod *= (i % 2 == 0) ? s : cplx(1, 0) / s;
    }
    double target = (k2 / 2) % 2 == 0 ? -1.0 : 1.0;  // (-1)^(k+1)
    if (std::abs(prod - cplx(target, 0)) > tol) return false;
  }
  return true;
}

// Diamond-angle weighting for square-lattice domains: roads get -1, streets
// get exp(+-i theta/2) with theta = pi/2; the sign depends on whether the
// street runs along a primal or a dual edge. A road through a sector of the
// outer face absorbs the angular deficit of its vertex: the city face there
// only sees deg(v) quarter-turns instead of a full 2 pi, so that road carries
// -exp(i(pi - deg(v) pi/4)) to keep the alternating product condition.
inline PhaseAssignment build_weighting(const CityGraph& cg) {
  PhaseAssignment pa;
  pa.lattice = true;
  int n = cg.map.num_edges();
  pa.phase.resize(n);
  double th = std::numbers::pi / 2;
  cplx primal = std::polar(1.0, +th / 2);
  cplx dual = std::polar(1.0, -th / 2);
  const PlanarMap& g = *cg.g;
  for (int e = 0; e < n; ++e) {
    switch (cg.kind[e]) {
      case CityGraph::Road: {
        int h = cg.road_corner[e];
        cplx ph(-1, 0);
        if (g.faces[g.halves[h].face].outer) {
          int d = g.degree(g.halves[h].origin);
          ph = -std::polar(1.0, std::numbers::pi * (1.0 - d / 4.0));
        }
        pa.phase[e] = ph;
        break;
      }
      case CityGraph::StreetPrimal: pa.phase[e] = primal; break;
      case CityGraph::StreetDual: pa.phase[e] = dual; break;
    }
  }
  if (!kasteleyn_condition_ok(cg, pa))
    throw std::runtime_error("kasteleyn condition violated (embedding bug?)");
  return pa;
}

// Generic +-1 weighting for arbitrary planar bipartite city graphs (used for
// the non-lattice corpus graphs). Roads keep the value -1 where possible; the
// dual spanning tree fixes one street per bounded face, leaves first.
inline PhaseAssignment build_weighting_generic(const CityGraph& cg) {
  const PlanarMap& m = cg.map;
  PhaseAssignment pa;
  pa.lattice = false;
  pa.phase.assign(m.num_edges(), cplx(0, 0));
  // dual BFS tree rooted at the outer face
  std::vector<int> parent_edge(m.num_faces(), -1), depth(m.num_faces(), -1);
  std::queue<int> q;
  depth[m.outer_face] = 0;
  q.push(m.outer_face);
  while (!q.empty()) {
    int f = q.front();
    q.pop();
    for (int h : m.face_cycle(f)) {
      int o = m.halves[m.halves[h].twin].face;
      if (depth[o] == -1) {
        depth[o] = depth[f] + 1;
        parent_edge[o] = m.halves[h].edge;
        q.push(o);
      }
    }
  }
  std::vector<char> is_fixer(m.num_edges(), 0);
  for (int f = 0; f < m.num_faces(); ++f)
    if (f != m.outer_face) is_fixer[parent_edge[f]] = 1;
  for (int e = 0; e < m.num_edges(); ++e)
    if (!is_fixer[e]) pa.phase[e] = cg.kind[e] == CityGraph::Road ? cplx(-1, 0) : cplx(1, 0);
  // deepest faces first: all non-fixer edges of the face are already set
  std::vector<int> order;
  for (int f = 0; f < m.num_faces(); ++f)
    if (f != m.outer_face) order.push_back(f);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return depth[a] > depth[b]; });
  for (int f : order) {
    auto cyc = m.face_cycle(f);
    int k2 = static_cast<int>(cyc.size());
    double target = (k2 / 2) % 2 == 0 ? -1.0 : 1.0;
    cplx prod(1, 0);
    int free_pos = -1;
    for (int i = 0; i < k2; ++i) {
      int e = m.halves[cyc[i]].edge;
      if (e == parent_edge[f] && pa.phase[e] == cplx(0, 0)) {
        free_pos = i;
        continue;
      }
      cplx s = pa.phase[e];
      if (s == cplx(0, 0)) throw std::runtime_error("weighting order broken");
      prod *= (i % 2 == 0) ? s : 1.0 / s;
    }
    if (free_pos == -1) continue;  // already consistent by construction
    cplx need = cplx(target, 0) / prod;
    pa.phase[parent_edge[f]] = (free_pos % 2 == 0) ? need : 1.0 / need;
  }
  for (auto& p : pa.phase)
    if (p == cplx(0, 0)) p = cplx(1, 0);
  if (!kasteleyn_condition_ok(cg, pa)) throw std::runtime_error("generic weighting failed");
  return pa;
}

inline PhaseAssignment build_weighting_auto(const CityGraph& cg) {
  // lattice weighting whenever the diamond angles are the square-lattice ones
  PhaseAssignment pa;
  try {
    pa = build_weighting(cg);
  } catch (const std::exception&) {
    pa = build_weighting_generic(cg);
  }
  return pa;
}

// ---------------------------------------------------------------------------
// Kasteleyn matrix. Rows are black vertices, columns white, both ordered by
// the corner order (corner id = outgoing primal half-edge id, ascending).

struct KasteleynMatrix {
  Eigen::MatrixXcd k;
  std::vector<int> corner_ids;     // matrix index -> corner (primal half id)
  std::vector<int> row_of_vertex;  // C_G black vertex -> row (-1 otherwise)
  std::vector<int> col_of_vertex;  // C_G white vertex -> col
  const CityGraph* cg = nullptr;
};

inline KasteleynMatrix build_kasteleyn(const CityGraph& cg, const PhaseAssignment& pa) {
  KasteleynMatrix km;
  km.cg = &cg;
  for (int h = 0; h < static_cast<int>(cg.corner_wb.size()); ++h)
    if (cg.corner_wb[h].first >= 0) km.corner_ids.push_back(h);
  int m = static_cast<int>(km.corner_ids.size());
  km.row_of_vertex.assign(cg.map.num_vertices(), -1);
  km.col_of_vertex.assign(cg.map.num_vertices(), -1);
  for (int i = 0; i < m; ++i) {
    auto [w, b] = cg.corner_wb[km.corner_ids[i]];
    km.col_of_vertex[w] = i;
    km.row_of_vertex[b] = i;
  }
  km.k = Eigen::MatrixXcd::Zero(m, m);
  for (int e = 0; e < cg.map.num_edges(); ++e) {
    auto [h, t] = cg.map.edge_halves(e);
    int a = cg.map.halves[h].origin, b = cg.map.halves[t].origin;
    int wv = cg.black[a] ? b : a;
    int bv = cg.black[a] ? a : b;
    km.k(km.row_of_vertex[bv], km.col_of_vertex[wv]) = pa.phase[e] * cg.map.edges[e].weight;
  }
  return km;
}

// ---------------------------------------------------------------------------
// LU helpers (log-domain determinant, dense inverse).

struct LogDet {
  double log_abs = 0.0;  // log |det|
  cplx phase{1, 0};
  bool singular = false;
};

inline LogDet logdet(const Eigen::MatrixXcd& a) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  LogDet r;
  auto diag = lu.matrixLU().diagonal();
  for (int i = 0; i < diag.size(); ++i) {
    double m = std::abs(diag[i]);
    if (m == 0.0) {
      r.singular = true;
      return r;
    }
    r.log_abs += std::log(m);
    r.phase *= diag[i] / m;
  }
  int sign = lu.permutationP().determinant();
  r.phase *= static_cast<double>(sign);
  return r;
}

inline Eigen::MatrixXcd dense_inverse(const Eigen::MatrixXcd& a) {
#ifdef DRC_USE_LAPACKE
  if (a.rows() >= 512) {
    Eigen::MatrixXcd inv = a;
    int n = static_cast<int>(a.rows());
    std::vector<int> ipiv(n);
    int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n,
                              reinterpret_cast<lapack_complex_double*>(inv.data()), n, ipiv.data());
    if (info != 0) throw std::runtime_error("zgetrf failed: singular kasteleyn matrix");
    info = LAPACKE_zgetri(LAPACK_COL_MAJOR, n,
                          reinterpret_cast<lapack_complex_double*>(inv.data()), n, ipiv.data());
    if (info != 0) throw std::runtime_error("zgetri failed");
    return inv;
  }
#endif
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  if (std::abs(lu.determinant()) == 0.0) throw std::runtime_error("no perfect matching: singular matrix");
  return lu.inverse();
}

// |det K| in log scale; this equals log Z of the dimer model on C_G.
inline LogDet partition_function(const KasteleynMatrix& km) {
  if (km.cg->map.num_vertices() % 2)
    throw std::runtime_error("odd vertex count: no perfect matching");
  LogDet d = logdet(km.k);
  if (d.singular) throw std::runtime_error("no perfect matching");
  return d;
}

// Edge inclusion probability P(e in M) = |K(b,w) K^-1(w,b)|.
inline double edge_probability(const KasteleynMatrix& km, const Eigen::MatrixXcd& kinv, int cg_edge) {
  const CityGraph& cg = *km.cg;
  auto [h, t] = cg.map.edge_halves(cg_edge);
  int a = cg.map.halves[h].origin, b = cg.map.halves[t].origin;
  int wv = cg.black[a] ? b : a;
  int bv = cg.black[a] ? a : b;
  int r = km.row_of_vertex[bv], c = km.col_of_vertex[wv];
  cplx p = km.k(r, c) * kinv(c, r);
  return std::abs(p);
}

// ---------------------------------------------------------------------------
// Exact whole-configuration sampler: sequential conditioning over white
// vertices with rank-one updates of the running inverse. O(n^3) per sample.

struct DimerCover {
  std::vector<int> edges;            // C_G edge ids
  std::vector<int> partner_of;       // C_G vertex -> matched C_G vertex
};

inline DimerCover sample_dimer_exact(const KasteleynMatrix& km, const Eigen::MatrixXcd& kinv,
                                     std::mt19937_64& rng) {
  const CityGraph& cg = *km.cg;
  int m = static_cast<int>(km.corner_ids.size());
  Eigen::MatrixXcd a = kinv;  // a(w_col, b_row) = current conditional inverse
  std::vector<char> row_done(m, 0), col_done(m, 0);
  DimerCover cover;
  cover.partner_of.assign(cg.map.num_vertices(), -1);

  // adjacency: for each white column, candidate (black row, edge id, K entry)
  std::vector<std::vector<std::tuple<int, int, cplx>>> cand(m);
  for (int e = 0; e < cg.map.num_edges(); ++e) {
    auto [h, t] = cg.map.edge_halves(e);
    int va = cg.map.halves[h].origin, vb = cg.map.halves[t].origin;
    int wv = cg.black[va] ? vb : va;
    int bv = cg.black[va] ? va : vb;
    cand[km.col_of_vertex[wv]].push_back({km.row_of_vertex[bv], e, km.k(km.row_of_vertex[bv], km.col_of_vertex[wv])});
  }
  for (int w = 0; w < m; ++w) {
    double total = 0.0;
    std::array<double, 8> probs{};
    int nc = 0;
    for (auto& [r, e, kv] : cand[w]) {
      double p = row_done[r] ? 0.0 : (kv * a(w, r)).real();
      probs[nc++] = std::max(p, 0.0);
      total += std::max(p, 0.0);
    }
    if (!(std::abs(total - 1.0) < 1e-6))
      throw std::runtime_error("dimer sampler: conditional probabilities degenerate");
    double u = uniform01(rng) * total;
    int pick = -1;
    for (int i = 0; i < nc; ++i) {
      u -= probs[i];
      if (u <= 0) {
        pick = i;
        break;
      }
    }
    if (pick < 0) pick = nc - 1;
    auto [r, e, kv] = cand[w][pick];
    cover.edges.push_back(e);
    auto [h, t] = cg.map.edge_halves(e);
    int va = cg.map.halves[h].origin, vb = cg.map.halves[t].origin;
    cover.partner_of[va] = vb;
    cover.partner_of[vb] = va;
    row_done[r] = 1;
    col_done[w] = 1;
    // condition on (w matched to r): Schur update of the inverse
    cplx pivot = a(w, r);
    if (std::abs(pivot) < 1e-12) throw std::runtime_error("dimer sampler: pivot breakdown");
    for (int ww = 0; ww < m; ++ww) {
      if (col_done[ww]) continue;
      cplx f = a(ww, r) / pivot;
      if (f == cplx(0, 0)) continue;
      for (int rr = 0; rr < m; ++rr) {
        if (row_done[rr]) continue;
        a(ww, rr) -= f * a(w, rr);
      }
    }
  }
  return cover;
}

// ---------------------------------------------------------------------------
// Windowed sampler: joint inclusion state of a chosen edge subset. The edge
// process is determinantal with kernel L(e,f) = K(b_e,w_e) K^-1(w_e, b_f);
// conditioning on inclusion/exclusion is a rank-one update.

inline std::vector<char> sample_edge_window(const KasteleynMatrix& km, const Eigen::MatrixXcd& kinv,
                                            const std::vector<int>& window_edges,
                                            std::mt19937_64& rng) {
  const CityGraph& cg = *km.cg;
  int k = static_cast<int>(window_edges.size());
  Eigen::MatrixXcd L(k, k);
  std::vector<int> wcol(k), brow(k);
  for (int i = 0; i < k; ++i) {
    auto [h, t] = cg.map.edge_halves(window_edges[i]);
    int va = cg.map.halves[h].origin, vb = cg.map.halves[t].origin;
    int wv = cg.black[va] ? vb : va;
    int bv = cg.black[va] ? va : vb;
    wcol[i] = km.col_of_vertex[wv];
    brow[i] = km.row_of_vertex[bv];
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) L(i, j) = km.k(brow[i], wcol[i]) * kinv(wcol[i], brow[j]);
  std::vector<char> included(k, 0);
  for (int i = 0; i < k; ++i) {
    double p = L(i, i).real();
    if (p < -1e-7 || p > 1 + 1e-7) throw std::runtime_error("window sampler: probability out of range");
    p = std::clamp(p, 0.0, 1.0);
    bool inc = uniform01(rng) < p;
    included[i] = inc;
    cplx denom = L(i, i) - (inc ? cplx(0, 0) : cplx(1, 0));
    if (std::abs(denom) < 1e-14) {
      // deterministic outcome; remaining correlations with e are unchanged
      continue;
    }
    Eigen::VectorXcd col = L.col(i), row = L.row(i);
    for (int a2 = i + 1; a2 < k; ++a2)
      for (int b2 = i + 1; b2 < k; ++b2) L(a2, b2) -= col(a2) * row(b2) / denom;
  }
  return included;
}

}  // namespace drc
