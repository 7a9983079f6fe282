#pragma once

// Height function on the city-graph faces identified with the faces and
// vertices of G, the reference 1-form, coupled spins, and nesting fields.

#include <array>
#include <functional>
#include <limits>
#include <map>

#include <drc/currents.hpp>

namespace drc {

// Heights are stored doubled (2H), so they are exact integers: even on faces
// of G, odd on vertices.
struct HeightField {
  std::vector<int> twice_u;  // per face of G; outer face = 0
  std::vector<int> twice_v;  // per vertex of G
};

// f0 on roads is exactly 1/2, so heights on the U- and V-faces only need
// increments across roads: 2(f_M - f0) = +-(2*1{road in M} - 1), the sign
// taken from the white-to-black orientation of the half-edge whose city-graph
// face is the target side of the crossing.
inline HeightField height_from_dimer(const CityGraph& cg, const DimerCover& m) {
  const PlanarMap& g = *cg.g;
  const PlanarMap& c = cg.map;
  std::vector<char> in_m(c.num_edges(), 0);
  for (int e : m.edges) in_m[e] = 1;

  std::vector<int> twice_face(c.num_faces(), std::numeric_limits<int>::min());
  twice_face[c.outer_face] = 0;
  std::vector<int> stack{c.outer_face};
  while (!stack.empty()) {
    int f = stack.back();
    stack.pop_back();
    for (int h : c.face_cycle(f)) {
      int e = c.halves[h].edge;
      if (cg.kind[e] != CityGraph::Road) continue;
      int tw = c.halves[h].twin;
      int o = c.halves[tw].face;
      // increment from f to o: the half-edge with face o is tw
      int sgn = cg.black[c.halves[tw].origin] ? -1 : +1;  // origin white -> +f
      int inc = sgn * (2 * in_m[e] - 1);
      if (twice_face[o] == std::numeric_limits<int>::min()) {
        twice_face[o] = twice_face[f] + inc;
        stack.push_back(o);
      } else if (twice_face[o] != twice_face[f] + inc) {
        throw std::runtime_error("height function not well defined (flux inconsistency)");
      }
    }
  }
  HeightField hf;
  hf.twice_u.assign(g.num_faces(), 0);
  hf.twice_v.assign(g.num_vertices(), 0);
  for (int u = 0; u < g.num_faces(); ++u) {
    if (g.faces[u].outer) continue;
    int f = cg.face_of_u[u];
    if (f < 0 || twice_face[f] == std::numeric_limits<int>::min())
      throw std::runtime_error("missing U-face height");
    hf.twice_u[u] = twice_face[f];
    if (hf.twice_u[u] % 2) throw std::runtime_error("U height not an integer");
  }
  for (int v = 0; v < g.num_vertices(); ++v) {
    int f = cg.face_of_v[v];
    if (f < 0 || twice_face[f] == std::numeric_limits<int>::min())
      throw std::runtime_error("missing V-face height");
    hf.twice_v[v] = twice_face[f];
    if (hf.twice_v[v] % 2 == 0) throw std::runtime_error("V height not a half-integer");
  }
  return hf;
}

// Reference 1-form: f0(e) = P(e in M), exact 1/2 on roads.
inline std::vector<double> reference_form(const CityGraph& cg, const KasteleynMatrix& km,
                                          const Eigen::MatrixXcd& kinv) {
  std::vector<double> f0(cg.map.num_edges());
  for (int e = 0; e < cg.map.num_edges(); ++e)
    f0[e] = cg.kind[e] == CityGraph::Road ? 0.5 : edge_probability(km, kinv, e);
  return f0;
}

// Spins of the master coupling: tau^dagger on faces from (-1)^H, tau on
// vertices from i(-1)^H (real since H is a half-integer there).
struct CoupledSpins {
  std::vector<int> tau_dagger;  // per face of G
  std::vector<int> tau;         // per vertex of G
};

inline CoupledSpins spins_from_height(const PlanarMap& g, const HeightField& hf) {
  CoupledSpins s;
  s.tau_dagger.resize(g.num_faces());
  s.tau.resize(g.num_vertices());
  for (int u = 0; u < g.num_faces(); ++u) {
    int k = ((hf.twice_u[u] / 2) % 2 + 2) % 2;
    s.tau_dagger[u] = k ? -1 : +1;
  }
  for (int v = 0; v < g.num_vertices(); ++v) {
    int k = ((hf.twice_v[v] + 1) / 2 % 2 + 2) % 2;
    s.tau[v] = k ? -1 : +1;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Clusters of a class vector (vertices joined by nonzero edges).

struct ClusterData {
  std::vector<int> of_vertex;  // cluster id per vertex, -1 if untouched
  std::vector<int> of_edge;    // cluster id per nonzero edge, -1 otherwise
  int count = 0;
};

inline ClusterData primal_clusters(const PlanarMap& g, const std::vector<std::uint8_t>& cls) {
  std::vector<int> parent(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) parent[v] = v;
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (int e = 0; e < g.num_edges(); ++e) {
    if (cls[e] == ClassZero) continue;
    auto [h, t] = g.edge_halves(e);
    parent[find(g.halves[h].origin)] = find(g.halves[t].origin);
  }
  ClusterData cd;
  cd.of_vertex.assign(g.num_vertices(), -1);
  cd.of_edge.assign(g.num_edges(), -1);
  std::map<int, int> relabel;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (cls[e] == ClassZero) continue;
    int r = find(g.halves[g.edge_halves(e).first].origin);
    auto [it, fresh] = relabel.try_emplace(r, cd.count);
    if (fresh) ++cd.count;
    cd.of_edge[e] = it->second;
  }
  for (int v = 0; v < g.num_vertices(); ++v) {
    bool touched = false;
    for (int h : g.outgoing(v))
      if (cls[g.halves[h].edge] != ClassZero) touched = true;
    if (touched) cd.of_vertex[v] = relabel[find(v)];
  }
  return cd;
}

// Dual clusters: nodes are the faces of G (the full dual, outer included).
inline ClusterData dual_clusters(const PlanarMap& g, const std::vector<std::uint8_t>& dual_cls) {
  std::vector<int> parent(g.num_faces());
  for (int f = 0; f < g.num_faces(); ++f) parent[f] = f;
  std::function<int(int)> find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (int e = 0; e < g.num_edges(); ++e) {
    if (dual_cls[e] == ClassZero) continue;
    auto [h, t] = g.edge_halves(e);
    parent[find(g.halves[h].face)] = find(g.halves[t].face);
  }
  ClusterData cd;
  cd.of_vertex.assign(g.num_faces(), -1);
  cd.of_edge.assign(g.num_edges(), -1);
  std::map<int, int> relabel;
  for (int e = 0; e < g.num_edges(); ++e) {
    if (dual_cls[e] == ClassZero) continue;
    int r = find(g.halves[g.edge_halves(e).first].face);
    auto [it, fresh] = relabel.try_emplace(r, cd.count);
    if (fresh) ++cd.count;
    cd.of_edge[e] = it->second;
  }
  for (int f = 0; f < g.num_faces(); ++f) {
    bool touched = false;
    for (int h : g.face_cycle(f))
      if (dual_cls[g.halves[h].edge] != ClassZero) touched = true;
    if (touched) cd.of_vertex[f] = relabel[find(f)];
  }
  return cd;
}

// ---------------------------------------------------------------------------
// Odd-around indicators. For every face u of G and every primal cluster C,
// the spin of the contour configuration C ∩ odd-part at u; computed in one
// tree walk with per-cluster parity toggles.

inline std::vector<std::vector<char>> odd_around_faces(const PlanarMap& g,
                                                       const std::vector<std::uint8_t>& cls,
                                                       const ClusterData& cd) {
  std::vector<std::vector<char>> odd(g.num_faces(), std::vector<char>(cd.count, 0));
  std::vector<char> seen(g.num_faces(), 0);
  std::vector<char> parity(cd.count, 0);
  // iterative DFS with explicit undo entries (edge toggled on the way down)
  std::vector<std::pair<int, int>> stack;  // (face, toggled cluster or -1)
  stack.push_back({g.outer_face, -1});
  seen[g.outer_face] = 1;
  while (!stack.empty()) {
    auto [f, tog] = stack.back();
    if (f < 0) {  // undo marker
      stack.pop_back();
      if (tog >= 0) parity[tog] ^= 1;
      continue;
    }
    stack.back() = {-1, tog};  // convert to undo marker, keep toggle
    if (tog >= 0) parity[tog] ^= 1;
    odd[f] = parity;
    for (int h : g.face_cycle(f)) {
      int e = g.halves[h].edge;
      int o = g.halves[g.halves[h].twin].face;
      if (seen[o]) continue;
      seen[o] = 1;
      stack.push_back({o, cls[e] == ClassOdd ? cd.of_edge[e] : -1});
    }
  }
  return odd;
}

// Same on the dual side: for every vertex of G (face of the dual graph) and
// every dual cluster. The reference "unbounded" face of the dual embedding is
// a frozen convention: the first boundary vertex of G.
inline std::vector<std::vector<char>> odd_around_vertices(const PlanarMap& g,
                                                          const std::vector<std::uint8_t>& dual_cls,
                                                          const ClusterData& cd) {
  std::vector<std::vector<char>> odd(g.num_vertices(), std::vector<char>(cd.count, 0));
  std::vector<char> seen(g.num_vertices(), 0);
  std::vector<char> parity(cd.count, 0);
  int v0 = g.boundary_vertices().front();
  std::vector<std::pair<int, int>> stack;
  stack.push_back({v0, -1});
  seen[v0] = 1;
  while (!stack.empty()) {
    auto [v, tog] = stack.back();
    if (v < 0) {
      stack.pop_back();
      if (tog >= 0) parity[tog] ^= 1;
      continue;
    }
    stack.back() = {-1, tog};
    if (tog >= 0) parity[tog] ^= 1;
    odd[v] = parity;
    for (int h : g.outgoing(v)) {
      int e = g.halves[h].edge;
      int o = g.dest(h);
      if (seen[o]) continue;
      seen[o] = 1;
      stack.push_back({o, dual_cls[e] == ClassOdd ? cd.of_edge[e] : -1});
    }
  }
  return odd;
}

// ---------------------------------------------------------------------------
// Nesting fields. Labels may come from fresh coins (the definition) or from
// the coupled spins (epsilon = tau tau^dagger).

struct NestingField {
  std::vector<int> twice;  // doubled values, on faces of G (free) or vertices (wired)
};

inline std::vector<int> iid_labels(int count, std::mt19937_64& rng) {
  std::vector<int> eps(count);
  for (int& e : eps) e = uniform01(rng) < 0.5 ? 1 : -1;
  return eps;
}

// Free boundary conditions: h(u) = sum over clusters odd around u of eps_C.
inline NestingField nesting_field_free(const PlanarMap& g, const std::vector<std::uint8_t>& cls,
                                       const ClusterData& cd, const std::vector<int>& eps) {
  auto odd = odd_around_faces(g, cls, cd);
  NestingField nf;
  nf.twice.assign(g.num_faces(), 0);
  for (int u = 0; u < g.num_faces(); ++u)
    for (int c = 0; c < cd.count; ++c)
      if (odd[u][c]) nf.twice[u] += 2 * eps[c];
  return nf;
}

// Wired boundary conditions on the weak dual, evaluated at the vertices of G:
// the cluster of the outer face vertex is the ghost cluster and contributes
// (1/2 - 1{odd}) eps.
inline NestingField nesting_field_wired(const PlanarMap& g, const std::vector<std::uint8_t>& dual_cls,
                                        const ClusterData& cd, std::vector<int> eps,
                                        std::mt19937_64* rng_for_ghost = nullptr) {
  int ghost_cluster = cd.of_vertex[g.outer_face];
  if (ghost_cluster == -1) {
    // no dual edge touches the outer face; treat the ghost as its own cluster
    ghost_cluster = cd.count;
    eps.push_back(rng_for_ghost ? (uniform01(*rng_for_ghost) < 0.5 ? 1 : -1) : 1);
  }
  auto odd = odd_around_vertices(g, dual_cls, cd);
  NestingField nf;
  nf.twice.assign(g.num_vertices(), 0);
  for (int v = 0; v < g.num_vertices(); ++v) {
    for (int c = 0; c < cd.count; ++c) {
      if (c == ghost_cluster)
        nf.twice[v] += (1 - 2 * odd[v][c]) * eps[c];
      else if (odd[v][c])
        nf.twice[v] += 2 * eps[c];
    }
    if (ghost_cluster == cd.count) nf.twice[v] += eps[ghost_cluster];
  }
  return nf;
}

// epsilon labels from the coupled spins: eps_C = tau_C tau^dagger_C. tau is
// constant on a primal cluster (its edges have dual class zero, so no tau
// interface is crossed along them). tau^dagger_C is the spin just outside the
// cluster; the face in the southwest sector of the cluster's lexicographically
// minimal vertex can never be enclosed by the cluster's contours, so its spin
// is the outside one.
inline std::vector<int> labels_from_spins(const PlanarMap& g, const CurrentTrace& tr,
                                          const ClusterData& primal_cd, const CoupledSpins& sp) {
  (void)tr;
  std::vector<int> min_vertex(primal_cd.count, -1);
  for (int v = 0; v < g.num_vertices(); ++v) {
    int c = primal_cd.of_vertex[v];
    if (c < 0) continue;
    int& mv = min_vertex[c];
    if (mv == -1 || g.pos[v].x < g.pos[mv].x - 1e-12 ||
        (std::abs(g.pos[v].x - g.pos[mv].x) <= 1e-12 && g.pos[v].y < g.pos[mv].y))
      mv = v;
  }
  std::vector<int> eps(primal_cd.count, 0);
  for (int c = 0; c < primal_cd.count; ++c) {
    int v = min_vertex[c];
    // sector containing the southwest direction
    int pick = -1;
    for (int h : g.outgoing(v)) {
      double a1 = angle_of(g.dir(h));
      double gap = turn_angle(g.dir(h), g.dir(g.rot_ccw(h)));
      if (gap <= 0) gap += 2 * std::numbers::pi;
      double rel = std::atan2(-1.0, -1.0) - a1;
      while (rel < 0) rel += 2 * std::numbers::pi;
      if (rel < gap) pick = h;
    }
    if (pick < 0) pick = g.vertex_half[v];
    eps[c] = sp.tau[v] * sp.tau_dagger[g.halves[pick].face];
  }
  return eps;
}

}  // namespace drc
