#pragma once

// Local rewrites of weighted bipartite maps with rotation systems: vertex
// splitting, urban renewal, parallel-edge merges and degree-two contractions,
// and the transcript taking the cycle-expanded graph to the city graph.

#include <drc/decorations.hpp>
#include <drc/oracle.hpp>

namespace drc {

// Bipartite multigraph with an explicit rotation system. Darts 2e, 2e+1 for
// edge e; twin(d) = d ^ 1.
struct RotMap {
  std::vector<std::vector<int>> rot;  // per vertex, dart ids in ccw order
  std::vector<char> black;            // per vertex
  std::vector<char> vertex_alive;
  std::vector<char> frozen;           // final-structure vertices, kept by cleanup
  std::vector<int> dart_vertex;       // dart -> vertex (or -1 when dead)
  std::vector<double> weight;         // per edge
  std::vector<char> edge_alive;

  int num_vertices_alive() const {
    int n = 0;
    for (char a : vertex_alive) n += a;
    return n;
  }
  int num_edges_alive() const {
    int n = 0;
    for (char a : edge_alive) n += a;
    return n;
  }
  int other_end(int dart) const { return dart_vertex[dart ^ 1]; }

  int add_vertex(bool is_black) {
    rot.push_back({});
    black.push_back(is_black);
    vertex_alive.push_back(1);
    frozen.push_back(0);
    return static_cast<int>(rot.size()) - 1;
  }
  // adds edge (a,b), returning the dart at a; rotation positions appended
  int add_edge(int a, int b, double w) {
    int e = static_cast<int>(weight.size());
    weight.push_back(w);
    edge_alive.push_back(1);
    dart_vertex.push_back(a);
    dart_vertex.push_back(b);
    rot[a].push_back(2 * e);
    rot[b].push_back(2 * e + 1);
    return 2 * e;
  }
  void remove_edge(int e) {
    edge_alive[e] = 0;
    for (int d : {2 * e, 2 * e + 1}) {
      int v = dart_vertex[d];
      auto& r = rot[v];
      r.erase(std::remove(r.begin(), r.end(), d), r.end());
      dart_vertex[d] = -1;
    }
  }
  int rot_index(int v, int dart) const {
    for (size_t i = 0; i < rot[v].size(); ++i)
      if (rot[v][i] == dart) return static_cast<int>(i);
    throw std::runtime_error("dart not in rotation");
  }
  // face step: the dart after twin(d), walking the face on the left
  int face_next(int d) const {
    int t = d ^ 1;
    int v = dart_vertex[t];
    int i = rot_index(v, t);
    int n = static_cast<int>(rot[v].size());
    return rot[v][(i - 1 + n) % n];
  }
  std::vector<int> face_of(int d) const {
    std::vector<int> f;
    int cur = d;
    do {
      f.push_back(cur);
      cur = face_next(cur);
      if (f.size() > weight.size() * 2 + 4) throw std::runtime_error("face walk broken");
    } while (cur != d);
    return f;
  }

  std::vector<std::pair<int, int>> edge_list(std::vector<double>* w = nullptr,
                                             std::vector<int>* newid = nullptr) const {
    std::vector<int> vid(rot.size(), -1);
    int n = 0;
    for (size_t v = 0; v < rot.size(); ++v)
      if (vertex_alive[v]) vid[v] = n++;
    if (newid) *newid = vid;
    std::vector<std::pair<int, int>> el;
    for (size_t e = 0; e < weight.size(); ++e) {
      if (!edge_alive[e]) continue;
      el.push_back({vid[dart_vertex[2 * e]], vid[dart_vertex[2 * e + 1]]});
      if (w) w->push_back(weight[e]);
    }
    return el;
  }

  double enum_z() const {
    std::vector<double> w;
    auto el = edge_list(&w);
    return oracle::enum_dimer_covers(num_vertices_alive(), el, w).z;
  }
};

// Split vertex v: the contiguous rotation range [start, start+len) moves to a
// new vertex v2 of the same colour, joined to v through a middle vertex of
// the opposite colour by two unit edges. The dimer partition function is
// unchanged.
inline void vertex_split(RotMap& m, int v, int start, int len) {
  int deg = static_cast<int>(m.rot[v].size());
  if (len <= 0 || len >= deg) throw std::invalid_argument("invalid split range");
  std::vector<int> keep, moved;
  for (int i = 0; i < deg; ++i) {
    int d = m.rot[v][(start + i) % deg];
    (i < len ? moved : keep).push_back(d);
  }
  int mid = m.add_vertex(!m.black[v]);
  int v2 = m.add_vertex(m.black[v]);
  // rewire moved darts to v2
  m.rot[v2] = moved;
  for (int d : moved) m.dart_vertex[d] = v2;
  m.rot[v] = keep;
  // connect v - mid - v2 with unit edges; rotation: the new dart at v sits
  // where the moved block was (i.e. at position `start`), and at v2 after the
  // moved block.
  int e1 = static_cast<int>(m.weight.size());
  m.weight.push_back(1.0);
  m.edge_alive.push_back(1);
  m.dart_vertex.push_back(v);
  m.dart_vertex.push_back(mid);
  int e2 = static_cast<int>(m.weight.size());
  m.weight.push_back(1.0);
  m.edge_alive.push_back(1);
  m.dart_vertex.push_back(mid);
  m.dart_vertex.push_back(v2);
  // `keep` runs cyclically from just after the moved block, so the gap left
  // by the block is at its end; same for `moved`.
  m.rot[v].push_back(2 * e1);
  m.rot[mid] = {2 * e1 + 1, 2 * e2};
  m.rot[v2].push_back(2 * e2 + 1);
}

// Urban renewal on a quadrilateral face. Each corner must have degree three
// with a unit-weight pendant edge; the corners are deleted, and the pendant
// attachment vertices are joined in a rotated quadrangle with weights
// x_i' = x_{i+2} / (x1 x3 + x2 x4). Returns the multiplicative constant
// C = x1 x3 + x2 x4 with Z_old = C * Z_new.
inline double urban_renewal(RotMap& m, int face_dart) {
  auto face = m.face_of(face_dart);
  if (face.size() != 4) throw std::invalid_argument("face is not a quadrilateral");
  std::array<int, 4> corner{}, pendant_dart{}, attach{};
  std::array<double, 4> x{};
  for (int i = 0; i < 4; ++i) {
    int d = face[i];
    corner[i] = m.dart_vertex[d];
    x[i] = m.weight[d / 2];
  }
  for (int i = 0; i < 4; ++i) {
    if (m.rot[corner[i]].size() != 3)
      throw std::invalid_argument("corner degree must be 3 for renewal");
    for (int d : m.rot[corner[i]]) {
      int e = d / 2;
      bool on_face = false;
      for (int fd : face)
        if (fd / 2 == e) on_face = true;
      if (!on_face) {
        pendant_dart[i] = d;
        if (std::abs(m.weight[e] - 1.0) > 1e-12)
          throw std::invalid_argument("pendant edge must have unit weight");
      }
    }
    attach[i] = m.other_end(pendant_dart[i]);
  }
  double c = x[0] * x[2] + x[1] * x[3];
  // delete the quadrilateral edges and corners; pendant edges die without
  // touching the attachment rotations (their darts are spliced in place)
  for (int d : face)
    if (m.edge_alive[d / 2]) m.remove_edge(d / 2);
  for (int i = 0; i < 4; ++i) {
    int e = pendant_dart[i] / 2;
    m.edge_alive[e] = 0;
    m.dart_vertex[2 * e] = m.dart_vertex[2 * e + 1] = -1;
    m.rot[corner[i]].clear();
    m.vertex_alive[corner[i]] = 0;
  }
  // the face edge i joined corner[i] and corner[i+1] carrying x[i]; the new
  // edge between attach[i] and attach[i+1] carries x[(i+2)%4]/c.
  std::array<int, 4> fwd{}, bwd{};
  for (int i = 0; i < 4; ++i) {
    int e = static_cast<int>(m.weight.size());
    m.weight.push_back(x[(i + 2) % 4] / c);
    m.edge_alive.push_back(1);
    m.dart_vertex.push_back(attach[i]);
    m.dart_vertex.push_back(attach[(i + 1) % 4]);
    fwd[i] = 2 * e;
    bwd[(i + 1) % 4] = 2 * e + 1;
  }
  // at each attachment, the dead pendant dart is replaced in place by the two
  // quadrangle darts; order (toward i+1, toward i-1) keeps the new face on
  // the old one's side.
  for (int i = 0; i < 4; ++i) m.frozen[attach[i]] = 1;
  for (int i = 0; i < 4; ++i) {
    auto& r = m.rot[attach[i]];
    int pos = -1;
    for (size_t p = 0; p < r.size(); ++p)
      if (r[p] == (pendant_dart[i] ^ 1)) pos = static_cast<int>(p);
    if (pos < 0) throw std::runtime_error("pendant dart missing at attachment");
    r.erase(r.begin() + pos);
    r.insert(r.begin() + pos, {fwd[i], bwd[i]});
  }
  return c;
}

// Merge parallel street edges bounding a two-sided face (weights add). Unit
// edges are roads of the final structure and stay; two-sided faces between a
// road and a street are genuine city faces at degree-one vertices.
inline bool merge_one_parallel(RotMap& m) {
  auto unit = [&](int e) { return std::abs(m.weight[e] - 1.0) <= 1e-12; };
  auto try_merge = [&](int e, const std::vector<int>& f) {
    if (f.size() != 2 || f[0] / 2 == f[1] / 2) return false;
    int e2 = f[0] / 2 == e ? f[1] / 2 : f[0] / 2;
    if (unit(e) || unit(e2)) return false;
    m.weight[e] += m.weight[e2];
    m.remove_edge(e2);
    return true;
  };
  for (size_t e = 0; e < m.weight.size(); ++e) {
    if (!m.edge_alive[e]) continue;
    int d = static_cast<int>(2 * e);
    if (try_merge(static_cast<int>(e), m.face_of(d))) return true;
    if (try_merge(static_cast<int>(e), m.face_of(d ^ 1))) return true;
  }
  return false;
}

// Contract a degree-two vertex (series reduction, the inverse of a vertex
// split after gauging). The two edges (weights a toward keep-side, b toward
// absorb-side) are first gauged to unit weight: the absorb-side vertex's
// remaining edges are scaled by a/b and the tracked constant gains log b.
// With a = b = 1 this is exactly the inverse vertex split.
inline bool contract_one_series(RotMap& m, double& log_const) {
  for (size_t v = 0; v < m.rot.size(); ++v) {
    if (!m.vertex_alive[v] || m.rot[v].size() != 2) continue;
    if (m.frozen[v]) continue;
    int d1 = m.rot[v][0], d2 = m.rot[v][1];
    int a = m.other_end(d1), b = m.other_end(d2);
    if (a == b || m.black[a] != m.black[b]) continue;
    if (m.frozen[a] && m.frozen[b]) continue;  // never fuse two final corners
    double wa = m.weight[d1 / 2], wb = m.weight[d2 / 2];
    // absorb into the side whose edge is not unit, so roads stay roads; when
    // both or neither are unit, absorb into the non-frozen side
    bool swap_sides;
    if ((std::abs(wa - 1.0) > 1e-12) != (std::abs(wb - 1.0) > 1e-12))
      swap_sides = std::abs(wa - 1.0) > 1e-12;
    else
      swap_sides = m.frozen[b] && !m.frozen[a];
    if (swap_sides) {
      std::swap(d1, d2);
      std::swap(a, b);
      std::swap(wa, wb);
    }
    // now absorb into b-side: scale b's other edges by wa/wb, constant log wb
    for (int d : m.rot[b])
      if (d != (d2 ^ 1)) m.weight[d / 2] *= wa / wb;
    log_const += std::log(std::abs(wb));
    // merge b into a at the dart positions
    int pa = m.rot_index(a, d1 ^ 1);
    int pb = m.rot_index(b, d2 ^ 1);
    std::vector<int> merged;
    auto& ra = m.rot[a];
    auto& rb = m.rot[b];
    for (size_t i = 1; i < ra.size(); ++i) merged.push_back(ra[(pa + i) % ra.size()]);
    for (size_t i = 1; i < rb.size(); ++i) merged.push_back(rb[(pb + i) % rb.size()]);
    for (int d : rb)
      if (d != (d2 ^ 1)) m.dart_vertex[d] = static_cast<int>(a);
    m.remove_edge(d1 / 2);
    m.remove_edge(d2 / 2);
    m.rot[a] = merged;
    m.rot[b].clear();
    m.vertex_alive[b] = 0;
    m.vertex_alive[v] = 0;
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// G^d as a RotMap. Run vertices carry [short_cw, longs ccw, short_ccw].

inline RotMap rotmap_from_gd(const DecoratedGraph& gd) {
  const TripledDigraph& t = *gd.tripled;
  const PlanarMap& g = *t.g;
  RotMap m;
  for (int i = 0; i < gd.n; ++i) m.add_vertex(gd.black[i]);
  // collect run slot lists per vertex of G in cyclic order
  for (int v = 0; v < g.num_vertices(); ++v) {
    auto word = vertex_slots(t, v);
    auto& runs = gd.runs_of[v];
    int nrun = static_cast<int>(runs.size());
    // map each slot to its run id: recompute like build_gd
    int k = static_cast<int>(word.size());
    int start = 0;
    while (start < k && word[(start + k - 1) % k].outgoing == word[start].outgoing) ++start;
    std::vector<std::vector<int>> run_slots(nrun);
    int r = -1;
    for (int i = 0; i < k; ++i) {
      int idx = (start + i) % k;
      int prev = (start + i - 1 + k) % k;
      if (i == 0 || word[idx].outgoing != word[prev].outgoing) ++r;
      run_slots[r].push_back(3 * word[idx].edge + word[idx].which);
    }
    // shorts between consecutive runs, longs inside runs
    // first the shorts so dart positions are predictable
    std::vector<int> short_dart_fwd(nrun), short_dart_bwd(nrun);
    (void)short_dart_bwd;
    if (nrun >= 2) {
      for (int i = 0; i < nrun; ++i) {
        int a = runs[i], b = runs[(i + 1) % nrun];
        int d = m.add_edge(a, b, 1.0);
        short_dart_fwd[i] = d;
      }
    }
    // rebuild rotations in the canonical order
    for (int i = 0; i < nrun; ++i) {
      std::vector<int> order;
      if (nrun >= 2) order.push_back(short_dart_fwd[(i - 1 + nrun) % nrun] ^ 1);  // to previous run
      for (int slot : run_slots[i]) {
        // long edge dart at this run: created lazily below
        order.push_back(~slot);  // placeholder, fixed after longs exist
      }
      if (nrun >= 2) order.push_back(short_dart_fwd[i]);  // to next run
      m.rot[runs[i]] = order;
    }
  }
  // long edges; replace placeholders
  std::vector<int> first_dart(3 * g.num_edges(), -1);
  for (size_t v = 0; v < m.rot.size(); ++v) {
    for (auto& d : m.rot[v]) {
      if (d >= 0) continue;
      int slot = ~d;
      if (first_dart[slot] == -1) {
        // create the edge when seeing the first endpoint; endpoints from gd
        int eid = gd.long_edge[slot];
        auto [a, b] = gd.edges[eid];
        int dart = static_cast<int>(2 * m.weight.size());
        m.weight.push_back(gd.weight[eid]);
        m.edge_alive.push_back(1);
        m.dart_vertex.push_back(static_cast<int>(v));
        m.dart_vertex.push_back(a == static_cast<int>(v) ? b : a);
        first_dart[slot] = dart;
        d = dart;
      } else {
        d = first_dart[slot] ^ 1;
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Transcript from G^d to the city graph: per primal edge, split the shared
// corners of one gadget quadrilateral, renew it, and clean up doubled edges
// and unit paths. Returns the accumulated log of renewal constants.

struct GdToCgResult {
  RotMap map;
  double log_constant = 0.0;  // log(Z_gd / Z_final)
  int renewals = 0;
  int splits = 0;
};

inline GdToCgResult gd_to_cg(const DecoratedGraph& gd) {
  const TripledDigraph& t = *gd.tripled;
  const PlanarMap& g = *t.g;
  GdToCgResult res;
  RotMap& m = res.map;
  m = rotmap_from_gd(gd);
  // dart of each long edge (by slot), maintained through rewrites via lookup
  for (int e = 0; e < g.num_edges(); ++e) {
    // find the quadrilateral containing the middle long and the left side
    // long of this edge: walk faces adjacent to the middle long's darts
    int mid_edge = gd.long_edge[3 * e + Middle];
    // dart ids for edge mid_edge in m: scan (edges in m were appended in
    // creation order; gd long/short ids differ from m ids, so match by
    // endpoints and weight)
    int mdart = -1;
    for (size_t ee = 0; ee < m.weight.size() && mdart < 0; ++ee) {
      if (!m.edge_alive[ee]) continue;
      // identify by the run endpoints of the long edge
      auto [a, b] = gd.edges[mid_edge];
      int va = m.dart_vertex[2 * ee], vb = m.dart_vertex[2 * ee + 1];
      if ((va == a && vb == b) || (va == b && vb == a)) {
        if (std::abs(m.weight[ee] - gd.weight[mid_edge]) < 1e-12) mdart = static_cast<int>(2 * ee);
      }
    }
    if (mdart < 0) throw std::runtime_error("middle long edge not found");
    // two candidate faces; pick the quadrilateral one whose side long carries
    // weight x (the gadget quad)
    int quad_dart = -1;
    for (int cand : {mdart, mdart ^ 1}) {
      auto f = m.face_of(cand);
      if (f.size() != 4) continue;
      quad_dart = cand;
      break;
    }
    if (quad_dart < 0) throw std::runtime_error("gadget quadrilateral not found");
    // make every corner degree 3 with a unit pendant
    for (int round = 0; round < 4; ++round) {
      auto f = m.face_of(quad_dart);
      if (f.size() != 4) throw std::runtime_error("quadrilateral lost during splits");
      bool did = false;
      for (int d : f) {
        int v = m.dart_vertex[d];
        if (m.rot[v].size() == 3) continue;
        // the two face darts at v are rotation-adjacent; move the rest away
        int dprev = -1;
        for (int fd : f)
          if (m.dart_vertex[fd] == v) dprev = fd;
        int din = -1;
        for (int fd : f)
          if (m.dart_vertex[fd ^ 1] == v) din = fd ^ 1;
        (void)dprev;
        int i1 = m.rot_index(v, dprev);
        int i2 = m.rot_index(v, din);
        int deg = static_cast<int>(m.rot[v].size());
        // contiguous block NOT containing the two face darts
        int lo = std::min(i1, i2), hi = std::max(i1, i2);
        int start, len;
        if ((lo + 1) % deg == hi % deg || (hi + 1) % deg == lo) {
          // adjacent; rest is contiguous
          if ((lo + 1) % deg == hi) {
            start = (hi + 1) % deg;
            len = deg - 2;
          } else {
            start = (lo + 1) % deg;
            len = deg - 2;
          }
        } else {
          throw std::runtime_error("face darts not adjacent in rotation");
        }
        vertex_split(m, v, start, len);
        res.splits++;
        did = true;
        break;
      }
      if (!did) break;
    }
    res.log_constant += std::log(urban_renewal(m, quad_dart));
    res.renewals++;
    // collapse doubled edges and undo the temporary splits; unit paths first,
    // so roads are contracted away rather than absorbed into streets
    for (bool moved = true; moved;) {
      moved = false;
      while (contract_one_series(m, res.log_constant)) moved = true;
      if (merge_one_parallel(m)) moved = true;
    }
  }
  return res;
}

}  // namespace drc
