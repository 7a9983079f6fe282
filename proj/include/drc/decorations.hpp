#pragma once

// Decorated graphs for the current/flow/dimer correspondences: the tripled
// directed graph, the cycle-expanded bipartite graph, and the city graph of
// quadrangles and roads.

#include <cassert>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <vector>

#include <drc/planar_map.hpp>

namespace drc {

// Weight relations. x is the high-temperature weight tanh(beta J).
inline double y_weight(double x) { return 2 * x / (1 - x * x); }
inline double w_weight(double x) { return 2 * x / (1 + x * x); }
inline double z_weight(double x) { return (1 - x * x) / (1 + x * x); }
inline double kw_dual_x(double x) { return (1 - x) / (1 + x); }

// ---------------------------------------------------------------------------
// Tripled digraph: each edge e of G becomes three parallel directed edges;
// the middle one (weight y) is oriented rightward/upward, the two side edges
// (weight x) oppose it. SideLeft/SideRight are taken relative to the middle
// direction.

enum Triple : int { SideLeft = 0, Middle = 1, SideRight = 2 };

struct TripledDigraph {
  const PlanarMap* g = nullptr;
  std::vector<double> x;            // per primal edge
  std::vector<double> y;            // middle weight per edge
  std::vector<int> middle_half;     // half-edge giving the middle orientation

  double weight(int e, int which) const { return which == Middle ? y[e] : x[e]; }
};

inline TripledDigraph build_vec_g(const PlanarMap& g, const std::vector<double>& x) {
  TripledDigraph t;
  t.g = &g;
  t.x = x;
  t.y.resize(g.num_edges());
  t.middle_half.resize(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    if (!(x[e] > 0.0 && x[e] < 1.0)) throw std::invalid_argument("edge weight must lie in (0,1)");
    t.y[e] = y_weight(x[e]);
    auto [h, tw] = g.edge_halves(e);
    Vec2 d = g.dir(h);
    t.middle_half[e] = (d.x > 1e-12 || (std::abs(d.x) <= 1e-12 && d.y > 0)) ? h : tw;
  }
  return t;
}

// A slot is one of the three parallel strands of an edge, seen from a vertex.
struct Slot {
  int edge = -1;
  int which = -1;      // Triple; -1 marks a corner insertion
  bool outgoing = false;
  int corner_half = -1;  // for corner insertions
};

// Circular slot word around v, counterclockwise. At the middle's tail the
// strand order is (right, middle, left); at its head (left, middle, right).
// Optional corner darts are inserted in their angular sector (the sector
// counterclockwise of an outgoing half-edge).
inline std::vector<Slot> vertex_slots(const TripledDigraph& t, int v,
                                      const std::vector<Slot>& corner_darts = {}) {
  const PlanarMap& g = *t.g;
  std::vector<Slot> word;
  for (int h : g.outgoing(v)) {
    int e = g.halves[h].edge;
    bool at_tail = (h == t.middle_half[e]);
    if (at_tail) {
      word.push_back({e, SideRight, false});
      word.push_back({e, Middle, true});
      word.push_back({e, SideLeft, false});
    } else {
      word.push_back({e, SideLeft, true});
      word.push_back({e, Middle, false});
      word.push_back({e, SideRight, true});
    }
    for (const Slot& c : corner_darts)
      if (c.corner_half == h) word.push_back(c);
  }
  return word;
}

// Flow state per edge: bitmask over {SideLeft=1, Middle=2, SideRight=4}.
using FlowState = std::uint8_t;
constexpr FlowState kFlowStates[] = {0, 1, 2, 3, 4, 6, 7, 5};
inline int flow_edge_count(FlowState s) { return (s & 1) + ((s >> 1) & 1) + ((s >> 2) & 1); }

struct FlowConfig {
  std::vector<FlowState> state;  // per primal edge
  bool source_in = false;        // corner source edge present (always true when used)
  bool sink_out = false;
};

// Alternating condition at one vertex: present slots, in circular order, must
// alternate in/out; a single present slot fails (it is cyclically adjacent to
// itself).
inline bool alternating_at(const std::vector<Slot>& word, const FlowConfig& f) {
  std::vector<bool> orient;
  for (const Slot& s : word) {
    bool present = s.which < 0 ? true : (f.state[s.edge] >> s.which) & 1;
    if (present) orient.push_back(s.outgoing);
  }
  int k = static_cast<int>(orient.size());
  if (k == 0) return true;
  if (k % 2) return false;
  for (int i = 0; i < k; ++i)
    if (orient[i] == orient[(i + 1) % k]) return false;
  return true;
}

inline bool alternating_everywhere(const TripledDigraph& t, const FlowConfig& f) {
  for (int v = 0; v < t.g->num_vertices(); ++v)
    if (!alternating_at(vertex_slots(t, v), f)) return false;
  return true;
}

inline double flow_weight(const TripledDigraph& t, const FlowConfig& f) {
  double w = 1.0;
  int active = 0;
  std::vector<char> touched(t.g->num_vertices(), 0);
  for (int e = 0; e < t.g->num_edges(); ++e) {
    FlowState s = f.state[e];
    if (s & 1) w *= t.x[e];
    if (s & 2) w *= t.y[e];
    if (s & 4) w *= t.x[e];
    if (s) {
      auto [h, tw] = t.g->edge_halves(e);
      touched[t.g->halves[h].origin] = 1;
      touched[t.g->halves[tw].origin] = 1;
    }
  }
  for (char c : touched) active += c;
  return w * std::pow(2.0, t.g->num_vertices() - active);
}

// ---------------------------------------------------------------------------
// Cycle expansion G^d. Runs of equal orientation in the slot word of each
// vertex become vertices (black for incoming runs), joined in a cycle by
// weight-1 short edges; each strand becomes a long edge between its two runs.

struct DecoratedGraph {
  int n = 0;
  std::vector<char> black;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> weight;
  std::vector<char> is_long;
  std::vector<int> long_edge;            // 3*e+which -> G^d edge id
  std::vector<std::vector<int>> runs_of;  // per primal vertex, run vertex ids in cyclic order
  const TripledDigraph* tripled = nullptr;
};

inline DecoratedGraph build_gd(const TripledDigraph& t) {
  const PlanarMap& g = *t.g;
  DecoratedGraph d;
  d.tripled = &t;
  d.long_edge.assign(3 * g.num_edges(), -1);
  d.runs_of.resize(g.num_vertices());
  std::vector<int> run_of_slot;  // slot index within vertex word -> run id
  for (int v = 0; v < g.num_vertices(); ++v) {
    auto word = vertex_slots(t, v);
    int k = static_cast<int>(word.size());
    // maximal cyclic runs of equal orientation
    std::vector<int> run(k, -1);
    int start = 0;
    while (start < k && word[(start + k - 1) % k].outgoing == word[start].outgoing) {
      ++start;
      if (start == k) break;  // all slots same orientation: impossible for triples
    }
    if (start == k) throw std::runtime_error("degenerate slot word");
    int nrun = 0;
    for (int i = 0; i < k; ++i) {
      int idx = (start + i) % k;
      int prev = (start + i - 1 + k) % k;
      if (i > 0 && word[idx].outgoing == word[prev].outgoing)
        run[idx] = run[prev];
      else {
        run[idx] = d.n + nrun;
        ++nrun;
      }
    }
    for (int i = 0; i < nrun; ++i) {
      d.black.push_back(0);
      d.runs_of[v].push_back(d.n + i);
    }
    for (int i = 0; i < k; ++i) {
      if (!word[i].outgoing) d.black[run[i]] = 1;
      int slot_global = 3 * word[i].edge + word[i].which;
      if (d.long_edge[slot_global] == -1)
        d.long_edge[slot_global] = -(run[i] + 2);  // remember first endpoint
      else {
        int a = -d.long_edge[slot_global] - 2;
        d.long_edge[slot_global] = static_cast<int>(d.edges.size());
        d.edges.push_back({a, run[i]});
        d.weight.push_back(t.weight(word[i].edge, word[i].which));
        d.is_long.push_back(1);
      }
    }
    // short cycle between consecutive runs
    if (nrun >= 2) {
      for (int i = 0; i < nrun; ++i) {
        int a = d.n + i, b = d.n + (i + 1) % nrun;
        if (nrun == 2 && i == 1) { /* second parallel short */ }
        d.edges.push_back({a, b});
        d.weight.push_back(1.0);
        d.is_long.push_back(0);
      }
    }
    d.n += nrun;
  }
  // sanity: bipartite colors disagree across every edge
  for (auto [a, b] : d.edges)
    if (d.black[a] == d.black[b]) throw std::runtime_error("gd not bipartite");
  return d;
}

// Dimers on G^d to alternating flows: keep the directed strands of matched
// long edges.
inline FlowConfig dimer_to_flow(const DecoratedGraph& d, const std::vector<int>& matching_edges) {
  FlowConfig f;
  f.state.assign(d.tripled->g->num_edges(), 0);
  std::vector<char> in_m(d.edges.size(), 0);
  for (int e : matching_edges) in_m[e] = 1;
  for (int e = 0; e < d.tripled->g->num_edges(); ++e)
    for (int which = 0; which < 3; ++which)
      if (in_m[d.long_edge[3 * e + which]]) f.state[e] |= 1 << which;
  if (!alternating_everywhere(*d.tripled, f))
    throw std::runtime_error("dimer cover mapped to a non-alternating flow");
  return f;
}

// theta: flow -> (odd, even-positive) classes, encoded 0=zero,1=odd,2=even+.
inline std::vector<std::uint8_t> flow_to_trace(const FlowConfig& f) {
  std::vector<std::uint8_t> cls(f.state.size(), 0);
  for (size_t e = 0; e < f.state.size(); ++e) {
    int c = flow_edge_count(f.state[e]);
    cls[e] = (c == 0) ? 0 : (c % 2 ? 1 : 2);
  }
  return cls;
}

// ---------------------------------------------------------------------------
// City graph C_G: one quadrangle per edge, roads through corner sectors.
// Streets parallel to the primal edge carry weight w and are tagged Primal;
// streets across the edge (joining the two corners at one endpoint) carry
// weight z and are tagged Dual.

struct CityGraph {
  enum EdgeKind : std::uint8_t { Road = 0, StreetPrimal = 1, StreetDual = 2 };

  PlanarMap map;
  const PlanarMap* g = nullptr;
  std::vector<double> xe;          // primal edge weights
  std::vector<std::uint8_t> kind;  // per C_G edge
  std::vector<int> g_edge;         // C_G edge -> primal edge (-1 for roads)
  std::vector<int> road_corner;    // C_G edge -> corner half (-1 for streets)
  std::vector<char> black;         // per C_G vertex
  // per C_G vertex: primal context
  std::vector<int> v_of;  // primal endpoint
  std::vector<int> e_of;  // primal edge
  std::vector<int> corner_of;  // corner (= outgoing primal half-edge id)
  // corner (primal half id) -> the white and black C_G vertices in its sector
  std::vector<std::pair<int, int>> corner_wb;
  std::vector<int> quad_face;  // primal edge -> quadrangle face of map
  // primal face -> C_G face (octagon), primal vertex -> C_G face; -1 when the
  // city face merges with the outer face (boundary vertices).
  std::vector<int> face_of_u;
  std::vector<int> face_of_v;
};

inline CityGraph build_cg(const PlanarMap& g, const std::vector<double>& x) {
  CityGraph c;
  c.g = &g;
  c.xe = x;
  int ne = g.num_edges();
  // vertices: per edge, (tail/head) x (left/right of middle-oriented half h0)
  // h0 = lower half id of the edge; relative sides are stable per edge.
  std::vector<Vec2> pts;
  std::vector<std::pair<int, int>> el;
  std::vector<double> wts;
  std::vector<std::uint8_t> kinds;
  std::vector<int> gedge, roadc;
  auto vid = [&](int e, int endpoint, int side) { return 4 * e + 2 * endpoint + side; };
  c.v_of.assign(4 * ne, -1);
  c.e_of.assign(4 * ne, -1);
  c.corner_of.assign(4 * ne, -1);
  pts.resize(4 * ne);
  for (int e = 0; e < ne; ++e) {
    auto [h, tw] = g.edge_halves(e);
    Vec2 a = g.pos[g.halves[h].origin], b = g.pos[g.halves[tw].origin];
    Vec2 mid = (a + b) * 0.5;
    Vec2 t = b - a;
    double len = t.norm();
    Vec2 u{t.x / len, t.y / len};
    Vec2 nl{-u.y, u.x};  // left of h
    double s_along = 0.30 * len, s_norm = 0.08 * len;
    // endpoint 0 = origin of h (tail of h), endpoint 1 = head; side 0 = left of h
    pts[vid(e, 0, 0)] = mid - u * s_along + nl * s_norm;
    pts[vid(e, 0, 1)] = mid - u * s_along - nl * s_norm;
    pts[vid(e, 1, 0)] = mid + u * s_along + nl * s_norm;
    pts[vid(e, 1, 1)] = mid + u * s_along - nl * s_norm;
    for (int ep = 0; ep < 2; ++ep)
      for (int side = 0; side < 2; ++side) {
        int id = vid(e, ep, side);
        c.v_of[id] = g.halves[ep == 0 ? h : tw].origin;
        c.e_of[id] = e;
        // corner: sector containing this C_G vertex. The left side of h at the
        // tail belongs to the sector of h itself; the right side to the sector
        // clockwise of h (and symmetrically at the head for twin(h)).
        int base = (ep == 0) ? h : tw;
        bool left_of_base = (ep == 0) ? (side == 0) : (side == 1);
        c.corner_of[id] = left_of_base ? base : g.rot_cw(base);
      }
    // streets: primal kind joins same-side pairs along the edge, dual kind the
    // two corners at one endpoint.
    double w = w_weight(x[e]), z = z_weight(x[e]);
    auto add = [&](int p, int q, double wt, std::uint8_t k) {
      el.push_back({p, q});
      wts.push_back(wt);
      kinds.push_back(k);
      gedge.push_back(e);
      roadc.push_back(-1);
    };
    add(vid(e, 0, 0), vid(e, 1, 0), w, CityGraph::StreetPrimal);
    add(vid(e, 0, 1), vid(e, 1, 1), w, CityGraph::StreetPrimal);
    add(vid(e, 0, 0), vid(e, 0, 1), z, CityGraph::StreetDual);
    add(vid(e, 1, 0), vid(e, 1, 1), z, CityGraph::StreetDual);
  }
  // roads: one per corner whose sector is bounded by two distinct edges
  int nhalf = static_cast<int>(g.halves.size());
  std::vector<std::vector<int>> sector_members(nhalf);
  for (int id = 0; id < 4 * ne; ++id) sector_members[c.corner_of[id]].push_back(id);
  for (int h = 0; h < nhalf; ++h) {
    auto& mem = sector_members[h];
    if (mem.size() == 2 && c.e_of[mem[0]] != c.e_of[mem[1]]) {
      el.push_back({mem[0], mem[1]});
      wts.push_back(1.0);
      kinds.push_back(CityGraph::Road);
      gedge.push_back(-1);
      roadc.push_back(h);
    } else if (mem.size() != 2) {
      throw std::runtime_error("corner sector does not contain exactly two city vertices");
    }
  }
  c.map = build_planar_map(std::move(pts), el, wts);
  c.kind = std::move(kinds);
  c.g_edge = std::move(gedge);
  c.road_corner = std::move(roadc);

  // bipartite coloring
  c.black.assign(c.map.num_vertices(), -1);
  std::queue<int> q;
  c.black[0] = 0;
  q.push(0);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int h : c.map.outgoing(v)) {
      int o = c.map.dest(h);
      if (c.black[o] == -1) {
        c.black[o] = !c.black[v];
        q.push(o);
      } else if (c.black[o] == c.black[v]) {
        throw std::runtime_error("city graph not bipartite");
      }
    }
  }
  // corner -> (white, black)
  c.corner_wb.assign(nhalf, {-1, -1});
  for (int h = 0; h < nhalf; ++h) {
    auto& mem = sector_members[h];
    if (mem.size() != 2) continue;
    int a = mem[0], b = mem[1];
    if (c.black[a] == c.black[b]) throw std::runtime_error("corner pair not bicolored");
    c.corner_wb[h] = c.black[a] ? std::make_pair(b, a) : std::make_pair(a, b);
  }
  // quadrangle faces
  c.quad_face.assign(ne, -1);
  for (int e = 0; e < ne; ++e) {
    int a = vid(e, 0, 0);
    // the quadrangle is the face of the street cycle a-b-d-c containing all
    // four vertices of the quad
    for (int h : c.map.outgoing(a)) {
      int f = c.map.halves[h].face;
      auto cyc = c.map.face_cycle(f);
      if (cyc.size() != 4) continue;
      bool all = true;
      for (int hh : cyc) {
        int vtx = c.map.halves[hh].origin;
        if (c.e_of[vtx] != e) all = false;
      }
      if (all) {
        c.quad_face[e] = f;
        break;
      }
    }
    if (c.quad_face[e] == -1) throw std::runtime_error("quadrangle face not found");
  }
  // U- and V-faces
  c.face_of_u.assign(g.num_faces(), -1);
  c.face_of_v.assign(g.num_vertices(), -1);
  for (int f = 0; f < c.map.num_faces(); ++f) {
    if (f == c.map.outer_face) continue;
    auto cyc = c.map.face_cycle(f);
    bool quad = false;
    for (int e = 0; e < ne; ++e)
      if (c.quad_face[e] == f) quad = true;
    if (quad) continue;
    // a face is a city face of vertex v if all roads on it sit at v; else it
    // is the octagon of a primal face
    bool has_road = false;
    int v0 = -1, u0 = -1;
    bool same_v = true, same_u = true;
    for (int hh : cyc) {
      int ce = c.map.halves[hh].edge;
      int vtx = c.map.halves[hh].origin;
      if (c.kind[ce] == CityGraph::Road) has_road = true;
      if (v0 == -1) v0 = c.v_of[vtx];
      if (c.v_of[vtx] != v0) same_v = false;
    }
    if (same_v && has_road) {
      c.face_of_v[v0] = f;
      continue;
    }
    // octagon of primal face: identify by the primal face left of the primal
    // street halves... use corner sectors: all corners on this face share a face
    for (int hh : cyc) {
      int vtx = c.map.halves[hh].origin;
      int corner = c.corner_of[vtx];
      int fu = g.halves[corner].face;
      if (u0 == -1) u0 = fu;
      if (fu != u0) same_u = false;
    }
    if (same_u && u0 != -1 && !g.faces[u0].outer)
      c.face_of_u[u0] = f;
  }
  return c;
}

}  // namespace drc
