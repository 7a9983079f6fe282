#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace drc {

struct Vec2 {
  double x = 0.0, y = 0.0;
  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const { return std::hypot(x, y); }
};

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double angle_of(Vec2 a) { return std::atan2(a.y, a.x); }

// Turning angle from direction a to direction b, in (-pi, pi].
inline double turn_angle(Vec2 a, Vec2 b) {
  double t = std::atan2(cross(a, b), dot(a, b));
  if (t <= -std::numbers::pi) t += 2 * std::numbers::pi;
  return t;
}

constexpr int kInvalid = -1;

// Half-edge (DCEL) planar map. Faces are orbits of `next`; a face cycle keeps
// its interior on the left, so bounded faces are counterclockwise and the
// outer face clockwise.
struct PlanarMap {
  struct HalfEdge {
    int origin = kInvalid;
    int twin = kInvalid;
    int next = kInvalid;
    int prev = kInvalid;
    int face = kInvalid;
    int edge = kInvalid;
  };
  struct Edge {
    int half = kInvalid;  // one of the two half-edges
    double weight = 1.0;
  };
  struct Face {
    int half = kInvalid;
    bool outer = false;
  };

  std::vector<Vec2> pos;           // per vertex
  std::vector<HalfEdge> halves;
  std::vector<Edge> edges;
  std::vector<Face> faces;
  std::vector<int> vertex_half;    // one outgoing half-edge per vertex
  int outer_face = kInvalid;

  int num_vertices() const { return static_cast<int>(pos.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }

  int dest(int h) const { return halves[halves[h].twin].origin; }
  Vec2 dir(int h) const { return pos[dest(h)] - pos[halves[h].origin]; }

  // Half-edges of edge e as (h, twin(h)).
  std::pair<int, int> edge_halves(int e) const {
    int h = edges[e].half;
    return {h, halves[h].twin};
  }

  int degree(int v) const {
    int h0 = vertex_half[v];
    if (h0 == kInvalid) return 0;
    int d = 0, h = h0;
    do {
      ++d;
      h = rot_ccw(h);
    } while (h != h0);
    return d;
  }

  // Next outgoing half-edge counterclockwise around origin(h).
  int rot_ccw(int h) const { return halves[halves[h].prev].twin; }
  // Clockwise neighbor.
  int rot_cw(int h) const { return halves[halves[h].twin].next; }

  std::vector<int> face_cycle(int f) const {
    std::vector<int> cyc;
    int h0 = faces[f].half, h = h0;
    do {
      cyc.push_back(h);
      h = halves[h].next;
    } while (h != h0);
    return cyc;
  }

  std::vector<int> outgoing(int v) const {
    std::vector<int> out;
    int h0 = vertex_half[v];
    if (h0 == kInvalid) return out;
    int h = h0;
    do {
      out.push_back(h);
      h = rot_ccw(h);
    } while (h != h0);
    return out;
  }

  // Boundary vertices: origins along the outer face cycle (deduplicated,
  // cycle order kept).
  std::vector<int> boundary_vertices() const {
    std::vector<int> bd;
    std::vector<char> seen(pos.size(), 0);
    for (int h : face_cycle(outer_face)) {
      int v = halves[h].origin;
      if (!seen[v]) {
        seen[v] = 1;
        bd.push_back(v);
      }
    }
    return bd;
  }

  bool euler_ok() const {
    return num_vertices() - num_edges() + num_faces() == 2;
  }

  Vec2 face_centroid(int f) const {
    Vec2 c{0, 0};
    int n = 0;
    for (int h : face_cycle(f)) {
      c = c + pos[halves[h].origin];
      ++n;
    }
    return c * (1.0 / n);
  }
};

namespace detail {

// Face orbits of `next`. If outer_half is given, the orbit containing it is
// marked outer; otherwise the unique orbit with negative signed area is.
inline void compute_faces(PlanarMap& m, int outer_half = kInvalid) {
  m.faces.clear();
  m.outer_face = kInvalid;
  for (auto& h : m.halves) h.face = kInvalid;
  for (int h0 = 0; h0 < static_cast<int>(m.halves.size()); ++h0) {
    if (m.halves[h0].face != kInvalid) continue;
    int f = static_cast<int>(m.faces.size());
    m.faces.push_back({h0, false});
    int h = h0;
    double area2 = 0.0;
    bool has_outer_half = false;
    do {
      m.halves[h].face = f;
      if (h == outer_half) has_outer_half = true;
      area2 += cross(m.pos[m.halves[h].origin], m.pos[m.dest(h)]);
      h = m.halves[h].next;
    } while (h != h0);
    bool is_outer = (outer_half == kInvalid) ? (area2 < -1e-12) : has_outer_half;
    if (is_outer) {
      if (m.outer_face != kInvalid) throw std::runtime_error("planar map: two clockwise face cycles");
      m.outer_face = f;
      m.faces[f].outer = true;
    }
  }
  if (m.outer_face == kInvalid) {
    // trees and single edges have one face of zero signed area
    if (m.faces.size() == 1) {
      m.outer_face = 0;
      m.faces[0].outer = true;
    } else {
      throw std::runtime_error("planar map: no outer face found");
    }
  }
}

}  // namespace detail

// Build a planar map from vertex positions and undirected edges, using the
// straight-line embedding to order edges around each vertex. Parallel edges
// and self-loops are not supported here.
inline PlanarMap build_planar_map(std::vector<Vec2> positions,
                                  const std::vector<std::pair<int, int>>& edge_list,
                                  const std::vector<double>& weights = {}) {
  PlanarMap m;
  m.pos = std::move(positions);
  int nv = m.num_vertices();
  m.vertex_half.assign(nv, kInvalid);
  m.halves.resize(2 * edge_list.size());
  m.edges.resize(edge_list.size());
  std::vector<std::vector<int>> out(nv);
  for (size_t e = 0; e < edge_list.size(); ++e) {
    auto [a, b] = edge_list[e];
    if (a == b) throw std::runtime_error("self-loop not supported");
    int h = static_cast<int>(2 * e), t = h + 1;
    m.halves[h] = {a, t, kInvalid, kInvalid, kInvalid, static_cast<int>(e)};
    m.halves[t] = {b, h, kInvalid, kInvalid, kInvalid, static_cast<int>(e)};
    m.edges[e] = {h, weights.empty() ? 1.0 : weights[e]};
    out[a].push_back(h);
    out[b].push_back(t);
  }
  // Counterclockwise rotation per vertex.
  for (int v = 0; v < nv; ++v) {
    auto& ov = out[v];
    std::sort(ov.begin(), ov.end(), [&](int p, int q) {
      return angle_of(m.dir(p)) < angle_of(m.dir(q));
    });
    if (!ov.empty()) m.vertex_half[v] = ov[0];
    int d = static_cast<int>(ov.size());
    for (int i = 0; i < d; ++i) {
      // Face on the left: the half-edge entering v whose face continues with
      // ov[i] is the twin of the ccw successor of ov[i].
      int h = ov[i];
      int succ = ov[(i + 1) % d];
      m.halves[m.halves[succ].twin].next = h;
      m.halves[h].prev = m.halves[succ].twin;
    }
  }
  for (auto& h : m.halves)
    if (h.next == kInvalid) throw std::runtime_error("isolated vertex or broken rotation");
  detail::compute_faces(m);
  if (!m.euler_ok()) throw std::runtime_error("graph is not connected planar (Euler check failed)");
  return m;
}

// ---------------------------------------------------------------------------
// Domains: induced subgraphs of the square lattice delta*Z^2.

struct DomainShape {
  enum Kind { Rectangle, Disk } kind = Rectangle;
  double w = 1.0, h = 1.0;  // rectangle
  double radius = 1.0;      // disk, centered at the origin
};

struct Domain {
  double delta = 1.0;
  PlanarMap map;
  DomainShape shape;
  std::vector<int> boundary;  // vertices on the outer face
};

// Rectangle vertices fill the closed box [0,w]x[0,h]; disk vertices are the
// lattice points strictly inside the circle (boundary ties excluded).
inline Domain build_square_domain(const DomainShape& shape, double delta) {
  if (delta <= 0) throw std::invalid_argument("delta must be positive");
  std::vector<Vec2> pts;
  if (shape.kind == DomainShape::Rectangle) {
    if (shape.w < delta || shape.h < delta)
      throw std::invalid_argument("rectangle too small for mesh");
    int nx = static_cast<int>(std::floor(shape.w / delta + 1e-9));
    int ny = static_cast<int>(std::floor(shape.h / delta + 1e-9));
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) pts.push_back({i * delta, j * delta});
  } else {
    if (shape.radius < 2 * delta) throw std::invalid_argument("disk too small for mesh");
    int n = static_cast<int>(std::ceil(shape.radius / delta)) + 1;
    for (int j = -n; j <= n; ++j)
      for (int i = -n; i <= n; ++i) {
        Vec2 p{i * delta, j * delta};
        if (p.norm() < shape.radius - 1e-12) pts.push_back(p);
      }
  }
  // Index lattice points and connect nearest neighbors.
  auto key = [&](Vec2 p) {
    auto r = [&](double t) { return static_cast<long long>(std::llround(t / delta)); };
    return std::pair<long long, long long>(r(p.x), r(p.y));
  };
  std::vector<std::pair<int, int>> el;
  {
    std::vector<std::pair<std::pair<long long, long long>, int>> idx;
    idx.reserve(pts.size());
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) idx.push_back({key(pts[i]), i});
    std::sort(idx.begin(), idx.end());
    auto find = [&](std::pair<long long, long long> k) -> int {
      auto it = std::lower_bound(idx.begin(), idx.end(), std::make_pair(k, -1));
      if (it != idx.end() && it->first == k) return it->second;
      return kInvalid;
    };
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      auto [kx, ky] = key(pts[i]);
      int right = find({kx + 1, ky}), up = find({kx, ky + 1});
      if (right != kInvalid) el.push_back({i, right});
      if (up != kInvalid) el.push_back({i, up});
    }
  }
  Domain d;
  d.delta = delta;
  d.shape = shape;
  d.map = build_planar_map(std::move(pts), el);
  // Every bounded face of a lattice domain must be a unit square.
  int bounded = 0;
  for (int f = 0; f < d.map.num_faces(); ++f) {
    if (d.map.faces[f].outer) continue;
    ++bounded;
    if (d.map.face_cycle(f).size() != 4)
      throw std::runtime_error("domain has a non-square bounded face (disconnected or holed region)");
  }
  if (bounded < 1) throw std::runtime_error("degenerate domain: no bounded face");
  d.boundary = d.map.boundary_vertices();
  return d;
}

// ---------------------------------------------------------------------------
// Duals.

enum class DualMode { Full, Weak };

struct DualMap {
  PlanarMap map;                 // the dual as a planar map (combinatorial)
  std::vector<int> vertex_of_face;  // primal face id -> dual vertex id (or -1)
  std::vector<int> dual_edge_of;    // primal edge id -> dual edge id (or -1)
  int outer_vertex = kInvalid;      // dual vertex of the primal outer face (Full mode)
};

// Combinatorial dual. In Full mode every primal face becomes a dual vertex
// and every primal edge gets a dual edge; parallel dual edges are fine since
// the rotation system is inherited from the primal map, not from geometry.
// In Weak mode only bounded faces survive and edges touching the outer face
// are dropped (the weak dual is returned as a planar map when it is connected
// with at least one edge, which is the case for all lattice domains we use).
inline DualMap dual_graph(const PlanarMap& g, DualMode mode) {
  DualMap d;
  d.vertex_of_face.assign(g.num_faces(), kInvalid);
  int nv = 0;
  for (int f = 0; f < g.num_faces(); ++f) {
    if (mode == DualMode::Weak && g.faces[f].outer) continue;
    d.vertex_of_face[f] = nv++;
  }
  PlanarMap& m = d.map;
  m.pos.resize(nv);
  m.vertex_half.assign(nv, kInvalid);
  for (int f = 0; f < g.num_faces(); ++f) {
    if (d.vertex_of_face[f] == kInvalid) continue;
    Vec2 c = g.face_centroid(f);
    if (g.faces[f].outer) {
      // place the outer dual vertex above everything (drawing only)
      double maxy = -1e300, cx = 0;
      for (auto& p : g.pos) { maxy = std::max(maxy, p.y); cx += p.x; }
      c = {cx / g.num_vertices(), maxy + 1.0};
    }
    m.pos[d.vertex_of_face[f]] = c;
  }
  d.dual_edge_of.assign(g.num_edges(), kInvalid);
  // dual half-edge of primal half-edge h: origin = face(h); twin pairs with
  // twin(h). Kept only if both faces survive.
  std::vector<int> dh_of(g.halves.size(), kInvalid);
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [h, t] = g.edge_halves(e);
    int fa = d.vertex_of_face[g.halves[h].face];
    int fb = d.vertex_of_face[g.halves[t].face];
    if (fa == kInvalid || fb == kInvalid) continue;
    int eh = static_cast<int>(m.halves.size());
    m.halves.push_back({fa, eh + 1, kInvalid, kInvalid, kInvalid, static_cast<int>(m.edges.size())});
    m.halves.push_back({fb, eh, kInvalid, kInvalid, kInvalid, static_cast<int>(m.edges.size())});
    dh_of[h] = eh;
    dh_of[t] = eh + 1;
    d.dual_edge_of[e] = static_cast<int>(m.edges.size());
    m.edges.push_back({eh, 1.0});
  }
  // Dual faces are the primal vertices: around primal vertex v the dual cycle
  // steps d(twin(h)) -> d(twin(ccw(h))) for outgoing h. Equivalently, for a
  // dual half-edge d(g) with g pointing into v: next = d(twin(rot_ccw(twin(g)))).
  for (size_t h = 0; h < g.halves.size(); ++h) {
    if (dh_of[h] == kInvalid) continue;
    // g = h points a->b; dual half dh_of[h] goes face(h) -> face(twin h),
    // crossing h. It participates in the dual face around vertex b = dest(h).
    int hh = static_cast<int>(h);
    // advance: next primal half-edge around b, ccw, that has a surviving dual
    int t = g.halves[hh].twin;  // outgoing from b
    int k = t;
    do {
      k = g.rot_ccw(k);
    } while (dh_of[g.halves[k].twin] == kInvalid && k != t);
    int nxt = dh_of[g.halves[k].twin];
    if (nxt == kInvalid) throw std::runtime_error("weak dual: dangling dual edge");
    m.halves[dh_of[h]].next = nxt;
    m.halves[nxt].prev = dh_of[h];
  }
  for (auto& hh : m.halves)
    if (hh.next == kInvalid) throw std::runtime_error("dual: broken rotation");
  for (size_t h = 0; h < m.halves.size(); ++h)
    if (m.vertex_half[m.halves[h].origin] == kInvalid)
      m.vertex_half[m.halves[h].origin] = static_cast<int>(h);
  if (!m.halves.empty()) {
    // Face orbits; outer face is not geometrically meaningful for an abstract
    // dual, so mark the orbit around the first boundary-incident primal vertex.
    m.faces.clear();
    for (auto& hh : m.halves) hh.face = kInvalid;
    for (int h0 = 0; h0 < static_cast<int>(m.halves.size()); ++h0) {
      if (m.halves[h0].face != kInvalid) continue;
      int f = static_cast<int>(m.faces.size());
      m.faces.push_back({h0, false});
      int h = h0;
      do {
        m.halves[h].face = f;
        h = m.halves[h].next;
      } while (h != h0);
    }
    m.outer_face = 0;
    m.faces[0].outer = true;  // conventional; abstract duals have no canonical outer face
  }
  if (mode == DualMode::Full) d.outer_vertex = d.vertex_of_face[g.outer_face];
  return d;
}

// ---------------------------------------------------------------------------
// Wired augmentation: ghost vertex joined to every boundary vertex. The
// rotation system is built combinatorially (ghost edges routed through the
// outer face), so the embedding stays planar even though straight segments
// from the drawn ghost position would cross the domain.
inline PlanarMap augment_wired(const Domain& dom) {
  const PlanarMap& g = dom.map;
  if (dom.boundary.empty()) throw std::runtime_error("empty boundary");
  PlanarMap m;
  m.pos = g.pos;
  double maxy = -1e300, cx = 0;
  for (auto& p : g.pos) { maxy = std::max(maxy, p.y); cx += p.x; }
  int ghost = g.num_vertices();
  m.pos.push_back({cx / g.num_vertices(), maxy + 2 * dom.delta});
  m.halves = g.halves;
  m.edges = g.edges;
  m.vertex_half = g.vertex_half;
  m.vertex_half.push_back(kInvalid);

  // Outer face cycle; at each first visit of a vertex insert a ghost edge in
  // that angular sector.
  std::vector<int> cyc = g.face_cycle(g.outer_face);
  std::vector<char> seen(g.num_vertices(), 0);
  // For each insertion we cut the outer cycle: ... h_prev -> h ... becomes
  // h_prev -> (v->ghost) -> (ghost->v) -> h. Chaining all insertions keeps
  // one consistent outer structure with the ghost in the middle.
  struct Ins { int at_half; int up; int down; };  // insert before at_half
  std::vector<Ins> ins;
  for (int h : cyc) {
    int v = m.halves[h].origin;
    if (seen[v]) continue;
    seen[v] = 1;
    int up = static_cast<int>(m.halves.size());      // v -> ghost
    int down = up + 1;                               // ghost -> v
    int e = static_cast<int>(m.edges.size());
    m.halves.push_back({v, down, kInvalid, kInvalid, kInvalid, e});
    m.halves.push_back({ghost, up, kInvalid, kInvalid, kInvalid, e});
    m.edges.push_back({up, 1.0});
    ins.push_back({h, up, down});
  }
  // Rewire. The old outer face splits into one sector per boundary vertex:
  // sector_i = (ghost->v_i, boundary arc v_i..v_{i+1}, v_{i+1}->ghost), so
  // prev(at_half_i) -> up_i, down_i -> at_half_i, and up_{i+1} -> down_i.
  int k = static_cast<int>(ins.size());
  for (int i = 0; i < k; ++i) {
    int h = ins[i].at_half;
    int p = m.halves[h].prev;
    m.halves[p].next = ins[i].up;
    m.halves[ins[i].up].prev = p;
    m.halves[ins[i].down].next = h;
    m.halves[h].prev = ins[i].down;
    m.halves[ins[(i + 1) % k].up].next = ins[i].down;
    m.halves[ins[i].down].prev = ins[(i + 1) % k].up;
  }
  m.vertex_half[ghost] = ins.empty() ? kInvalid : m.halves[ins[0].up].twin;
  m.outer_face = kInvalid;
  // The unbounded face is one of the ghost sectors; freeze the one left of
  // the first inserted ghost edge (field parities depend on this convention).
  detail::compute_faces(m, ins.empty() ? kInvalid : ins[0].up);
  if (!m.euler_ok()) throw std::runtime_error("wired augmentation broke planarity");
  return m;
}

// ---------------------------------------------------------------------------
// Corners. A corner is an incidence (face u, vertex v); it owns the angular
// sector at v between two consecutive edges. eta is the fixed square root
// with conj(eta)^2 = unit corner direction; the branch halves the angle into
// (-pi/2, pi/2] and conjugates.
struct Corner {
  int vertex = kInvalid;
  int face = kInvalid;
  int half = kInvalid;  // outgoing half-edge whose left sector is this corner
  Vec2 direction;       // unit sector bisector, pointing out of the vertex
};

inline std::complex<double> sqrt_branch(Vec2 dir) {
  double a = angle_of(dir);  // (-pi, pi]
  double half = a / 2;       // (-pi/2, pi/2]
  return std::complex<double>(std::cos(half), std::sin(half));
}
inline std::complex<double> eta_of_direction(Vec2 dir) { return std::conj(sqrt_branch(dir)); }

// One corner per (vertex, angular sector). The sector of outgoing half-edge h
// spans counterclockwise from h to rot_ccw(h) and belongs to face(h), the face
// on the left of h.
inline std::vector<Corner> corners(const PlanarMap& m) {
  std::vector<Corner> cs;
  for (int v = 0; v < m.num_vertices(); ++v) {
    for (int h : m.outgoing(v)) {
      Corner c;
      c.vertex = v;
      c.face = m.halves[h].face;
      c.half = h;
      Vec2 d1 = m.dir(h);
      Vec2 d2 = m.dir(m.rot_ccw(h));
      double a1 = angle_of(d1);
      double gap = turn_angle(d1, d2);
      if (gap <= 0) gap += 2 * std::numbers::pi;  // full wrap for degree-1
      double a = a1 + gap / 2;
      c.direction = {std::cos(a), std::sin(a)};
      cs.push_back(c);
    }
  }
  return cs;
}

// Sector angle at origin(h), i.e. ccw gap from h to rot_ccw(h).
inline double sector_angle(const PlanarMap& m, int h) {
  double gap = turn_angle(m.dir(h), m.dir(m.rot_ccw(h)));
  if (gap <= 0) gap += 2 * std::numbers::pi;
  return gap;
}

// ---------------------------------------------------------------------------
// JSON round trip: {"delta":f,"vertices":[[x,y]..],"edges":[[i,j,w]..],
// "outer_face":[v..]}

inline nlohmann::json to_json(const PlanarMap& m, double delta = 1.0) {
  nlohmann::json j;
  j["delta"] = delta;
  auto& vs = j["vertices"] = nlohmann::json::array();
  for (auto& p : m.pos) vs.push_back({p.x, p.y});
  auto& es = j["edges"] = nlohmann::json::array();
  for (int e = 0; e < m.num_edges(); ++e) {
    auto [h, t] = m.edge_halves(e);
    es.push_back({m.halves[h].origin, m.halves[t].origin, m.edges[e].weight});
  }
  auto& of = j["outer_face"] = nlohmann::json::array();
  for (int v : m.boundary_vertices()) of.push_back(v);
  return j;
}

inline PlanarMap planar_map_from_json(const nlohmann::json& j) {
  std::vector<Vec2> pts;
  for (auto& v : j.at("vertices")) pts.push_back({v[0].get<double>(), v[1].get<double>()});
  std::vector<std::pair<int, int>> el;
  std::vector<double> w;
  for (auto& e : j.at("edges")) {
    el.push_back({e[0].get<int>(), e[1].get<int>()});
    w.push_back(e.size() > 2 ? e[2].get<double>() : 1.0);
  }
  return build_planar_map(std::move(pts), el, w);
}

}  // namespace drc
