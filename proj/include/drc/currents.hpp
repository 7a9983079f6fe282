#pragma once

// Coupled primal/dual double-current traces extracted from city-graph dimer
// covers, plus the exact whole-pipeline sampler.
//
// Per quadrangle, the streets of the cover determine the trace classes:
// the primal current is odd exactly when one of the two streets parallel to
// the edge is matched, and dually for the perpendicular pair. The remaining
// zero/even-positive splits need one independent coin per quadrangle:
//
//   streets parallel to e, both matched:   even+ with prob (1+x^2)/2
//   streets across e, both matched:        dual even+ with prob (1+x*^2)/2
//   empty quadrangle, one shared uniform:  primal even+ if U < 2x^2/(1+x^2),
//                                          dual even+ if U >= 1-2x*^2/(1+x*^2)
//
// so that the two sides are never both nonzero. Edges with an endpoint of
// degree one (corpus graphs only) carry an even+ coin of probability x^2
// regardless of the pattern, and the dual trace is not defined there.

#include <drc/kasteleyn.hpp>
#include <drc/oracle.hpp>

namespace drc {

enum : std::uint8_t { ClassZero = 0, ClassOdd = 1, ClassEven = 2 };

struct CurrentTrace {
  const PlanarMap* g = nullptr;
  std::vector<std::uint8_t> primal;  // per edge of G
  std::vector<std::uint8_t> dual;    // per edge of G (class of the dual edge)
  bool has_dual = true;
};

inline double even_coin_parallel(double x) { return (1 + x * x) / 2; }
inline double even_coin_empty(double x) { return 2 * x * x / (1 + x * x); }

// Weight used when reconstructing the finer cycle-expanded configuration from
// a city-graph cover (the remaining local reconstruction probability).
inline double decorated_reconstruction_prob(double x) {
  return 2 * (1 - x * x) / (3 + x * x * x * x);
}

inline CurrentTrace cg_to_coupled_currents(const CityGraph& cg, const DimerCover& m,
                                           std::mt19937_64& rng) {
  const PlanarMap& g = *cg.g;
  CurrentTrace tr;
  tr.g = &g;
  int ne = g.num_edges();
  tr.primal.assign(ne, ClassZero);
  tr.dual.assign(ne, ClassZero);
  std::vector<char> in_m(cg.map.num_edges(), 0);
  for (int e : m.edges) in_m[e] = 1;
  std::vector<int> np(ne, 0), nd(ne, 0);
  for (int e = 0; e < cg.map.num_edges(); ++e) {
    if (!in_m[e] || cg.g_edge[e] < 0) continue;
    if (cg.kind[e] == CityGraph::StreetPrimal) np[cg.g_edge[e]]++;
    if (cg.kind[e] == CityGraph::StreetDual) nd[cg.g_edge[e]]++;
  }
  for (int e = 0; e < ne; ++e) {
    auto [h, t] = g.edge_halves(e);
    bool leaf = g.degree(g.halves[h].origin) == 1 || g.degree(g.halves[t].origin) == 1;
    double x = cg.xe[e];
    double xs = kw_dual_x(x);
    double u = uniform01(rng);
    if (leaf) {
      tr.has_dual = false;
      if (np[e] == 1) throw std::runtime_error("odd class at a leaf edge");
      tr.primal[e] = (u < x * x) ? ClassEven : ClassZero;
      continue;
    }
    if (np[e] == 1) {
      tr.primal[e] = ClassOdd;
    } else if (nd[e] == 1) {
      tr.dual[e] = ClassOdd;
    } else if (np[e] == 2) {
      tr.primal[e] = (u < even_coin_parallel(x)) ? ClassEven : ClassZero;
    } else if (nd[e] == 2) {
      tr.dual[e] = (u < even_coin_parallel(xs)) ? ClassEven : ClassZero;
    } else {
      // empty quadrangle: one uniform drives both sides disjointly
      if (u < even_coin_empty(x))
        tr.primal[e] = ClassEven;
      else if (u >= 1.0 - even_coin_empty(xs))
        tr.dual[e] = ClassEven;
    }
  }
  return tr;
}

// Exact distribution of the primal (and dual) class vectors induced by the
// rule table above, by enumerating all covers; this is the sampler's law with
// the randomness integrated out, used for exact comparisons in tests.
struct CoupledLaw {
  oracle::ClassLaw primal;
  oracle::ClassLaw dual;
  bool has_dual = true;
};

inline CoupledLaw exact_coupled_law(const CityGraph& cg) {
  const PlanarMap& g = *cg.g;
  int ne = g.num_edges();
  std::vector<std::pair<int, int>> el;
  std::vector<double> wt;
  for (int e = 0; e < cg.map.num_edges(); ++e) {
    auto [h, t] = cg.map.edge_halves(e);
    el.push_back({cg.map.halves[h].origin, cg.map.halves[t].origin});
    wt.push_back(cg.map.edges[e].weight);
  }
  auto covers = oracle::enum_dimer_covers(cg.map.num_vertices(), el, wt);
  CoupledLaw law;
  std::vector<char> leaf(ne, 0);
  for (int e = 0; e < ne; ++e) {
    auto [h, t] = g.edge_halves(e);
    leaf[e] = g.degree(g.halves[h].origin) == 1 || g.degree(g.halves[t].origin) == 1;
    if (leaf[e]) law.has_dual = false;
  }
  for (size_t c = 0; c < covers.covers.size(); ++c) {
    double pcov = covers.cover_weights[c] / covers.z;
    std::vector<int> np(ne, 0), nd(ne, 0);
    for (int e : covers.covers[c]) {
      if (cg.g_edge[e] < 0) continue;
      if (cg.kind[e] == CityGraph::StreetPrimal) np[cg.g_edge[e]]++;
      if (cg.kind[e] == CityGraph::StreetDual) nd[cg.g_edge[e]]++;
    }
    // per-edge class distributions (independent given the cover)
    std::vector<std::array<double, 3>> pp(ne), pd(ne);
    for (int e = 0; e < ne; ++e) {
      double x = cg.xe[e], xs = kw_dual_x(x);
      pp[e] = {0, 0, 0};
      pd[e] = {0, 0, 0};
      if (leaf[e]) {
        pp[e][ClassEven] = x * x;
        pp[e][ClassZero] = 1 - x * x;
        pd[e][ClassZero] = 1;
      } else if (np[e] == 1) {
        pp[e][ClassOdd] = 1;
        pd[e][ClassZero] = 1;
      } else if (nd[e] == 1) {
        pd[e][ClassOdd] = 1;
        pp[e][ClassZero] = 1;
      } else if (np[e] == 2) {
        pp[e][ClassEven] = even_coin_parallel(x);
        pp[e][ClassZero] = 1 - pp[e][ClassEven];
        pd[e][ClassZero] = 1;
      } else if (nd[e] == 2) {
        pd[e][ClassEven] = even_coin_parallel(xs);
        pd[e][ClassZero] = 1 - pd[e][ClassEven];
        pp[e][ClassZero] = 1;
      } else {
        pp[e][ClassEven] = even_coin_empty(x);
        pd[e][ClassEven] = even_coin_empty(xs);
        pp[e][ClassZero] = 1 - pp[e][ClassEven];
        pd[e][ClassZero] = 1 - pd[e][ClassEven];
      }
    }
    // accumulate product laws over class vectors
    std::vector<std::uint8_t> cls(ne, 0);
    auto rec = [&](auto&& self, int e, double p, bool dual_side) -> void {
      if (p == 0) return;
      if (e == ne) {
        (dual_side ? law.dual : law.primal).prob[cls] += pcov * p;
        return;
      }
      auto& tbl = dual_side ? pd : pp;
      for (int k = 0; k < 3; ++k) {
        cls[e] = static_cast<std::uint8_t>(k);
        self(self, e + 1, p * tbl[e][k], dual_side);
      }
    };
    rec(rec, 0, 1.0, false);
    if (law.has_dual) rec(rec, 0, 1.0, true);
  }
  return law;
}

// Ready-to-sample context for one weighted domain graph.
struct CurrentSampler {
  CityGraph cg;
  PhaseAssignment pa;
  KasteleynMatrix km;
  Eigen::MatrixXcd kinv;

  static CurrentSampler make(const PlanarMap& g, const std::vector<double>& x) {
    CurrentSampler s;
    s.cg = build_cg(g, x);
    s.pa = build_weighting_auto(s.cg);
    s.km = build_kasteleyn(s.cg, s.pa);
    s.kinv = dense_inverse(s.km.k);
    return s;
  }

  DimerCover sample_cover(std::mt19937_64& rng) const {
    return sample_dimer_exact(km, kinv, rng);
  }

  CurrentTrace sample_trace(std::mt19937_64& rng) const {
    DimerCover m = sample_cover(rng);
    return cg_to_coupled_currents(cg, m, rng);
  }
};

// Disjointness of the coupled pair: no edge carries nonzero classes on both
// sides.
inline bool trace_disjoint(const CurrentTrace& tr) {
  if (!tr.has_dual) return true;
  for (size_t e = 0; e < tr.primal.size(); ++e)
    if (tr.primal[e] != ClassZero && tr.dual[e] != ClassZero) return false;
  return true;
}

// The odd part of a sourceless current has even degree everywhere.
inline bool odd_part_sourceless(const PlanarMap& g, const std::vector<std::uint8_t>& cls) {
  std::vector<int> deg(g.num_vertices(), 0);
  for (int e = 0; e < g.num_edges(); ++e)
    if (cls[e] == ClassOdd) {
      auto [h, t] = g.edge_halves(e);
      deg[g.halves[h].origin]++;
      deg[g.halves[t].origin]++;
    }
  for (int d : deg)
    if (d % 2) return false;
  return true;
}

}  // namespace drc
