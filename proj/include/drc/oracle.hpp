#pragma once

// Brute-force enumeration oracles. Everything here is deliberately
// independent of the Kasteleyn/sampling code paths it is used to check:
// plain subset enumeration and backtracking over explicit edge lists.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include <drc/planar_map.hpp>

namespace drc::oracle {

struct Budget {
  int max_even_subgraph_edges = 14;
  int max_flow_edges = 12;
  int max_matching_vertices = 32;
  int poisson_cutoff = 40;
};

inline Budget budget() { return {}; }

// ---------------------------------------------------------------------------
// Even subgraphs (high-temperature expansion).

struct EvenSubgraphs {
  std::vector<std::uint32_t> sets;  // edge bitmasks
  std::vector<double> weights;      // prod x_e over the set
  double z = 0.0;                   // sum of weights
};

// All eta with even degree everywhere (sources empty) or odd exactly at the
// two source vertices.
inline EvenSubgraphs enum_even_subgraphs(int nv, const std::vector<std::pair<int, int>>& edges,
                                         const std::vector<double>& x,
                                         std::pair<int, int> sources = {-1, -1}) {
  int ne = static_cast<int>(edges.size());
  if (ne > budget().max_even_subgraph_edges) throw std::runtime_error("even-subgraph budget exceeded");
  EvenSubgraphs out;
  for (std::uint32_t mask = 0; mask < (1u << ne); ++mask) {
    std::vector<int> deg(nv, 0);
    double w = 1.0;
    for (int e = 0; e < ne; ++e)
      if (mask >> e & 1) {
        deg[edges[e].first]++;
        deg[edges[e].second]++;
        w *= x[e];
      }
    bool ok = true;
    for (int v = 0; v < nv && ok; ++v) {
      int want = (v == sources.first) + (v == sources.second);
      ok = (deg[v] % 2) == (want % 2);
    }
    if (!ok) continue;
    out.sets.push_back(mask);
    out.weights.push_back(w);
    out.z += w;
  }
  return out;
}

// Two-point function by the ratio of high-temperature sums.
inline double ising_two_point(int nv, const std::vector<std::pair<int, int>>& edges,
                              const std::vector<double>& x, int v0, int v1) {
  if (v0 == v1) return 1.0;
  double znum = enum_even_subgraphs(nv, edges, x, {v0, v1}).z;
  double zden = enum_even_subgraphs(nv, edges, x).z;
  return znum / zden;
}

// Z restricted to sets containing / avoiding a marked edge.
struct SplitByEdge {
  double z_with = 0.0, z_without = 0.0;
};
inline SplitByEdge split_by_edge(const EvenSubgraphs& es, int edge) {
  SplitByEdge s;
  for (size_t i = 0; i < es.sets.size(); ++i)
    (es.sets[i] >> edge & 1 ? s.z_with : s.z_without) += es.weights[i];
  return s;
}

// ---------------------------------------------------------------------------
// Perfect matchings of a (signed-)weighted graph given as an edge list.

struct DimerEnum {
  double z = 0.0;                      // signed sum over covers
  std::vector<double> edge_marginal;   // sum of |cover weights| containing e, over sum |w|
  double z_abs = 0.0;
  std::vector<std::vector<int>> covers;  // lists of edge ids
  std::vector<double> cover_weights;
};

inline void dimer_backtrack(int nv, const std::vector<std::pair<int, int>>& edges,
                            const std::vector<double>& w,
                            const std::vector<std::vector<int>>& incident, std::vector<char>& used,
                            int covered_count, double weight, std::vector<int>& chosen,
                            DimerEnum& out) {
  if (covered_count == nv) {
    out.z += weight;
    out.z_abs += std::abs(weight);
    for (int e : chosen) out.edge_marginal[e] += std::abs(weight);
    out.covers.push_back(chosen);
    out.cover_weights.push_back(weight);
    return;
  }
  int v = 0;
  while (used[v]) ++v;
  for (int e : incident[v]) {
    int o = edges[e].first == v ? edges[e].second : edges[e].first;
    if (used[o]) continue;
    used[v] = used[o] = 1;
    chosen.push_back(e);
    dimer_backtrack(nv, edges, w, incident, used, covered_count + 2, weight * w[e], chosen, out);
    chosen.pop_back();
    used[v] = used[o] = 0;
  }
}

inline DimerEnum enum_dimer_covers(int nv, const std::vector<std::pair<int, int>>& edges,
                                   const std::vector<double>& w) {
  if (nv > budget().max_matching_vertices) throw std::runtime_error("matching budget exceeded");
  DimerEnum out;
  out.edge_marginal.assign(edges.size(), 0.0);
  if (nv % 2) return out;  // odd vertex count: no covers
  std::vector<std::vector<int>> incident(nv);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    incident[edges[e].first].push_back(e);
    incident[edges[e].second].push_back(e);
  }
  std::vector<char> used(nv, 0);
  std::vector<int> chosen;
  dimer_backtrack(nv, edges, w, incident, used, 0, 1.0, chosen, out);
  if (out.z_abs > 0)
    for (auto& m : out.edge_marginal) m /= out.z_abs;
  return out;
}

// ---------------------------------------------------------------------------
// Truncated-series current laws. Per-edge sums of beta^n/n! split by parity,
// truncated at `cutoff`; the truncation remainder bound is reported.

struct EdgeSeries {
  double even_incl0 = 0.0;  // sum over even n >= 0
  double odd = 0.0;         // sum over odd n
  double tail_bound = 0.0;
};

inline EdgeSeries edge_series(double beta, int cutoff) {
  EdgeSeries s;
  double term = 1.0;
  for (int n = 0; n <= cutoff; ++n) {
    (n % 2 ? s.odd : s.even_incl0) += term;
    term *= beta / (n + 1);
  }
  // remainder of exp(beta) past cutoff
  s.tail_bound = term * std::exp(beta);
  return s;
}

// Edge class in a current trace.
enum class EdgeClass : std::uint8_t { Zero = 0, Odd = 1, EvenPos = 2 };

using ClassConfig = std::vector<EdgeClass>;

struct ClassLaw {
  std::map<std::vector<std::uint8_t>, double> prob;  // class vector -> probability
  double truncation_bound = 0.0;

  double total() const {
    double t = 0;
    for (auto& [k, p] : prob) t += p;
    return t;
  }
};

inline bool parity_matches(std::uint32_t parity_mask, int nv,
                           const std::vector<std::pair<int, int>>& edges,
                           std::pair<int, int> sources = {-1, -1}) {
  std::vector<int> deg(nv, 0);
  for (int e = 0; e < static_cast<int>(edges.size()); ++e)
    if (parity_mask >> e & 1) {
      deg[edges[e].first]++;
      deg[edges[e].second]++;
    }
  for (int v = 0; v < nv; ++v) {
    int want = (v == sources.first) + (v == sources.second);
    if ((deg[v] % 2) != (want % 2)) return false;
  }
  return true;
}

inline bool sourceless(std::uint32_t parity_mask, int nv,
                       const std::vector<std::pair<int, int>>& edges) {
  return parity_matches(parity_mask, nv, edges);
}

// Exact (to truncation) law of the class vector of a double current n1+n2.
// n1 may carry a source pair; n2 is always sourceless. The returned map holds
// probabilities; `zz` is the double partition function, so zz*prob are the
// class weights.
struct DoubleLaw : ClassLaw {
  double zz = 0.0;
};

inline DoubleLaw truncated_double_current_law(int nv, const std::vector<std::pair<int, int>>& edges,
                                              double beta, int cutoff = 40,
                                              std::pair<int, int> sources1 = {-1, -1}) {
  int ne = static_cast<int>(edges.size());
  if (ne > 20) throw std::runtime_error("current-law budget exceeded");
  EdgeSeries s = edge_series(beta, cutoff);
  DoubleLaw law;
  law.truncation_bound = s.tail_bound;
  double z1 = 0.0, z2 = 0.0;
  std::vector<std::uint32_t> masks1;
  for (std::uint32_t p = 0; p < (1u << ne); ++p) {
    double w = 1.0;
    for (int e = 0; e < ne; ++e) w *= (p >> e & 1) ? s.odd : s.even_incl0;
    if (parity_matches(p, nv, edges, sources1)) {
      masks1.push_back(p);
      z1 += w;
    }
    if (sourceless(p, nv, edges)) z2 += w;
  }
  double zz = z1 * z2;
  law.zz = zz;

  // enumerate class vectors: per edge 0/1/2
  std::vector<std::uint8_t> cls(ne, 0);
  auto rec = [&](auto&& self, int e) -> void {
    if (e == ne) {
      std::uint32_t odd_mask = 0;
      for (int i = 0; i < ne; ++i)
        if (cls[i] == 1) odd_mask |= 1u << i;
      double total = 0.0;
      for (std::uint32_t p1 : masks1) {
        std::uint32_t p2 = p1 ^ odd_mask;
        if (!sourceless(p2, nv, edges)) continue;
        double w = 1.0;
        for (int i = 0; i < ne && w != 0.0; ++i) {
          bool a = p1 >> i & 1, b = p2 >> i & 1;
          switch (cls[i]) {
            case 0: w *= (!a && !b) ? 1.0 : 0.0; break;
            case 1: w *= (a != b) ? s.odd * s.even_incl0 : 0.0; break;
            case 2:
              if (a && b)
                w *= s.odd * s.odd;
              else if (!a && !b)
                w *= s.even_incl0 * s.even_incl0 - 1.0;
              else
                w = 0.0;
              break;
          }
        }
        total += w;
      }
      if (total > 0) law.prob[cls] = total / zz;
      return;
    }
    for (std::uint8_t c = 0; c < 3; ++c) {
      cls[e] = c;
      self(self, e + 1);
    }
  };
  rec(rec, 0);
  return law;
}

// Same for a single current.
inline ClassLaw truncated_single_current_law(int nv, const std::vector<std::pair<int, int>>& edges,
                                             double beta, int cutoff = 40) {
  int ne = static_cast<int>(edges.size());
  EdgeSeries s = edge_series(beta, cutoff);
  ClassLaw law;
  law.truncation_bound = s.tail_bound;
  double z = 0.0;
  for (std::uint32_t p = 0; p < (1u << ne); ++p) {
    if (!sourceless(p, nv, edges)) continue;
    double w = 1.0;
    for (int e = 0; e < ne; ++e) w *= (p >> e & 1) ? s.odd : s.even_incl0;
    z += w;
  }
  std::vector<std::uint8_t> cls(ne, 0);
  auto rec = [&](auto&& self, int e, std::uint32_t parity, double w) -> void {
    if (w == 0.0) return;
    if (e == ne) {
      if (!sourceless(parity, nv, edges)) return;
      law.prob[cls] += w / z;
      return;
    }
    cls[e] = 0;
    self(self, e + 1, parity, w);
    cls[e] = 1;
    self(self, e + 1, parity | (1u << e), w * s.odd);
    cls[e] = 2;
    self(self, e + 1, parity, w * (s.even_incl0 - 1.0));
  };
  rec(rec, 0, 0u, 1.0);
  return law;
}

// ---------------------------------------------------------------------------
// Frozen test corpus (declared below; flow enumeration lives in
// oracle_flows.hpp to keep the decorated-graph dependency one-way).

struct TestGraph {
  std::string name;
  std::vector<Vec2> pos;
  std::vector<std::pair<int, int>> edges;
  bool planar_map_ok = true;  // single edge / path have no bounded face
};

inline std::vector<TestGraph> corpus() {
  std::vector<TestGraph> out;
  out.push_back({"edge1", {{0, 0}, {1, 0}}, {{0, 1}}, false});
  out.push_back({"path2", {{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 2}}, false});
  out.push_back({"triangle", {{0, 0}, {1, 0}, {0.5, 0.8660254037844386}}, {{0, 1}, {1, 2}, {2, 0}}, true});
  out.push_back({"cycle4", {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, true});
  out.push_back({"grid2x3",
                 {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}},
                 {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {0, 3}, {1, 4}, {2, 5}},
                 true});
  out.push_back({"grid3x3",
                 {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}, {0, 2}, {1, 2}, {2, 2}},
                 {{0, 1}, {1, 2}, {3, 4}, {4, 5}, {6, 7}, {7, 8}, {0, 3}, {1, 4}, {2, 5}, {3, 6}, {4, 7}, {5, 8}},
                 true});
  return out;
}

inline double critical_x() { return std::sqrt(2.0) - 1.0; }
inline double critical_beta() { return 0.5 * std::log(std::sqrt(2.0) + 1.0); }
inline double beta_of_x(double x) { return std::atanh(x); }
inline double x_of_beta(double beta) { return std::tanh(beta); }
inline double dual_x(double x) { return (1.0 - x) / (1.0 + x); }

}  // namespace drc::oracle
