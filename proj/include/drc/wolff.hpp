#pragma once

// Large-domain primal-trace sampling through the odd-part decomposition: the
// odd set of one sourceless current is the even-subgraph model with edge
// weight x, i.e. the interface set of an Ising model on the full dual graph
// at the dual coupling; the even excess is an independent x^2 coin per edge
// not already odd. Two independent interface samples give the double current.
// The Ising marginals are drawn by Wolff cluster updates, so unlike the
// Kasteleyn route this sampler is exact only in the limit of long chains;
// mixing at criticality is fast and the choice is cross-checked against the
// exact sampler in the tests.

#include <drc/currents.hpp>

namespace drc {

struct IsingChain {
  int n = 0;
  std::vector<std::vector<int>> adj;
  std::vector<std::int8_t> spin;
  double p_add = 0.0;  // 1 - exp(-2 beta)

  static IsingChain make(int n, const std::vector<std::pair<int, int>>& edges, double beta,
                         std::mt19937_64& rng) {
    IsingChain c;
    c.n = n;
    c.adj.resize(n);
    for (auto [a, b] : edges) {
      c.adj[a].push_back(b);
      c.adj[b].push_back(a);
    }
    c.spin.resize(n);
    for (auto& s : c.spin) s = uniform01(rng) < 0.5 ? 1 : -1;
    c.p_add = 1.0 - std::exp(-2.0 * beta);
    return c;
  }

  void wolff_step(std::mt19937_64& rng) {
    int seed = static_cast<int>(uniform01(rng) * n);
    std::int8_t s = spin[seed];
    std::vector<int> stack{seed};
    spin[seed] = -s;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int o : adj[v]) {
        if (spin[o] != s) continue;
        if (uniform01(rng) < p_add) {
          spin[o] = -s;
          stack.push_back(o);
        }
      }
    }
  }

  void sweep(std::mt19937_64& rng, int steps) {
    for (int i = 0; i < steps; ++i) wolff_step(rng);
  }
};

// Primal-only double-current trace sampler for large domains.
struct McmcTraceSampler {
  const PlanarMap* g = nullptr;
  double x = 0.0;
  std::vector<std::pair<int, int>> dual_el;  // per primal edge: dual endpoints
  IsingChain chain1, chain2;
  int gap = 8;  // wolff steps between samples

  static McmcTraceSampler make(const PlanarMap& g, double x, std::mt19937_64& rng,
                               int equilibration = 400) {
    McmcTraceSampler s;
    s.g = &g;
    s.x = x;
    DualMap full = dual_graph(g, DualMode::Full);
    for (int e = 0; e < g.num_edges(); ++e) {
      auto [h, t] = g.edge_halves(e);
      s.dual_el.push_back({full.vertex_of_face[g.halves[h].face],
                           full.vertex_of_face[g.halves[t].face]});
    }
    double beta_dual = -0.5 * std::log(x);  // exp(-2 beta) = x
    s.chain1 = IsingChain::make(full.map.num_vertices(), s.dual_el, beta_dual, rng);
    s.chain2 = IsingChain::make(full.map.num_vertices(), s.dual_el, beta_dual, rng);
    s.chain1.sweep(rng, equilibration);
    s.chain2.sweep(rng, equilibration);
    return s;
  }

  CurrentTrace sample(std::mt19937_64& rng) {
    chain1.sweep(rng, gap);
    chain2.sweep(rng, gap);
    CurrentTrace tr;
    tr.g = g;
    tr.has_dual = false;
    int ne = g->num_edges();
    tr.primal.assign(ne, ClassZero);
    tr.dual.assign(ne, ClassZero);
    double x2 = x * x;
    for (int e = 0; e < ne; ++e) {
      auto [a, b] = dual_el[e];
      bool o1 = chain1.spin[a] != chain1.spin[b];
      bool o2 = chain2.spin[a] != chain2.spin[b];
      if (o1 != o2)
        tr.primal[e] = ClassOdd;
      else if (o1 && o2)
        tr.primal[e] = ClassEven;
      else
        tr.primal[e] = uniform01(rng) < x2 ? ClassEven : ClassZero;
    }
    return tr;
  }
};

}  // namespace drc
