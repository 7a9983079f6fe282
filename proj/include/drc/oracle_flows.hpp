#pragma once

// Exhaustive enumeration of alternating flows on the tripled digraph, with
// optional source/sink corner insertions. Used as the independent oracle for
// the flow measure, the theta pushforward, and the source-symmetry checks.

#include <functional>
#include <map>

#include <drc/decorations.hpp>
#include <drc/oracle.hpp>

namespace drc::oracle {

struct FlowEnum {
  std::vector<FlowConfig> flows;
  std::vector<double> weights;  // 2^(V - V(F)) * prod x, unsigned
  double z = 0.0;
};

// corner_in / corner_out: corner ids (outgoing primal half-edges). When set,
// enumerate flows on the graph extended by a weight-1 directed edge into
// v(corner_in) and one out of v(corner_out), both always present.
inline FlowEnum enum_alternating_flows(const TripledDigraph& t, int corner_in = -1,
                                       int corner_out = -1) {
  const PlanarMap& g = *t.g;
  int ne = g.num_edges();
  if (ne > budget().max_flow_edges) throw std::runtime_error("flow budget exceeded");
  FlowEnum out;

  // per-vertex slot words including corner darts
  std::vector<std::vector<Slot>> words(g.num_vertices());
  for (int v = 0; v < g.num_vertices(); ++v) {
    std::vector<Slot> darts;
    if (corner_in >= 0 && g.halves[corner_in].origin == v)
      darts.push_back({-1, -1, false, corner_in});
    if (corner_out >= 0 && g.halves[corner_out].origin == v)
      darts.push_back({-1, -1, true, corner_out});
    words[v] = vertex_slots(t, v, darts);
  }
  // undecided edge counters per vertex
  std::vector<int> undecided(g.num_vertices(), 0);
  for (int e = 0; e < ne; ++e) {
    auto [h, tw] = g.edge_halves(e);
    undecided[g.halves[h].origin]++;
    undecided[g.halves[tw].origin]++;
  }
  FlowConfig f;
  f.state.assign(ne, 0);
  std::function<void(int)> rec = [&](int e) {
    if (e == ne) {
      out.flows.push_back(f);
      double w = flow_weight(t, f);
      out.weights.push_back(w);
      out.z += w;
      return;
    }
    auto [h, tw] = g.edge_halves(e);
    int a = g.halves[h].origin, b = g.halves[tw].origin;
    for (FlowState s : kFlowStates) {
      f.state[e] = s;
      undecided[a]--;
      undecided[b]--;
      bool ok = (undecided[a] > 0 || alternating_at(words[a], f)) &&
                (undecided[b] > 0 || alternating_at(words[b], f));
      if (ok) rec(e + 1);
      undecided[a]++;
      undecided[b]++;
    }
    f.state[e] = 0;
  };
  rec(0);
  return out;
}

// Signed partition function with a disorder path; gamma is given by the set
// of primal edges it crosses. Crossing an edge crosses every strand of it.
inline double z_flow_signed(const TripledDigraph& t, const FlowEnum& fe,
                            const std::vector<int>& gamma_edges) {
  double z = 0.0;
  for (size_t i = 0; i < fe.flows.size(); ++i) {
    int crossings = 0;
    for (int e : gamma_edges) crossings += flow_edge_count(fe.flows[i].state[e]);
    z += (crossings % 2 ? -1.0 : 1.0) * fe.weights[i];
  }
  return z;
}

// Pushforward of the flow measure under theta, as a law on class vectors.
inline ClassLaw flow_class_law(const TripledDigraph& t) {
  FlowEnum fe = enum_alternating_flows(t);
  ClassLaw law;
  for (size_t i = 0; i < fe.flows.size(); ++i)
    law.prob[flow_to_trace(fe.flows[i])] += fe.weights[i] / fe.z;
  return law;
}

// Connectivity of two faces through dual edges of zero-class primal edges.
inline bool faces_connected_in_zero_set(const PlanarMap& g, const std::vector<std::uint8_t>& cls,
                                        int fu, int fv) {
  std::vector<int> comp(g.num_faces(), -1);
  std::vector<int> stack{fu};
  comp[fu] = 0;
  while (!stack.empty()) {
    int f = stack.back();
    stack.pop_back();
    for (int h : g.face_cycle(f)) {
      if (cls[g.halves[h].edge] != 0) continue;  // dual edge open only across zero class
      int o = g.halves[g.halves[h].twin].face;
      if (comp[o] == -1) {
        comp[o] = 0;
        stack.push_back(o);
      }
    }
  }
  return comp[fv] == 0;
}

}  // namespace drc::oracle
