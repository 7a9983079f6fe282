#include <doctest.h>

#include <drc/decorations.hpp>
#include <drc/oracle.hpp>
#include <drc/oracle_flows.hpp>

#include <cmath>
#include <random>

using namespace drc;
namespace orc = drc::oracle;

namespace {

PlanarMap map_of(const orc::TestGraph& tg) {
  return build_planar_map(tg.pos, tg.edges);
}

double tv_distance(const orc::ClassLaw& a, const orc::ClassLaw& b) {
  double tv = 0;
  for (auto& [k, p] : a.prob) {
    auto it = b.prob.find(k);
    tv += std::abs(p - (it == b.prob.end() ? 0.0 : it->second));
  }
  for (auto& [k, p] : b.prob)
    if (!a.prob.count(k)) tv += p;
  return tv / 2;
}

}  // namespace

TEST_CASE("critical constants") {
  double xc = orc::critical_x();
  CHECK(orc::critical_beta() == doctest::Approx(0.44068679350977147).epsilon(1e-12));
  CHECK(std::tanh(orc::critical_beta()) == doctest::Approx(xc).epsilon(1e-14));
  CHECK(orc::dual_x(xc) == doctest::Approx(xc).epsilon(1e-13));  // self-dual point
}

TEST_CASE("weight relations") {
  double xc = orc::critical_x();
  CHECK(y_weight(xc) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(y_weight(0.5) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
  CHECK(w_weight(xc) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(z_weight(xc) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-13));
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    double x = 0.02 + 0.96 * std::uniform_real_distribution<double>(0.,1.)(rng);
    double w = w_weight(x), z = z_weight(x);
    CHECK(std::abs(w * w + z * z - 1.0) < 1e-12);
  }
}

TEST_CASE("tripled digraph reversal identity") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 50; ++i) {
    double x = 0.02 + 0.96 * std::uniform_real_distribution<double>(0.,1.)(rng);
    double y = y_weight(x);
    CHECK(std::abs(x + x + x * x * y - y) < 1e-12);
  }
  // x -> 0 drives all three weights to 0
  CHECK(y_weight(1e-9) < 1e-8);
}

TEST_CASE("single edge flows: exact set") {
  auto tg = orc::corpus()[0];
  PlanarMap g = map_of(tg);
  TripledDigraph t = build_vec_g(g, {0.37});
  auto fe = orc::enum_alternating_flows(t);
  REQUIRE(fe.flows.size() == 3);
  double x = 0.37, y = y_weight(x);
  // empty flow weight 2^2, two circulations {side, middle} of weight x*y
  double expect_z = 4.0 + 2 * x * y;
  CHECK(fe.z == doctest::Approx(expect_z).epsilon(1e-13));
  int n_empty = 0, n_two = 0;
  for (auto& f : fe.flows) {
    int c = flow_edge_count(f.state[0]);
    if (c == 0) ++n_empty;
    if (c == 2) ++n_two;
    CHECK((c == 0 || c == 2));
  }
  CHECK(n_empty == 1);
  CHECK(n_two == 2);
}

TEST_CASE("theta pushforward of flows equals the double current law") {
  for (const char* name : {"edge1", "path2", "triangle", "cycle4"}) {
    for (double x : {0.3, orc::critical_x(), 0.62}) {
      orc::TestGraph tg;
      for (auto& c : orc::corpus())
        if (c.name == name) tg = c;
      PlanarMap g = map_of(tg);
      TripledDigraph t = build_vec_g(g, std::vector<double>(tg.edges.size(), x));
      auto flow_law = orc::flow_class_law(t);
      auto cur_law = orc::truncated_double_current_law(g.num_vertices(), tg.edges,
                                                       orc::beta_of_x(x));
      CHECK(cur_law.truncation_bound < 1e-15);
      double tv = tv_distance(flow_law, cur_law);
      INFO(name, " x=", x, " tv=", tv);
      CHECK(tv < 1e-12);
    }
  }
}

TEST_CASE("gd: structure and dimer partition function equals flow z") {
  for (const char* name : {"edge1", "path2", "triangle", "cycle4"}) {
    orc::TestGraph tg;
    for (auto& c : orc::corpus())
      if (c.name == name) tg = c;
    PlanarMap g = map_of(tg);
    double x = 0.41;
    TripledDigraph t = build_vec_g(g, std::vector<double>(tg.edges.size(), x));
    DecoratedGraph d = build_gd(t);
    // every short edge has weight one, longs carry x or y
    for (size_t e = 0; e < d.edges.size(); ++e)
      if (!d.is_long[e]) CHECK(d.weight[e] == 1.0);
    auto covers = orc::enum_dimer_covers(d.n, d.edges, d.weight);
    auto flows = orc::enum_alternating_flows(t);
    CHECK(covers.z == doctest::Approx(flows.z).epsilon(1e-12));
  }
}

TEST_CASE("gd dimer covers push to the exact flow law") {
  // exact comparison: group covers by their flow image and compare weights
  for (const char* name : {"path2", "triangle"}) {
    orc::TestGraph tg;
    for (auto& c : orc::corpus())
      if (c.name == name) tg = c;
    PlanarMap g = map_of(tg);
    double x = 0.55;
    TripledDigraph t = build_vec_g(g, std::vector<double>(tg.edges.size(), x));
    DecoratedGraph d = build_gd(t);
    auto covers = orc::enum_dimer_covers(d.n, d.edges, d.weight);
    std::map<std::vector<FlowState>, double> grouped;
    for (size_t i = 0; i < covers.covers.size(); ++i) {
      FlowConfig f = dimer_to_flow(d, covers.covers[i]);
      grouped[f.state] += covers.cover_weights[i];
    }
    auto flows = orc::enum_alternating_flows(t);
    REQUIRE(grouped.size() == flows.flows.size());
    for (size_t i = 0; i < flows.flows.size(); ++i) {
      auto it = grouped.find(flows.flows[i].state);
      REQUIRE(it != grouped.end());
      CHECK(it->second == doctest::Approx(flows.weights[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("city graph structure on 3x3 domain") {
  Domain dom = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);  // 3x3 vertices
  std::vector<double> x(dom.map.num_edges(), orc::critical_x());
  CityGraph cg = build_cg(dom.map, x);
  CHECK(dom.map.num_edges() == 12);
  CHECK(cg.map.num_vertices() == 48);
  int streets = 0, roads = 0;
  for (auto k : cg.kind) (k == CityGraph::Road ? roads : streets)++;
  CHECK(streets == 48);
  CHECK(roads == 24);  // = number of corners = sum of degrees
  // quadrangle faces all found, one per edge
  for (int e = 0; e < 12; ++e) CHECK(cg.quad_face[e] >= 0);
  // corner pairing is white/black
  int paired = 0;
  for (auto [w, b] : cg.corner_wb)
    if (w >= 0) {
      CHECK(cg.black[w] == 0);
      CHECK(cg.black[b] == 1);
      ++paired;
    }
  CHECK(paired == 24);
  // interior U-faces and V-faces identified
  int ufaces = 0;
  for (int f : cg.face_of_u)
    if (f >= 0) ++ufaces;
  CHECK(ufaces == 4);
  int vfaces = 0;
  for (int f : cg.face_of_v)
    if (f >= 0) ++vfaces;
  CHECK(vfaces == 9);  // every vertex keeps a bounded city face (all sectors are roaded)
}

TEST_CASE("city graph single edge: bare quadrangle with z = w^2+z^2 = 1") {
  auto tg = orc::corpus()[0];
  PlanarMap g = map_of(tg);
  for (double x : {0.2, orc::critical_x(), 0.8}) {
    CityGraph cg = build_cg(g, {x});
    CHECK(cg.map.num_vertices() == 4);
    CHECK(cg.map.num_edges() == 4);
    std::vector<std::pair<int, int>> el;
    std::vector<double> w;
    for (int e = 0; e < cg.map.num_edges(); ++e) {
      auto [h, t] = cg.map.edge_halves(e);
      el.push_back({cg.map.halves[h].origin, cg.map.halves[t].origin});
      w.push_back(cg.map.edges[e].weight);
    }
    auto covers = orc::enum_dimer_covers(4, el, w);
    CHECK(covers.z == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("source and sink symmetry of signed flow sums") {
  for (const char* name : {"path2", "triangle"}) {
    orc::TestGraph tg;
    for (auto& c : orc::corpus())
      if (c.name == name) tg = c;
    PlanarMap g = map_of(tg);
    double x = 0.47;
    TripledDigraph t = build_vec_g(g, std::vector<double>(tg.edges.size(), x));
    auto cs = corners(g);
    // pick two corners at distinct vertices
    int ci = -1, cj = -1;
    for (auto& a : cs)
      for (auto& b : cs)
        if (a.vertex != b.vertex && ci < 0) {
          ci = a.half;
          cj = b.half;
        }
    REQUIRE(ci >= 0);
    auto f_ij = orc::enum_alternating_flows(t, ci, cj);
    auto f_ji = orc::enum_alternating_flows(t, cj, ci);
    std::vector<int> gamma;  // empty sign path
    CHECK(orc::z_flow_signed(t, f_ij, gamma) ==
          doctest::Approx(orc::z_flow_signed(t, f_ji, gamma)).epsilon(1e-12));
  }
}
