#include <doctest.h>

#include <drc/rewrites.hpp>
#include <drc/oracle.hpp>

#include <cmath>

using namespace drc;
namespace orc = drc::oracle;

namespace {

// square with unit pendants at all four corners (the renewal test bed)
RotMap pendant_square(double x1, double x2, double x3, double x4) {
  RotMap m;
  // corners: colors alternate; attachments opposite colors
  int a = m.add_vertex(false), b = m.add_vertex(true), c = m.add_vertex(false),
      d = m.add_vertex(true);
  int pa = m.add_vertex(true), pb = m.add_vertex(false), pc = m.add_vertex(true),
      pd = m.add_vertex(false);
  m.add_edge(a, b, x1);   // darts 0,1
  m.add_edge(b, c, x2);   // 2,3
  m.add_edge(c, d, x3);   // 4,5
  m.add_edge(d, a, x4);   // 6,7
  m.add_edge(a, pa, 1.0);  // 8,9
  m.add_edge(b, pb, 1.0);  // 10,11
  m.add_edge(c, pc, 1.0);  // 12,13
  m.add_edge(d, pd, 1.0);  // 14,15
  // explicit ccw rotations for the square drawn a(SW) b(SE) c(NE) d(NW)
  m.rot[a] = {0, 7, 8};
  m.rot[b] = {2, 1, 10};
  m.rot[c] = {12, 4, 3};
  m.rot[d] = {5, 14, 6};
  return m;
}

}  // namespace

TEST_CASE("urban renewal: constants and weights on the pendant square") {
  for (auto [x1, x2, x3, x4] : {std::array<double, 4>{1, 1, 1, 1},
                                std::array<double, 4>{0.7, 0.3, 0.7, 0.3},
                                std::array<double, 4>{0.2, 0.9, 0.5, 0.4}}) {
    RotMap m = pendant_square(x1, x2, x3, x4);
    double z_old = m.enum_z();
    // quad face: the face of dart 0 with length 4 (either side of edge 0)
    int qd = m.face_of(0).size() == 4 ? 0 : 1;
    REQUIRE(m.face_of(qd).size() == 4);
    double c = urban_renewal(m, qd);
    CHECK(c == doctest::Approx(x1 * x3 + x2 * x4).epsilon(1e-12));
    double z_new = m.enum_z();
    CHECK(z_old == doctest::Approx(c * z_new).epsilon(1e-12));
    // all-ones square: renewed weights are 1/2
    if (x1 == 1 && x2 == 1 && x3 == 1 && x4 == 1)
      for (size_t e = 0; e < m.weight.size(); ++e)
        if (m.edge_alive[e]) CHECK(m.weight[e] == doctest::Approx(0.5).epsilon(1e-12));
  }
  // x1 = x3 = a, x2 = x4 = b: renewed opposite weights a/(a^2+b^2)
  RotMap m = pendant_square(0.6, 0.25, 0.6, 0.25);
  int qd = m.face_of(0).size() == 4 ? 0 : 1;
  urban_renewal(m, qd);
  int count = 0;
  for (size_t e = 0; e < m.weight.size(); ++e)
    if (m.edge_alive[e] &&
        std::abs(m.weight[e] - 0.6 / (0.36 + 0.0625)) < 1e-12)
      ++count;
  CHECK(count == 2);
}

TEST_CASE("urban renewal with sign flips keeps the same constant") {
  RotMap m = pendant_square(-0.7, 0.3, -0.7, 0.3);
  int qd = m.face_of(0).size() == 4 ? 0 : 1;
  double c = urban_renewal(m, qd);
  CHECK(c == doctest::Approx((-0.7) * (-0.7) + 0.3 * 0.3).epsilon(1e-12));
}

TEST_CASE("vertex split preserves the partition function and round-trips") {
  RotMap m = pendant_square(0.5, 0.8, 0.3, 0.9);
  double z = m.enum_z();
  vertex_split(m, 0, 0, 1);
  CHECK(m.enum_z() == doctest::Approx(z).epsilon(1e-12));
  // bipartite structure stays proper
  for (size_t e = 0; e < m.weight.size(); ++e) {
    if (!m.edge_alive[e]) continue;
    CHECK(m.black[m.dart_vertex[2 * e]] != m.black[m.dart_vertex[2 * e + 1]]);
  }
  // collapse the inserted unit path again
  double lc = 0.0;
  while (contract_one_series(m, lc)) {
  }
  CHECK(std::abs(lc) < 1e-12);
  CHECK(m.enum_z() == doctest::Approx(z).epsilon(1e-12));
  CHECK(m.num_vertices_alive() == 8);
}

TEST_CASE("gd to cg transcript: partition functions and weights match") {
  for (const char* name : {"edge1", "path2", "triangle"}) {
    orc::TestGraph tg;
    for (auto& c : orc::corpus())
      if (c.name == name) tg = c;
    PlanarMap g = build_planar_map(tg.pos, tg.edges);
    for (double x : {0.4, orc::critical_x()}) {
      TripledDigraph t = build_vec_g(g, std::vector<double>(g.num_edges(), x));
      DecoratedGraph gd = build_gd(t);
      GdToCgResult res = gd_to_cg(gd);
      INFO(name, " x=", x, " renewals=", res.renewals, " splits=", res.splits);
      CHECK(res.renewals == g.num_edges());
      // Z_gd = (prod C_i) * Z_final
      std::vector<double> wgd;
      std::vector<std::pair<int, int>> egd;
      for (size_t e = 0; e < gd.edges.size(); ++e) {
        egd.push_back(gd.edges[e]);
        wgd.push_back(gd.weight[e]);
      }
      double z_gd = orc::enum_dimer_covers(gd.n, egd, wgd).z;
      double z_fin = res.map.enum_z();
      CHECK(z_gd == doctest::Approx(std::exp(res.log_constant) * z_fin).epsilon(1e-10));
      // target: the city graph; at degree-one vertices the transcript keeps
      // the road closing the wrap-around sector, which build_cg omits
      CityGraph cg = build_cg(g, std::vector<double>(g.num_edges(), x));
      int wrap_roads = 0;
      for (int v = 0; v < g.num_vertices(); ++v)
        if (g.degree(v) == 1) ++wrap_roads;
      CHECK(res.map.num_vertices_alive() == cg.map.num_vertices());
      CHECK(res.map.num_edges_alive() == cg.map.num_edges() + wrap_roads);
      std::vector<double> wa, wb;
      for (size_t e = 0; e < res.map.weight.size(); ++e)
        if (res.map.edge_alive[e]) wa.push_back(res.map.weight[e]);
      for (int e = 0; e < cg.map.num_edges(); ++e) wb.push_back(cg.map.edges[e].weight);
      for (int k = 0; k < wrap_roads; ++k) wb.push_back(1.0);
      std::sort(wa.begin(), wa.end());
      std::sort(wb.begin(), wb.end());
      REQUIRE(wa.size() == wb.size());
      for (size_t i = 0; i < wa.size(); ++i) CHECK(wa[i] == doctest::Approx(wb[i]).epsilon(1e-9));
      if (wrap_roads == 0) {
        std::vector<double> wcg;
        std::vector<std::pair<int, int>> ecg;
        for (int e = 0; e < cg.map.num_edges(); ++e) {
          auto [h, tt] = cg.map.edge_halves(e);
          ecg.push_back({cg.map.halves[h].origin, cg.map.halves[tt].origin});
          wcg.push_back(cg.map.edges[e].weight);
        }
        double z_cg = orc::enum_dimer_covers(cg.map.num_vertices(), ecg, wcg).z;
        CHECK(z_fin == doctest::Approx(z_cg).epsilon(1e-9));
      }
    }
  }
}
