#include <doctest.h>

#include <drc/loops.hpp>
#include <drc/oracle.hpp>

#include <numbers>

using namespace drc;
namespace orc = drc::oracle;

namespace {

Loop circle_loop(Vec2 c, double r, int n = 96) {
  Loop l;
  for (int k = 0; k < n; ++k) {
    double a = 2 * std::numbers::pi * k / n;
    l.points.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
  }
  l.area = signed_area(l.points);
  return l;
}

}  // namespace

TEST_CASE("single odd square: outer 8-step loop and one odd hole") {
  Domain dom = build_square_domain({DomainShape::Rectangle, 1.5, 1.5}, 0.5);  // 4x4 grid
  const PlanarMap& g = dom.map;
  // find the unit square around the center and mark its 4 edges odd
  std::vector<std::uint8_t> cls(g.num_edges(), ClassZero);
  int marked = 0;
  for (int e = 0; e < g.num_edges(); ++e) {
    auto [h, t] = g.edge_halves(e);
    Vec2 a = g.pos[g.halves[h].origin], b = g.pos[g.halves[t].origin];
    auto near = [](double u, double v) { return std::abs(u - v) < 1e-9; };
    auto onsq = [&](Vec2 p) {
      return (near(p.x, 0.5) || near(p.x, 1.0)) && (near(p.y, 0.5) || near(p.y, 1.0));
    };
    if (onsq(a) && onsq(b)) {
      cls[e] = ClassOdd;
      ++marked;
    }
  }
  REQUIRE(marked == 4);
  ClusterData cd = primal_clusters(g, cls);
  REQUIRE(cd.count == 1);
  LoopFamily fam = extract_loops(g, cls, cd);
  REQUIRE(fam.loops.size() == 2);
  const Loop* outer = nullptr;
  const Loop* hole = nullptr;
  for (auto& l : fam.loops) (l.is_outer ? outer : hole) = &l;
  REQUIRE(outer != nullptr);
  REQUIRE(hole != nullptr);
  CHECK(outer->points.size() == 16);  // 8 crossings + 8 dual vertices
  CHECK(hole->points.size() == 4);
  CHECK(hole->hole_odd);
  CHECK(std::abs(outer->area) > std::abs(hole->area));
  // nesting: the hole sits inside the outer boundary
  for (size_t i = 0; i < fam.loops.size(); ++i)
    if (!fam.loops[i].is_outer) CHECK(fam.parent[i] >= 0);
}

TEST_CASE("isolated even edge: one cluster, no holes, encircling boundary") {
  Domain dom = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  const PlanarMap& g = dom.map;
  std::vector<std::uint8_t> cls(g.num_edges(), ClassZero);
  cls[0] = ClassEven;
  ClusterData cd = primal_clusters(g, cls);
  LoopFamily fam = extract_loops(g, cls, cd);
  REQUIRE(fam.loops.size() == 1);
  CHECK(fam.loops[0].is_outer);
  auto [h, t] = g.edge_halves(0);
  Vec2 mid = (g.pos[g.halves[h].origin] + g.pos[g.halves[t].origin]) * 0.5;
  CHECK(point_in_polygon(fam.loops[0].points, mid));
}

TEST_CASE("empty trace yields no loops") {
  Domain dom = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  std::vector<std::uint8_t> cls(dom.map.num_edges(), ClassZero);
  ClusterData cd = primal_clusters(dom.map, cls);
  CHECK(cd.count == 0);
  LoopFamily fam = extract_loops(dom.map, cls, cd);
  CHECK(fam.loops.empty());
}

TEST_CASE("loop metric axioms") {
  LoopFamily f1;
  f1.loops.push_back(circle_loop({0, 0}, 1.0));
  f1.loops.push_back(circle_loop({3, 0}, 0.5));
  std::vector<double> grid;
  for (double e = 0.0; e <= 2.0; e += 0.05) grid.push_back(e);
  CHECK(loop_metric(f1, f1, grid) == 0.0);

  LoopFamily f2 = f1;
  for (auto& p : f2.loops[0].points) p.x += 0.5;  // translate the big loop
  double d12 = loop_metric(f1, f2, grid);
  double d21 = loop_metric(f2, f1, grid);
  CHECK(d12 == d21);
  CHECK(d12 == doctest::Approx(0.5).epsilon(0.11));
}

TEST_CASE("translate distance equals the shift") {
  Loop a = circle_loop({0, 0}, 1.0);
  for (double t : {0.1, 0.3, 0.7}) {
    Loop b = a;
    for (auto& p : b.points) p.x += t;
    CHECK(loop_distance(a, b) == doctest::Approx(t).epsilon(0.05));
  }
}

TEST_CASE("matching equals brute force on small random families") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    LoopFamily f1, f2;
    int n1 = 1 + static_cast<int>(uniform01(rng) * 4);
    int n2 = 1 + static_cast<int>(uniform01(rng) * 4);
    for (int i = 0; i < n1; ++i)
      f1.loops.push_back(circle_loop({uniform01(rng) * 4, uniform01(rng) * 4},
                                     0.3 + uniform01(rng)));
    for (int i = 0; i < n2; ++i)
      f2.loops.push_back(circle_loop({uniform01(rng) * 4, uniform01(rng) * 4},
                                     0.3 + uniform01(rng)));
    double eps = 0.4 + uniform01(rng);
    bool fast = families_match_at(f1, f2, eps);
    // brute force: try all injections both ways
    auto brute = [&](const LoopFamily& fa, const LoopFamily& fb) {
      std::vector<int> big_a, big_b;
      for (size_t i = 0; i < fa.loops.size(); ++i)
        if (fa.loops[i].diameter() > eps) big_a.push_back(static_cast<int>(i));
      for (size_t i = 0; i < fb.loops.size(); ++i)
        if (fb.loops[i].diameter() > eps) big_b.push_back(static_cast<int>(i));
      if (big_a.size() > big_b.size()) return false;
      std::vector<int> perm(big_b.size());
      for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
      std::sort(perm.begin(), perm.end());
      do {
        bool ok = true;
        for (size_t i = 0; i < big_a.size() && ok; ++i)
          ok = loop_distance(fa.loops[big_a[i]], fb.loops[big_b[perm[i]]]) <= eps;
        if (ok) return true;
      } while (std::next_permutation(perm.begin(), perm.end()));
      return big_a.empty();
    };
    CHECK(fast == (brute(f1, f2) && brute(f2, f1)));
  }
}

TEST_CASE("conformal radius of circles and squares") {
  auto rng = stream_for(51, 0);
  Loop unit = circle_loop({0, 0}, 1.0);
  ConformalRadius r1 = conformal_radius(unit, {0, 0}, rng, 400);
  CHECK(std::abs(std::log(r1.radius)) < 3 * r1.stderr_log + 0.03);

  Loop two = circle_loop({0, 0}, 2.0);
  ConformalRadius r2 = conformal_radius(two, {0, 0}, rng, 400);
  CHECK(r2.radius == doctest::Approx(2.0).epsilon(0.1));

  // square [-1,1]^2: radius invariant under 90 degree rotation (symmetry)
  Loop sq;
  sq.points = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  ConformalRadius rs1 = conformal_radius(sq, {0, 0}, rng, 1500);
  Loop sq2;
  for (auto& p : sq.points) sq2.points.push_back({-p.y, p.x});
  ConformalRadius rs2 = conformal_radius(sq2, {0, 0}, rng, 1500);
  double sigma = std::hypot(rs1.stderr_log, rs2.stderr_log);
  CHECK(std::abs(std::log(rs1.radius) - std::log(rs2.radius)) < 2 * sigma + 0.02);
  CHECK_THROWS(conformal_radius(sq, {5, 5}, rng, 10));
}
