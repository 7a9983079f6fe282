#include <doctest.h>

#include <drc/planar_map.hpp>

#include <numbers>
#include <set>

using namespace drc;

TEST_CASE("rectangle 1x1 at delta 1/2: 3x3 vertices, 4 bounded faces") {
  Domain d = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  CHECK(d.map.num_vertices() == 9);
  CHECK(d.map.num_edges() == 12);
  CHECK(d.map.num_faces() == 5);  // 4 bounded + outer
  CHECK(d.map.euler_ok());
}

TEST_CASE("rectangle 1x1 at delta 1/4: 5x5 vertices, 16 bounded faces") {
  Domain d = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.25);
  CHECK(d.map.num_vertices() == 25);
  CHECK(d.map.num_faces() - 1 == 16);
}

TEST_CASE("disk radius 1 at delta 1/2: strict interior keeps 9 points, 4 faces") {
  DomainShape s;
  s.kind = DomainShape::Disk;
  s.radius = 1.0;
  Domain d = build_square_domain(s, 0.5);
  CHECK(d.map.num_vertices() == 9);
  CHECK(d.map.num_faces() - 1 == 4);
}

TEST_CASE("twin involution and face partition") {
  Domain d = build_square_domain({DomainShape::Rectangle, 1, 1}, 1.0 / 3);
  const auto& m = d.map;
  int total = 0;
  for (int h = 0; h < static_cast<int>(m.halves.size()); ++h) {
    CHECK(m.halves[m.halves[h].twin].twin == h);
    CHECK(m.halves[m.halves[h].next].prev == h);
  }
  for (int f = 0; f < m.num_faces(); ++f) total += static_cast<int>(m.face_cycle(f).size());
  CHECK(total == static_cast<int>(m.halves.size()));
}

TEST_CASE("dual of a single-face grid") {
  Domain d = build_square_domain({DomainShape::Rectangle, 1, 1}, 1.0);  // 2x2 vertices, 1 face
  DualMap full = dual_graph(d.map, DualMode::Full);
  CHECK(full.map.num_vertices() == 2);
  CHECK(full.map.num_edges() == 4);  // four parallel dual edges
  CHECK(full.map.euler_ok());
}

TEST_CASE("weak dual of 3x3 grid is a 2x2 pattern") {
  Domain d = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  DualMap weak = dual_graph(d.map, DualMode::Weak);
  CHECK(weak.map.num_vertices() == 4);
  CHECK(weak.map.num_edges() == 4);
}

TEST_CASE("full dual of full dual has the original counts") {
  Domain d = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  DualMap d1 = dual_graph(d.map, DualMode::Full);
  DualMap d2 = dual_graph(d1.map, DualMode::Full);
  CHECK(d2.map.num_edges() == d.map.num_edges());
  CHECK(d2.map.num_vertices() == d.map.num_vertices());
  CHECK(d2.map.num_faces() == d.map.num_faces());
}

TEST_CASE("wired augmentation: ghost joined to the whole boundary") {
  Domain d3 = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);  // 3x3
  PlanarMap gp = augment_wired(d3);
  CHECK(gp.num_vertices() == 10);
  CHECK(gp.num_edges() == 12 + 8);
  CHECK(gp.euler_ok());
  CHECK(gp.degree(9) == 8);

  Domain d2 = build_square_domain({DomainShape::Rectangle, 1, 1}, 1.0);  // 2x2
  PlanarMap gp2 = augment_wired(d2);
  CHECK(gp2.num_vertices() == 5);
  CHECK(gp2.num_edges() == 8);
  CHECK(gp2.degree(4) == static_cast<int>(d2.boundary.size()));
}

TEST_CASE("corners: counts and angle sums") {
  Domain d = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  auto cs = corners(d.map);
  int ndeg = 0;
  for (int v = 0; v < d.map.num_vertices(); ++v) ndeg += d.map.degree(v);
  CHECK(static_cast<int>(cs.size()) == ndeg);

  // angles around every vertex sum to 2*pi
  std::vector<double> sum(d.map.num_vertices(), 0.0);
  for (auto& c : cs) sum[c.vertex] += sector_angle(d.map, c.half);
  for (double s : sum) CHECK(s == doctest::Approx(2 * std::numbers::pi));

  // interior sectors of a square lattice are right angles
  for (auto& c : cs)
    if (!d.map.faces[c.face].outer)
      CHECK(sector_angle(d.map, c.half) == doctest::Approx(std::numbers::pi / 2));

  // single bounded face has 4 corners
  Domain d1 = build_square_domain({DomainShape::Rectangle, 1, 1}, 1.0);
  auto cs1 = corners(d1.map);
  int inner = 0;
  for (auto& c : cs1)
    if (!d1.map.faces[c.face].outer) ++inner;
  CHECK(inner == 4);
}

TEST_CASE("eta branch: conj(eta)^2 recovers the direction") {
  for (double a : {0.1, 1.3, 3.1, -0.4, -2.9}) {
    Vec2 dir{std::cos(a), std::sin(a)};
    auto eta = eta_of_direction(dir);
    auto sq = std::conj(eta) * std::conj(eta);
    CHECK(std::abs(sq.real() - dir.x) < 1e-12);
    CHECK(std::abs(sq.imag() - dir.y) < 1e-12);
    CHECK(std::abs(std::abs(eta) - 1.0) < 1e-12);
  }
}

TEST_CASE("json round trip") {
  Domain d = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  auto j = to_json(d.map, d.delta);
  PlanarMap m2 = planar_map_from_json(j);
  CHECK(m2.num_vertices() == d.map.num_vertices());
  CHECK(m2.num_edges() == d.map.num_edges());
  CHECK(m2.num_faces() == d.map.num_faces());
}

TEST_CASE("degenerate shapes are rejected") {
  CHECK_THROWS(build_square_domain({DomainShape::Rectangle, 0.4, 0.4}, 0.5));
  DomainShape s;
  s.kind = DomainShape::Disk;
  s.radius = 0.9;
  CHECK_THROWS(build_square_domain(s, 0.5));
}
