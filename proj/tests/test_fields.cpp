#include <doctest.h>

#include <drc/fields.hpp>
#include <drc/oracle.hpp>

#include <cmath>
#include <map>

using namespace drc;
namespace orc = drc::oracle;

namespace {

double tv_int_law(const std::map<int, double>& a, const std::map<int, double>& b) {
  double d = 0;
  for (auto& [k, p] : a) {
    auto it = b.find(k);
    d += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (auto& [k, p] : b)
    if (!a.count(k)) d += p;
  return d / 2;
}

}  // namespace

TEST_CASE("reference form: roads exactly 1/2, unit divergence at whites") {
  Domain dom = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  for (double x : {0.3, orc::critical_x()}) {
    CurrentSampler s = CurrentSampler::make(dom.map, std::vector<double>(dom.map.num_edges(), x));
    auto f0 = reference_form(s.cg, s.km, s.kinv);
    for (int e = 0; e < s.cg.map.num_edges(); ++e)
      if (s.cg.kind[e] == CityGraph::Road) CHECK(f0[e] == 0.5);
    for (int v = 0; v < s.cg.map.num_vertices(); ++v) {
      double div = 0;
      for (int h : s.cg.map.outgoing(v)) div += f0[s.cg.map.halves[h].edge];
      CHECK(div == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("quadrangle street reference values on the one-edge graph at x_c") {
  auto tg = orc::corpus()[0];
  PlanarMap g = build_planar_map(tg.pos, tg.edges);
  CurrentSampler s = CurrentSampler::make(g, {orc::critical_x()});
  auto f0 = reference_form(s.cg, s.km, s.kinv);
  for (int e = 0; e < 4; ++e) CHECK(f0[e] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("heights: integer/half-integer structure and spin identities per sample") {
  Domain dom = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  CurrentSampler s =
      CurrentSampler::make(dom.map, std::vector<double>(dom.map.num_edges(), orc::critical_x()));
  auto rng = stream_for(31, 0);
  const PlanarMap& g = dom.map;
  for (int it = 0; it < 3000; ++it) {
    DimerCover m = s.sample_cover(rng);
    HeightField hf = height_from_dimer(s.cg, m);  // throws on any inconsistency
    CHECK(hf.twice_u[g.outer_face] == 0);
    CoupledSpins sp = spins_from_height(g, hf);
    CHECK(sp.tau_dagger[g.outer_face] == 1);
    // H(u) - H(v) = tau_dagger(u) tau(v) / 2 for incident pairs
    for (auto& c : corners(g)) {
      int u = c.face, v = c.vertex;
      int diff = hf.twice_u[u] - hf.twice_v[v];
      CHECK(std::abs(diff) == 1);
      CHECK(diff == sp.tau_dagger[u] * sp.tau[v]);
    }
  }
}

TEST_CASE("all-roads cover has flat heights on faces of G") {
  Domain dom = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  CurrentSampler s =
      CurrentSampler::make(dom.map, std::vector<double>(dom.map.num_edges(), orc::critical_x()));
  DimerCover m;
  m.partner_of.assign(s.cg.map.num_vertices(), -1);
  for (int e = 0; e < s.cg.map.num_edges(); ++e)
    if (s.cg.kind[e] == CityGraph::Road) m.edges.push_back(e);
  REQUIRE(static_cast<int>(2 * m.edges.size()) == s.cg.map.num_vertices());
  HeightField hf = height_from_dimer(s.cg, m);
  for (int u = 0; u < dom.map.num_faces(); ++u) CHECK(hf.twice_u[u] == 0);
  for (int v = 0; v < dom.map.num_vertices(); ++v) CHECK(std::abs(hf.twice_v[v]) == 1);
}

TEST_CASE("heights are centered (MC, 3 sigma)") {
  Domain dom = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  CurrentSampler s =
      CurrentSampler::make(dom.map, std::vector<double>(dom.map.num_edges(), orc::critical_x()));
  auto rng = stream_for(32, 0);
  int n = 100000;
  std::vector<double> sum(dom.map.num_faces(), 0), sumsq(dom.map.num_faces(), 0);
  for (int i = 0; i < n; ++i) {
    HeightField hf = height_from_dimer(s.cg, s.sample_cover(rng));
    for (int u = 0; u < dom.map.num_faces(); ++u) {
      sum[u] += hf.twice_u[u] / 2.0;
      sumsq[u] += hf.twice_u[u] * hf.twice_u[u] / 4.0;
    }
  }
  for (int u = 0; u < dom.map.num_faces(); ++u) {
    if (dom.map.faces[u].outer) continue;
    double mean = sum[u] / n;
    double var = sumsq[u] / n - mean * mean;
    CHECK(std::abs(mean) <= 3 * std::sqrt(var / n) + 1e-12);
  }
}

TEST_CASE("nesting field hand cases") {
  // 2x2-vertex domain: all-odd primal trace = one cluster, one odd hole
  Domain dom = build_square_domain({DomainShape::Rectangle, 1, 1}, 1.0);
  const PlanarMap& g = dom.map;
  CurrentTrace tr;
  tr.g = &g;
  tr.primal.assign(g.num_edges(), ClassOdd);
  tr.dual.assign(g.num_edges(), ClassZero);
  ClusterData cd = primal_clusters(g, tr.primal);
  CHECK(cd.count == 1);
  auto odd = odd_around_faces(g, tr.primal, cd);
  for (int u = 0; u < g.num_faces(); ++u)
    CHECK(odd[u][0] == (g.faces[u].outer ? 0 : 1));
  NestingField nf = nesting_field_free(g, tr.primal, cd, {+1});
  for (int u = 0; u < g.num_faces(); ++u)
    CHECK(nf.twice[u] == (g.faces[u].outer ? 0 : 2));

  // no clusters
  CurrentTrace empty;
  empty.g = &g;
  empty.primal.assign(g.num_edges(), ClassZero);
  ClusterData cd0 = primal_clusters(g, empty.primal);
  CHECK(cd0.count == 0);
  NestingField nf0 = nesting_field_free(g, empty.primal, cd0, {});
  for (int u = 0; u < g.num_faces(); ++u) CHECK(nf0.twice[u] == 0);

  // wired with no dual clusters: constant ghost term +-1/2
  auto rng = stream_for(33, 0);
  NestingField nw = nesting_field_wired(g, empty.primal, dual_clusters(g, empty.primal), {}, &rng);
  for (int v = 0; v < g.num_vertices(); ++v) CHECK(std::abs(nw.twice[v]) == 1);
}

TEST_CASE("isolated even edge: one cluster, no odd-around faces") {
  Domain dom = build_square_domain({DomainShape::Rectangle, 1, 1}, 0.5);
  const PlanarMap& g = dom.map;
  CurrentTrace tr;
  tr.g = &g;
  tr.primal.assign(g.num_edges(), ClassZero);
  tr.primal[0] = ClassEven;
  ClusterData cd = primal_clusters(g, tr.primal);
  CHECK(cd.count == 1);
  auto odd = odd_around_faces(g, tr.primal, cd);
  for (int u = 0; u < g.num_faces(); ++u) CHECK(odd[u][0] == 0);
}

TEST_CASE("labels from spins are iid coin flips given the trace") {
  // samples with exactly two clusters: the four sign pairs are uniform
  Domain dom = build_square_domain({DomainShape::Rectangle, 1.5, 1}, 0.5);  // 4x3 grid
  const PlanarMap& g = dom.map;
  CurrentSampler s = CurrentSampler::make(g, std::vector<double>(g.num_edges(), orc::critical_x()));
  auto rng = stream_for(34, 0);
  std::map<std::pair<int, int>, int> counts;
  int total = 0;
  for (int i = 0; i < 60000 && total < 8000; ++i) {
    DimerCover m = s.sample_cover(rng);
    CurrentTrace tr = cg_to_coupled_currents(s.cg, m, rng);
    ClusterData cd = primal_clusters(g, tr.primal);
    if (cd.count != 2) continue;
    HeightField hf = height_from_dimer(s.cg, m);
    CoupledSpins sp = spins_from_height(g, hf);
    auto eps = labels_from_spins(g, tr, cd, sp);
    counts[{eps[0], eps[1]}]++;
    ++total;
  }
  REQUIRE(total >= 4000);
  double chi2 = 0;
  for (int a : {-1, 1})
    for (int b : {-1, 1}) {
      double obs = counts[{a, b}];
      double exp = total / 4.0;
      chi2 += (obs - exp) * (obs - exp) / exp;
    }
  CHECK(chi2 < 16.27);  // 3 dof, p = 0.001
}

TEST_CASE("height vs nesting crosscheck on the 2x2-vertex domain") {
  Domain dom = build_square_domain({DomainShape::Rectangle, 1, 1}, 1.0);
  const PlanarMap& g = dom.map;
  CurrentSampler s = CurrentSampler::make(g, std::vector<double>(g.num_edges(), orc::critical_x()));
  int inner = -1;
  for (int u = 0; u < g.num_faces(); ++u)
    if (!g.faces[u].outer) inner = u;
  auto rng1 = stream_for(35, 0), rng2 = stream_for(36, 0);
  int n = 100000;
  std::map<int, double> law_h, law_nest, law_hv, law_nw;
  for (int i = 0; i < n; ++i) {
    DimerCover m = s.sample_cover(rng1);
    HeightField hf = height_from_dimer(s.cg, m);
    law_h[hf.twice_u[inner]] += 1.0 / n;
    law_hv[hf.twice_v[0]] += 1.0 / n;

    CurrentTrace tr = s.sample_trace(rng2);
    ClusterData cd = primal_clusters(g, tr.primal);
    auto eps = iid_labels(cd.count, rng2);
    NestingField nf = nesting_field_free(g, tr.primal, cd, eps);
    law_nest[nf.twice[inner]] += 1.0 / n;
    ClusterData dcd = dual_clusters(g, tr.dual);
    auto deps = iid_labels(dcd.count, rng2);
    NestingField nw = nesting_field_wired(g, tr.dual, dcd, deps, &rng2);
    law_nw[nw.twice[0]] += 1.0 / n;
  }
  CHECK(tv_int_law(law_h, law_nest) <= 0.02);
  CHECK(tv_int_law(law_hv, law_nw) <= 0.02);
}

TEST_CASE("one-edge graph: both height and nesting laws are trivially zero") {
  auto tg = orc::corpus()[0];
  PlanarMap g = build_planar_map(tg.pos, tg.edges);
  // no bounded face: the nesting field vanishes identically on u0, and the
  // dimer height on U is the empty statement; verify via the cluster side
  CurrentSampler s = CurrentSampler::make(g, {orc::critical_x()});
  auto rng = stream_for(37, 0);
  for (int i = 0; i < 200; ++i) {
    CurrentTrace tr = s.sample_trace(rng);
    ClusterData cd = primal_clusters(g, tr.primal);
    auto eps = iid_labels(cd.count, rng);
    NestingField nf = nesting_field_free(g, tr.primal, cd, eps);
    CHECK(nf.twice[g.outer_face] == 0);
  }
}
