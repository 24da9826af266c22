#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "doctest.h"
#include "qrm/error.hpp"
#include "qrm/mesh.hpp"

using namespace qrm;

namespace {

constexpr double kPi = std::numbers::pi;

void check_invariants(const Mesh& m, std::size_t loops) {
  for (std::size_t t = 0; t < m.num_triangles(); ++t) REQUIRE(m.triangle_area(t) > 0.0);
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    REQUIRE(m.edges()[e].v[0] < m.edges()[e].v[1]);
    REQUIRE((m.edge_valence(e) == 1 || m.edge_valence(e) == 2));
  }
  // Each triangle references its edges with the low->high sign convention.
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      const Edge& e = m.edges()[m.triangle_edges(t)[k]];
      REQUIRE(std::min(a, b) == e.v[0]);
      REQUIRE(std::max(a, b) == e.v[1]);
      REQUIRE(m.triangle_edge_signs(t)[k] == (a < b ? 1 : -1));
    }
  }
  REQUIRE(m.boundary_loops().size() == loops);
  std::size_t in_loops = 0;
  for (const auto& l : m.boundary_loops()) in_loops += l.size();
  REQUIRE(in_loops == m.boundary_edges().size());
  REQUIRE(std::isfinite(m.h()));
  REQUIRE(m.h() > 0.0);
}

long euler(const Mesh& m) {
  return static_cast<long>(m.num_vertices()) - static_cast<long>(m.num_edges()) +
         static_cast<long>(m.num_triangles());
}

double fraction(const Mesh& m, const std::vector<int>& edges) {
  double outer = 0.0;
  for (int e : m.boundary_loops().front()) outer += m.edge_length(e);
  return total_length(m, edges) / outer;
}

}  // namespace

TEST_CASE("disc generation: invariants and Euler characteristic") {
  const Mesh coarse = generate_disc(1.0, 0.5);
  check_invariants(coarse, 1);
  CHECK(coarse.num_triangles() >= 8);

  const Mesh m = generate_disc(1.0, 0.1);
  check_invariants(m, 1);
  CHECK(euler(m) == 1);
}

TEST_CASE("disc and ring sizes are comparable to the reference meshes") {
  const Mesh disc = generate_disc(1.0, 2.26e-2);
  CHECK(std::abs(double(disc.num_triangles()) / 43256.0 - 1.0) <= 0.2);
  CHECK(std::abs(double(disc.num_edges()) / 65134.0 - 1.0) <= 0.2);

  const Mesh ring = generate_ring(0.75, 1.0, 2.05e-2);
  check_invariants(ring, 2);
  CHECK(std::abs(double(ring.num_triangles()) / 17919.0 - 1.0) <= 0.2);
  CHECK(std::abs(double(ring.num_edges()) / 27316.0 - 1.0) <= 0.2);
}

TEST_CASE("actual h is within a factor two of the target") {
  for (double h : {0.5, 0.2, 0.1, 0.05}) {
    const Mesh m = generate_disc(1.0, h);
    CHECK(m.h() <= 2.0 * h);
    CHECK(m.h() >= 0.5 * h);
    const Mesh r = generate_ring(0.5, 1.0, h / 2);
    CHECK(r.h() <= h);
    CHECK(r.h() >= 0.25 * h);
  }
}

TEST_CASE("perimeter approximates 2 pi r to second order") {
  for (double h : {0.2, 0.1, 0.05}) {
    const Mesh m = generate_disc(1.0, h);
    const double err = 2.0 * kPi - m.boundary_length();
    CHECK(err > 0.0);  // inscribed polygon
    CHECK(err <= m.h() * m.h());
  }
  const Mesh r = generate_ring(0.5, 1.0, 0.1);
  CHECK(std::abs(r.boundary_length() - 3.0 * kPi) <= 2.0 * r.h() * r.h());
}

TEST_CASE("ring generation: two loops, Euler characteristic zero") {
  const Mesh m = generate_ring(0.5, 1.0, 0.4);
  check_invariants(m, 2);
  CHECK(euler(m) == 0);
  CHECK_THROWS_AS(generate_ring(1.0, 1.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(generate_ring(1.0, 0.5, 0.1), InvalidArgument);
  CHECK_THROWS_AS(generate_disc(-1.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(generate_disc(1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(generate_disc(1.0, 2.0), InvalidArgument);
}

TEST_CASE("generation is deterministic") {
  const Mesh a = generate_ring(0.75, 1.0, 0.1);
  const Mesh b = generate_ring(0.75, 1.0, 0.1);
  REQUIRE(a.num_vertices() == b.num_vertices());
  for (std::size_t i = 0; i < a.num_vertices(); ++i) {
    CHECK(a.vertices()[i].x == b.vertices()[i].x);
    CHECK(a.vertices()[i].y == b.vertices()[i].y);
  }
  CHECK(a.triangles() == b.triangles());
}

TEST_CASE("outward normals and trace signs") {
  const Mesh m = generate_ring(0.5, 1.0, 0.2);
  for (int e : m.boundary_edges()) {
    const Point mid = m.edge_midpoint(e);
    const Point n = m.outward_normal(e);
    const double r = std::hypot(mid.x, mid.y);
    const double radial = (n.x * mid.x + n.y * mid.y) / r;
    // Outer loop: normal points away from the origin; inner loop: toward it.
    if (r > 0.75) {
      CHECK(radial > 0.9);
    } else {
      CHECK(radial < -0.9);
    }
    const Point a = m.vertices()[m.edges()[e].v[0]];
    const Point b = m.vertices()[m.edges()[e].v[1]];
    const double len = m.edge_length(e);
    const double te_dot_t = ((b.x - a.x) * n.y - (b.y - a.y) * n.x) / len;
    CHECK(m.trace_sign(e) == (te_dot_t > 0 ? 1 : -1));
  }
}

TEST_CASE("partition G34 covers three quarters of the disc boundary") {
  const Mesh m = generate_disc(1.0, 0.1);
  const auto p = partition_boundary(m, PartitionSpec::g34());
  const double tol = m.h() / m.boundary_length();
  CHECK(std::abs(fraction(m, p.gamma0) - 0.75) <= tol);
  CHECK(p.gammai.empty());
  CHECK(p.gamma0.size() + p.gamma1.size() == m.boundary_edges().size());
}

TEST_CASE("partition GE37 fraction follows n * length / perimeter") {
  const Mesh m = generate_disc(1.0, 0.02);
  const auto p = partition_boundary(m, PartitionSpec::ge37());
  const double expected = 37.0 * (kPi / 25.0) / (2.0 * kPi);
  // Each electrode can gain or lose up to one edge at its two ends.
  const double tol = 37.0 * m.h() / m.boundary_length();
  CHECK(std::abs(fraction(m, p.gamma0) - expected) <= tol);
  CHECK_THROWS_AS(partition_boundary(m, PartitionSpec::ge37(60, 0.2)), InvalidArgument);
}

TEST_CASE("partition fractions converge as h decreases") {
  // Each electrode end snaps to an edge midpoint, so the error is O(h).
  for (double h : {0.1, 0.05, 0.025}) {
    const Mesh m = generate_disc(1.0, h);
    const auto p = partition_boundary(m, PartitionSpec::ge37(5, 0.3));
    const double err = std::abs(fraction(m, p.gamma0) - 5 * 0.3 / (2 * kPi));
    CHECK(err <= 5.0 * m.h() / m.boundary_length());
  }
}

TEST_CASE("partition GExt and the inner loop") {
  const Mesh ring = generate_ring(0.75, 1.0, 0.1);
  const auto p = partition_boundary(ring, PartitionSpec::gext());
  CHECK(p.gamma1.empty());
  const auto& loops = ring.boundary_loops();
  const std::size_t inner_size = std::min(loops[0].size(), loops[1].size());
  CHECK(p.gammai.size() == inner_size);
  for (int e : p.gammai) {
    const Point mid = ring.edge_midpoint(e);
    CHECK(std::hypot(mid.x, mid.y) < 0.8);
  }
  const auto g34 = partition_boundary(ring, PartitionSpec::g34());
  CHECK(g34.gammai == p.gammai);
  CHECK_THROWS_AS(partition_boundary(generate_disc(1.0, 0.2), PartitionSpec::gext()), InvalidArgument);
}

TEST_CASE("interval partitions wrap around 2 pi") {
  const Mesh m = generate_disc(1.0, 0.05);
  const auto g34 = partition_boundary(m, PartitionSpec::g34());
  const auto wrap = partition_boundary(m, PartitionSpec::from_intervals({{1.5 * kPi, 2.0 * kPi + 0.5}}));
  const double f = fraction(m, wrap.gamma0);
  CHECK(std::abs(f - (0.5 * kPi + 0.5) / (2 * kPi)) <= m.h() / m.boundary_length());
  const std::set<int> a(g34.gamma0.begin(), g34.gamma0.end());
  std::size_t overlap = 0;
  for (int e : wrap.gamma0) overlap += a.count(e);
  CHECK(overlap > 0);
  CHECK_THROWS_AS(partition_boundary(m, PartitionSpec::from_intervals({})), InvalidArgument);
  CHECK_THROWS_AS(partition_boundary(m, PartitionSpec::from_intervals({{1.0, 0.5}})), InvalidArgument);
}

TEST_CASE("validate_partition rejects broken partitions") {
  const Mesh m = generate_disc(1.0, 0.3);
  auto p = partition_boundary(m, PartitionSpec::g34());
  auto missing = p;
  missing.gamma1.pop_back();
  CHECK_THROWS_AS(validate_partition(m, missing), InvalidArgument);
  auto twice = p;
  twice.gamma1.push_back(p.gamma0.front());
  CHECK_THROWS_AS(validate_partition(m, twice), InvalidArgument);
  auto empty = p;
  empty.gamma1.insert(empty.gamma1.end(), empty.gamma0.begin(), empty.gamma0.end());
  empty.gamma0.clear();
  CHECK_THROWS_AS(validate_partition(m, empty), InvalidArgument);
  CHECK(partition_kind_from_string(to_string(PartitionSpec::Kind::GE37)) == PartitionSpec::Kind::GE37);
  CHECK_THROWS_AS(partition_kind_from_string("G99"), InvalidArgument);
}

TEST_CASE("mesh file round trip") {
  const Mesh m = generate_ring(0.5, 1.0, 0.2);
  std::stringstream ss;
  write_mesh(ss, m, "generated\nfor a test");
  const auto r = read_mesh(ss);
  CHECK(r.warnings.empty());
  REQUIRE(r.mesh.num_vertices() == m.num_vertices());
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    CHECK(r.mesh.vertices()[i].x == m.vertices()[i].x);
    CHECK(r.mesh.vertices()[i].y == m.vertices()[i].y);
  }
  CHECK(r.mesh.triangles() == m.triangles());
  REQUIRE(r.mesh.num_edges() == m.num_edges());
  for (std::size_t e = 0; e < m.num_edges(); ++e) CHECK(r.mesh.edges()[e].v == m.edges()[e].v);
}

TEST_CASE("mesh file validation") {
  const std::string good = "# a square\n4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n";
  {
    std::istringstream in(good);
    CHECK(read_mesh(in).mesh.num_edges() == 5);
  }
  {
    std::istringstream in("4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 4\n");
    CHECK_THROWS_AS(read_mesh(in), FormatError);
  }
  {
    std::istringstream in("4 x\n");
    CHECK_THROWS_AS(read_mesh(in), FormatError);
  }
  {
    std::istringstream in("4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n");
    CHECK_THROWS_AS(read_mesh(in), FormatError);
  }
  {
    std::istringstream in("3 1\n0 0\n1 0\n2 0\n0 1 2\n");
    CHECK_THROWS_AS(read_mesh(in), FormatError);
  }
  const std::string clockwise = "4 2\n0 0\n1 0\n1 1\n0 1\n0 2 1\n0 2 3\n";
  {
    std::istringstream in(clockwise);
    CHECK_THROWS_AS(read_mesh(in), FormatError);
  }
  {
    std::istringstream in(clockwise);
    const auto r = read_mesh(in, {.strict = false});
    CHECK(r.warnings.size() == 1);
    CHECK(r.mesh.triangle_area(0) > 0.0);
  }
}

TEST_CASE("nested meshes embed the ring with matching edges") {
  const auto n = generate_nested(0.75, 1.0, 0.1);
  check_invariants(n.disc, 1);
  check_invariants(n.ring, 2);
  CHECK(euler(n.disc) == 1);
  REQUIRE(n.ring_to_disc_edge.size() == n.ring.num_edges());
  for (std::size_t e = 0; e < n.ring.num_edges(); ++e) {
    const Edge& re = n.ring.edges()[e];
    const Edge& de = n.disc.edges()[n.ring_to_disc_edge[e]];
    for (int k = 0; k < 2; ++k) {
      const Point a = n.ring.vertices()[re.v[k]];
      const Point b = n.disc.vertices()[de.v[k]];
      CHECK(a.x == b.x);
      CHECK(a.y == b.y);
    }
  }
  const Mesh standalone = generate_ring(0.75, 1.0, 0.1);
  CHECK(standalone.num_triangles() == n.ring.num_triangles());
}
