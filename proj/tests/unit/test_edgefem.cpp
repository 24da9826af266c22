#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "qrm/edgefem.hpp"
#include "qrm/error.hpp"
#include "qrm/synth.hpp"

using namespace qrm;
using namespace qrm::testing;

namespace {

// Test-side Nedelec basis: barycentric coordinates from the inverse of the
// affine map, basis N_k = l_a grad l_b - l_b grad l_a with a = k+1, b = k+2.
struct RefBasis {
  std::array<Point, 3> p;
  double inv[3][3];  // rows: coefficients (c, cx, cy) of lambda_i

  explicit RefBasis(std::array<Point, 3> pts) : p(pts) {
    // Solve [1 1 1; x0 x1 x2; y0 y1 y2]^-1 via cofactors.
    const double m[3][3] = {{1, 1, 1}, {p[0].x, p[1].x, p[2].x}, {p[0].y, p[1].y, p[2].y}};
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
        inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
      }
    }
  }
  double lambda(int i, double x, double y) const { return inv[i][0] + inv[i][1] * x + inv[i][2] * y; }
  std::array<double, 2> grad(int i) const { return {inv[i][1], inv[i][2]}; }
  std::array<double, 2> n(int k, double x, double y) const {
    const int a = (k + 1) % 3, b = (k + 2) % 3;
    const auto ga = grad(a), gb = grad(b);
    return {lambda(a, x, y) * gb[0] - lambda(b, x, y) * ga[0], lambda(a, x, y) * gb[1] - lambda(b, x, y) * ga[1]};
  }
  double area() const {
    return 0.5 * ((p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[1].y - p[0].y) * (p[2].x - p[0].x));
  }
  // Scalar curl by central differences (exact up to rounding for affine fields).
  double curl(int k) const {
    const double cx = (p[0].x + p[1].x + p[2].x) / 3, cy = (p[0].y + p[1].y + p[2].y) / 3, h = 1e-3;
    const double d1u2 = (n(k, cx + h, cy)[1] - n(k, cx - h, cy)[1]) / (2 * h);
    const double d2u1 = (n(k, cx, cy + h)[0] - n(k, cx, cy - h)[0]) / (2 * h);
    return d1u2 - d2u1;
  }
  // Mass by the edge-midpoint rule (exact for quadratics).
  double mass(int i, int j) const {
    double s = 0.0;
    for (int q = 0; q < 3; ++q) {
      const Point m = 0.5 * (p[(q + 1) % 3] + p[(q + 2) % 3]);
      const auto a = n(i, m.x, m.y), b = n(j, m.x, m.y);
      s += (a[0] * b[0] + a[1] * b[1]) * area() / 3.0;
    }
    return s;
  }
};

void check_element(const std::array<Point, 3>& p) {
  const RefBasis ref(p);
  const auto em = element_matrices(p, Complex(0.7, -0.2));
  const double scale = 1.0 / ref.area();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(em.mass[i][j] == doctest::Approx(ref.mass(i, j)).epsilon(1e-12).scale(1.0));
      CHECK(em.curl_curl[i][j] == doctest::Approx(ref.area() * ref.curl(i) * ref.curl(j)).epsilon(1e-8));
      CHECK(std::abs(em.curl_curl[i][j]) == doctest::Approx(scale).epsilon(1e-12));
      CHECK(em.kappa_re[i][j] == doctest::Approx(0.7 * em.mass[i][j]).epsilon(1e-14));
      CHECK(em.kappa_im[i][j] == doctest::Approx(-0.2 * em.mass[i][j]).epsilon(1e-14));
      CHECK(em.mass[i][j] == em.mass[j][i]);
    }
  }
}

}  // namespace

TEST_CASE("element matrices against an independent integration") {
  check_element({Point{0, 0}, Point{1, 0}, Point{0, 1}});
  check_element({Point{0.3, -0.2}, Point{1.7, 0.4}, Point{0.1, 1.1}});
  check_element({Point{-2.0, 0.0}, Point{-1.9, 0.05}, Point{-1.97, 0.2}});
}

TEST_CASE("unit right triangle: every curl-curl entry is 1/area") {
  const auto em = element_matrices({Point{0, 0}, Point{1, 0}, Point{0, 1}}, Complex(1.0, 0.0));
  for (const auto& row : em.curl_curl) {
    for (double v : row) CHECK(v == doctest::Approx(2.0));
  }
}

TEST_CASE("kappa = 0 gives zero weighted mass; degenerate triangles throw") {
  const auto em = element_matrices({Point{0, 0}, Point{1, 0}, Point{0.2, 0.9}}, Complex(0.0, 0.0));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(em.kappa_re[i][j] == 0.0);
      CHECK(em.kappa_im[i][j] == 0.0);
    }
  }
  CHECK_THROWS_AS(element_matrices({Point{0, 0}, Point{1, 0}, Point{2, 0}}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(element_matrices({Point{0, 0}, Point{0, 1}, Point{1, 0}}, 1.0), InvalidArgument);
}

TEST_CASE("local gradient interpolant lies in the kernel of K") {
  const std::array<Point, 3> p{Point{0.1, 0.2}, Point{1.3, 0.1}, Point{0.5, 0.9}};
  const auto em = element_matrices(p, 1.0);
  for (int v = 0; v < 3; ++v) {
    // DOF of grad(lambda_v) on local edge k (from (k+1)%3 to (k+2)%3).
    std::array<double, 3> w{};
    for (int k = 0; k < 3; ++k) w[k] = ((k + 2) % 3 == v ? 1.0 : 0.0) - ((k + 1) % 3 == v ? 1.0 : 0.0);
    for (int i = 0; i < 3; ++i) {
      double s = 0.0;
      for (int j = 0; j < 3; ++j) s += em.curl_curl[i][j] * w[j];
      CHECK(std::abs(s) <= 1e-12 * std::abs(em.curl_curl[0][0]));
    }
  }
}

TEST_CASE("assembled matrices: symmetry, definiteness, determinism") {
  const Discretization d = disc_problem(0.2, PartitionSpec::g34());
  const auto& f = d.forms;
  CHECK(f.mass.is_symmetric());
  CHECK(f.curl_curl.is_symmetric());
  CHECK(f.b_gamma0.is_symmetric());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f.mass.at(i, i) > 0.0);

  std::mt19937_64 rng(17);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(f.size());
    for (auto& v : x) v = nd(rng);
    CHECK(linalg::quadratic_form(f.mass, x) > 0.0);
    CHECK(linalg::quadratic_form(f.curl_curl, x) >= 0.0);
    CHECK(linalg::quadratic_form(f.b_gamma0, x) >= 0.0);
  }

  const AssembledForms again = assemble(d.mesh, d.partition, 1.0, constant_kappa(kPaperKappa));
  CHECK(again.mass.values() == f.mass.values());
  CHECK(again.curl_curl.values() == f.curl_curl.values());
  CHECK(again.kappa_im.col_idx() == f.kappa_im.col_idx());
}

TEST_CASE("kappa = 1 + i gives M_kappa_re = M_kappa_im = M") {
  const Discretization d = disc_problem(0.3, PartitionSpec::g34());
  CHECK(d.forms.kappa_re.values() == d.forms.mass.values());
  CHECK(d.forms.kappa_im.values() == d.forms.mass.values());
  const AssembledForms g3 = assemble(d.mesh, d.partition, 1.0, constant_kappa(kPaperKappa), KappaRule::Gauss3);
  const auto diff = linalg::combine(1.0, g3.kappa_re, -1.0, d.forms.mass);
  CHECK(diff.max_abs() <= 1e-14 * d.forms.mass.max_abs());
}

TEST_CASE("discrete gradients of hat functions are in the kernel of K") {
  const Discretization d = disc_problem(0.15, PartitionSpec::g34());
  for (int v : {0, 5, static_cast<int>(d.mesh.num_vertices()) - 1}) {
    std::vector<double> g(d.mesh.num_edges(), 0.0);
    for (std::size_t e = 0; e < d.mesh.num_edges(); ++e) {
      const auto& ev = d.mesh.edges()[e].v;
      g[e] = (ev[1] == v ? 1.0 : 0.0) - (ev[0] == v ? 1.0 : 0.0);
    }
    const auto kg = d.forms.curl_curl.multiply(g);
    for (double x : kg) CHECK(std::abs(x) <= 1e-12 * d.forms.curl_curl.max_abs());
  }
}

TEST_CASE("interpolation: constants exact, gradients in the kernel") {
  const Mesh m = generate_disc(1.0, 0.2);
  const auto c = interpolate([](Point) { return Vec2c{1.0, 0.0}; }, m);
  for (std::size_t e = 0; e < m.num_edges(); ++e) {
    const Point a = m.vertices()[m.edges()[e].v[0]];
    const Point b = m.vertices()[m.edges()[e].v[1]];
    CHECK(c[e].real() == doctest::Approx(b.x - a.x).epsilon(1e-14).scale(1.0));
    CHECK(c[e].imag() == 0.0);
  }
  const auto part = partition_boundary(m, PartitionSpec::g34());
  const auto forms = assemble(m, part, 1.0, constant_kappa(1.0));
  const auto g = interpolate([](Point x) { return Vec2c{x.y, x.x}; }, m);
  const auto kg = forms.curl_curl.multiply(g);
  CHECK(norm(kg) <= 1e-12 * forms.curl_curl.max_abs() * norm(g));
}

TEST_CASE("interpolation error of the plane wave is first order in L2") {
  const PlaneWave w;
  std::vector<double> hs, errs;
  for (double h : {0.2, 0.1, 0.05}) {
    const Mesh m = generate_disc(1.0, h);
    const auto dofs = interpolate(w.field(), m);
    const auto err = field_error(m, dofs, w.field());
    hs.push_back(m.h());
    errs.push_back(err.l2 / err.ref_l2);
  }
  CHECK(fitted_rate(hs, errs) >= 0.9);
}

TEST_CASE("boundary trace loads") {
  const Discretization d = disc_problem(0.2, PartitionSpec::g34());
  const auto& g0 = d.partition.gamma0;
  std::vector<Complex> zero(g0.size(), 0.0);
  const auto z = boundary_trace_terms(d.forms, g0, zero, zero);
  CHECK(norm(z.b_g) == 0.0);
  CHECK(norm(z.b_f) == 0.0);

  // g = 1 on one edge: the load is the moment of the basis trace, +-1.
  const std::vector<int> one{g0[3]};
  const std::vector<Complex> unit{1.0};
  const auto l = boundary_trace_terms(d.forms, one, std::vector<Complex>{0.0}, unit);
  CHECK(std::abs(l.b_g[g0[3]]) == doctest::Approx(1.0));
  CHECK(norm(l.b_g) == doctest::Approx(1.0));

  const std::vector<int> bad{d.partition.gamma1.front()};
  CHECK_THROWS_AS(boundary_trace_terms(d.forms, bad, unit, unit), InvalidArgument);
  CHECK_THROWS_AS(boundary_trace_terms(d.forms, one, zero, unit), InvalidArgument);
}

TEST_CASE("b_f paired with the interpolant reproduces the squared trace norm") {
  const PlaneWave w;
  std::vector<double> hs, errs;
  for (double h : {0.2, 0.1, 0.05}) {
    const Discretization d = disc_problem(h, PartitionSpec::g34());
    const auto md = plane_wave_data(w, d.mesh, d.partition);
    const auto loads = loads_for(d.forms, md.data);
    Complex pairing = 0.0;
    for (std::size_t e = 0; e < d.forms.size(); ++e) pairing += std::conj(md.exact[e]) * loads.b_f[e];
    // Reference: 5-point Gauss of |E.t|^2 along each gamma0 edge.
    const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
    const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                          0.2369268850561891};
    double ref = 0.0;
    for (int e : d.partition.gamma0) {
      const Point a = d.mesh.vertices()[d.mesh.edges()[e].v[0]];
      const Point b = d.mesh.vertices()[d.mesh.edges()[e].v[1]];
      const double len = d.mesh.edge_length(e);
      const Point t = (1.0 / len) * (b - a);
      for (int q = 0; q < 5; ++q) {
        const auto u = w.value(a + (0.5 * (gx[q] + 1.0)) * (b - a));
        ref += 0.5 * gw[q] * len * std::norm(u[0] * t.x + u[1] * t.y);
      }
    }
    CHECK(std::abs(pairing.imag()) <= 1e-12 * ref);
    hs.push_back(d.mesh.h());
    errs.push_back(std::abs(pairing.real() - ref) / ref);
  }
  CHECK(errs.back() <= 2.0 * hs.back() * hs.back());
  CHECK(fitted_rate(hs, errs) >= 1.8);
}

TEST_CASE("direct problem converges in H(curl)") {
  const PlaneWave w;
  std::vector<double> hs, errs;
  for (double h : {0.4, 0.2, 0.1}) {
    const Discretization d = disc_problem(h, PartitionSpec::g34());
    const auto e = solve_direct_problem(d.forms, interpolate(w.field(), d.mesh));
    const auto err = field_error(d.mesh, e, w.field());
    hs.push_back(d.mesh.h());
    errs.push_back(err.hcurl() / err.ref_hcurl());
  }
  CHECK(fitted_rate(hs, errs) >= 0.9);
}

TEST_CASE("DofMap classification and COO export") {
  const Discretization d = ring_problem(0.5, 0.3, PartitionSpec::g34());
  const auto& dm = d.forms.dofs;
  CHECK(dm.size() == d.mesh.num_edges());
  CHECK(dm.count(DofClass::Gamma0) == d.partition.gamma0.size());
  CHECK(dm.count(DofClass::Gamma1) == d.partition.gamma1.size());
  CHECK(dm.count(DofClass::Gammai) == d.partition.gammai.size());
  CHECK(dm.count(DofClass::Interior) + d.mesh.boundary_edges().size() == dm.size());
  std::ostringstream out;
  write_coo(out, d.forms.b_gamma0);
  std::istringstream in(out.str());
  std::size_t r = 0, c = 0, lines = 0;
  double v = 0;
  while (in >> r >> c >> v) {
    CHECK(r == c);
    CHECK(v == d.forms.b_gamma0.at(r, c));
    ++lines;
  }
  CHECK(lines == d.partition.gamma0.size());
}
