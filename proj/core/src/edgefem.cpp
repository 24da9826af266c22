#include "qrm/edgefem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "qrm/error.hpp"

namespace qrm {

using linalg::SparseMatrix;
using linalg::Triplet;

namespace {

// Two-point Gauss on [0, 1].
constexpr double kGauss2[2] = {0.21132486540518711775, 0.78867513459481288225};

struct Gradients {
  std::array<std::array<double, 2>, 3> g{};
  double area = 0.0;
};

Gradients barycentric_gradients(const std::array<Point, 3>& p) {
  const double area2 = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[1].y - p[0].y) * (p[2].x - p[0].x);
  if (!(area2 > 0.0)) throw InvalidArgument("element: degenerate or clockwise triangle");
  Gradients out;
  out.area = 0.5 * area2;
  for (int i = 0; i < 3; ++i) {
    const Point& a = p[(i + 1) % 3];
    const Point& b = p[(i + 2) % 3];
    out.g[i] = {(a.y - b.y) / area2, (b.x - a.x) / area2};
  }
  return out;
}

double dot(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return a[0] * b[0] + a[1] * b[1];
}

// Triangle rule of degree 5 (7 points), barycentric coordinates and weights
// normalized to sum 1.
struct QuadPoint {
  std::array<double, 3> lambda;
  double weight;
};

std::array<QuadPoint, 7> degree5_rule() {
  const double s15 = std::sqrt(15.0);
  const double a1 = (6.0 - s15) / 21.0;
  const double b1 = (9.0 + 2.0 * s15) / 21.0;
  const double w1 = (155.0 - s15) / 1200.0;
  const double a2 = (6.0 + s15) / 21.0;
  const double b2 = (9.0 - 2.0 * s15) / 21.0;
  const double w2 = (155.0 + s15) / 1200.0;
  return {{{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 0.225},
           {{a1, a1, b1}, w1},
           {{a1, b1, a1}, w1},
           {{b1, a1, a1}, w1},
           {{a2, a2, b2}, w2},
           {{a2, b2, a2}, w2},
           {{b2, a2, a2}, w2}}};
}

Point barycentric_point(const std::array<Point, 3>& p, const std::array<double, 3>& l) {
  return {l[0] * p[0].x + l[1] * p[1].x + l[2] * p[2].x, l[0] * p[0].y + l[1] * p[1].y + l[2] * p[2].y};
}

void scatter(std::vector<Triplet>& out, const std::array<int, 3>& edges, const std::array<int, 3>& signs,
             const ElementMatrices::Block& block) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double v = signs[i] * signs[j] * block[i][j];
      if (v != 0.0) out.push_back({static_cast<std::size_t>(edges[i]), static_cast<std::size_t>(edges[j]), v});
    }
  }
}

SparseMatrix boundary_mass(const Mesh& mesh, const std::vector<int>& edges) {
  // Along a boundary edge only that edge's basis function has a tangential
  // component, and it is the constant 1/|e|; the block is diagonal.
  std::vector<Triplet> t;
  t.reserve(edges.size());
  for (int e : edges) t.push_back({static_cast<std::size_t>(e), static_cast<std::size_t>(e), 1.0 / mesh.edge_length(e)});
  return SparseMatrix::from_triplets(mesh.num_edges(), mesh.num_edges(), std::move(t));
}

}  // namespace

// ---------------------------------------------------------------------------

DofMap::DofMap(const Mesh& mesh, const BoundaryPartition& partition) {
  validate_partition(mesh, partition);
  cls_.assign(mesh.num_edges(), DofClass::Interior);
  for (int e : partition.gamma0) cls_[e] = DofClass::Gamma0;
  for (int e : partition.gamma1) cls_[e] = DofClass::Gamma1;
  for (int e : partition.gammai) cls_[e] = DofClass::Gammai;
}

std::vector<std::size_t> DofMap::of_class(DofClass c) const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < cls_.size(); ++e) {
    if (cls_[e] == c) out.push_back(e);
  }
  return out;
}

std::vector<std::size_t> DofMap::excluding(std::initializer_list<DofClass> classes) const {
  std::vector<std::size_t> out;
  for (std::size_t e = 0; e < cls_.size(); ++e) {
    if (std::find(classes.begin(), classes.end(), cls_[e]) == classes.end()) out.push_back(e);
  }
  return out;
}

std::size_t DofMap::count(DofClass c) const {
  return static_cast<std::size_t>(std::count(cls_.begin(), cls_.end(), c));
}

// ---------------------------------------------------------------------------

ElementMatrices element_matrices(const std::array<Point, 3>& p, Complex kappa) {
  const Gradients grad = barycentric_gradients(p);
  const double area = grad.area;
  ElementMatrices out;

  // int lambda_i lambda_j = area (1 + delta_ij) / 12.
  auto m = [area](int i, int j) { return area * (i == j ? 2.0 : 1.0) / 12.0; };
  auto g = [&grad](int i, int j) { return dot(grad.g[i], grad.g[j]); };

  for (int i = 0; i < 3; ++i) {
    const int a = (i + 1) % 3;
    const int b = (i + 2) % 3;
    for (int j = i; j < 3; ++j) {
      const int c = (j + 1) % 3;
      const int d = (j + 2) % 3;
      const double mij = m(a, c) * g(b, d) - m(a, d) * g(b, c) - m(b, c) * g(a, d) + m(b, d) * g(a, c);
      // In reference orientation curl N = 2 grad(l_a) x grad(l_b) = 1/area.
      const double kij = 1.0 / area;
      out.mass[i][j] = out.mass[j][i] = mij;
      out.curl_curl[i][j] = out.curl_curl[j][i] = kij;
      out.kappa_re[i][j] = out.kappa_re[j][i] = kappa.real() * mij;
      out.kappa_im[i][j] = out.kappa_im[j][i] = kappa.imag() * mij;
    }
  }
  return out;
}

LocalBasis local_basis(const std::array<Point, 3>& p, const std::array<double, 3>& lambda) {
  const Gradients grad = barycentric_gradients(p);
  LocalBasis out;
  for (int k = 0; k < 3; ++k) {
    const int a = (k + 1) % 3;
    const int b = (k + 2) % 3;
    for (int c = 0; c < 2; ++c) out.value[k][c] = lambda[a] * grad.g[b][c] - lambda[b] * grad.g[a][c];
    out.curl[k] = 2.0 * (grad.g[a][0] * grad.g[b][1] - grad.g[a][1] * grad.g[b][0]);
  }
  return out;
}

// ---------------------------------------------------------------------------

SparseMatrix AssembledForms::a_re() const { return linalg::combine(1.0, curl_curl, -k * k, kappa_re); }
SparseMatrix AssembledForms::a_im() const { return linalg::combine(0.0, curl_curl, -k * k, kappa_im); }
SparseMatrix AssembledForms::hcurl() const { return linalg::combine(1.0, mass, 1.0, curl_curl); }
SparseMatrix AssembledForms::v_norm() const { return linalg::combine(1.0, hcurl(), 1.0, b_gamma0); }
SparseMatrix AssembledForms::b_inaccessible() const { return linalg::combine(1.0, b_gamma1, 1.0, b_gammai); }

std::vector<Complex> AssembledForms::apply_a(std::span<const Complex> x) const {
  std::vector<Complex> kx = curl_curl.multiply(x);
  const std::vector<Complex> rx = kappa_re.multiply(x);
  const std::vector<Complex> ix = kappa_im.multiply(x);
  const Complex i(0.0, 1.0);
  for (std::size_t r = 0; r < kx.size(); ++r) kx[r] -= k * k * (rx[r] + i * ix[r]);
  return kx;
}

AssembledForms assemble(const Mesh& mesh, const BoundaryPartition& partition, double k,
                        const KappaField& kappa, KappaRule rule) {
  if (!kappa) throw InvalidArgument("assemble: kappa field is empty");
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("assemble: wavenumber must be positive");

  AssembledForms forms;
  forms.dofs = DofMap(mesh, partition);
  forms.k = k;
  const std::size_t n = mesh.num_edges();

  std::vector<Triplet> tm, tk, tr, ti;
  tm.reserve(9 * mesh.num_triangles());
  tk.reserve(9 * mesh.num_triangles());
  tr.reserve(9 * mesh.num_triangles());
  ti.reserve(9 * mesh.num_triangles());

  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto p = mesh.triangle_points(t);
    const auto& edges = mesh.triangle_edges(t);
    const auto& signs = mesh.triangle_edge_signs(t);
    ElementMatrices em;
    if (rule == KappaRule::Centroid) {
      em = element_matrices(p, kappa(barycentric_point(p, {1.0 / 3, 1.0 / 3, 1.0 / 3})));
    } else {
      em = element_matrices(p, Complex(0.0, 0.0));
      const double area = mesh.triangle_area(t);
      // Edge-midpoint rule, exact for quadratics: reproduces M exactly for constant kappa.
      for (int q = 0; q < 3; ++q) {
        std::array<double, 3> l{0.5, 0.5, 0.5};
        l[q] = 0.0;
        const Complex kq = kappa(barycentric_point(p, l));
        const LocalBasis basis = local_basis(p, l);
        for (int i = 0; i < 3; ++i) {
          for (int j = i; j < 3; ++j) {
            const double v = area / 3.0 * dot(basis.value[i], basis.value[j]);
            em.kappa_re[i][j] += kq.real() * v;
            em.kappa_im[i][j] += kq.imag() * v;
            if (j != i) {
              em.kappa_re[j][i] = em.kappa_re[i][j];
              em.kappa_im[j][i] = em.kappa_im[i][j];
            }
          }
        }
      }
    }
    scatter(tm, edges, signs, em.mass);
    scatter(tk, edges, signs, em.curl_curl);
    scatter(tr, edges, signs, em.kappa_re);
    scatter(ti, edges, signs, em.kappa_im);
  }

  forms.mass = SparseMatrix::from_triplets(n, n, std::move(tm));
  forms.curl_curl = SparseMatrix::from_triplets(n, n, std::move(tk));
  forms.kappa_re = SparseMatrix::from_triplets(n, n, std::move(tr));
  forms.kappa_im = SparseMatrix::from_triplets(n, n, std::move(ti));
  forms.b_gamma0 = boundary_mass(mesh, partition.gamma0);
  forms.b_gamma1 = boundary_mass(mesh, partition.gamma1);
  forms.b_gammai = boundary_mass(mesh, partition.gammai);

  forms.edge_length.resize(n);
  forms.trace_sign.assign(n, 0);
  for (std::size_t e = 0; e < n; ++e) forms.edge_length[e] = mesh.edge_length(e);
  for (int e : mesh.boundary_edges()) forms.trace_sign[e] = mesh.trace_sign(e);
  return forms;
}

// ---------------------------------------------------------------------------

std::vector<Complex> interpolate(const std::function<Vec2c(Point)>& field, const Mesh& mesh) {
  std::vector<Complex> out(mesh.num_edges());
  for (std::size_t e = 0; e < mesh.num_edges(); ++e) {
    const Point a = mesh.vertices()[mesh.edges()[e].v[0]];
    const Point b = mesh.vertices()[mesh.edges()[e].v[1]];
    const Point d = b - a;  // |d| * t_e, so the ds weight is absorbed
    Complex s = 0.0;
    for (double xi : kGauss2) {
      const Vec2c u = field(a + xi * d);
      s += 0.5 * (u[0] * d.x + u[1] * d.y);
    }
    out[e] = s;
  }
  return out;
}

std::vector<Complex> interpolate(const FieldFunction& field, const Mesh& mesh) {
  return interpolate(field.value, mesh);
}

BoundaryLoads boundary_trace_terms(const AssembledForms& forms, std::span<const int> edges,
                                   std::span<const Complex> f, std::span<const Complex> g) {
  if (f.size() != edges.size() || g.size() != edges.size()) {
    throw InvalidArgument("boundary_trace_terms: data length does not match edge list");
  }
  const std::size_t n = forms.size();
  BoundaryLoads out{std::vector<Complex>(n), std::vector<Complex>(n), std::vector<Complex>(n)};
  std::vector<char> seen(n, 0);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const int e = edges[i];
    if (e < 0 || static_cast<std::size_t>(e) >= n || forms.dofs.cls(e) != DofClass::Gamma0) {
      throw InvalidArgument("boundary_trace_terms: data on edge " + std::to_string(e) +
                            " which is not in gamma0");
    }
    if (seen[e]++) throw InvalidArgument("boundary_trace_terms: duplicate edge " + std::to_string(e));
    // On e the global basis function has tangential trace sign/|e|. The
    // load pairs curl E x n with psi, i.e. it uses the counter-clockwise
    // tangent -t: l(psi) = -int g (psi.t) ds.
    const double s = forms.trace_sign[e];
    out.lifted[e] = s * f[i];
    out.b_f[e] = s * f[i] / forms.edge_length[e];
    out.b_g[e] = -s * g[i];
  }
  return out;
}

double boundary_l2_norm_sq(const AssembledForms& forms, std::span<const int> edges,
                           std::span<const Complex> f) {
  if (f.size() != edges.size()) throw InvalidArgument("boundary_l2_norm_sq: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) s += std::norm(f[i]) / forms.edge_length[edges[i]];
  return s;
}

FieldError field_error(const Mesh& mesh, std::span<const Complex> dofs, const FieldFunction& field) {
  if (dofs.size() != mesh.num_edges()) throw InvalidArgument("field_error: DOF vector length mismatch");
  const auto rule = degree5_rule();
  double e_l2 = 0.0, e_curl = 0.0, r_l2 = 0.0, r_curl = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto p = mesh.triangle_points(t);
    const auto& edges = mesh.triangle_edges(t);
    const auto& signs = mesh.triangle_edge_signs(t);
    const double area = mesh.triangle_area(t);
    for (const auto& q : rule) {
      const LocalBasis basis = local_basis(p, q.lambda);
      Vec2c uh{0.0, 0.0};
      Complex curl_h = 0.0;
      for (int k = 0; k < 3; ++k) {
        const Complex c = static_cast<double>(signs[k]) * dofs[edges[k]];
        uh[0] += c * basis.value[k][0];
        uh[1] += c * basis.value[k][1];
        curl_h += c * basis.curl[k];
      }
      const Point x = barycentric_point(p, q.lambda);
      const Vec2c u = field.value(x);
      const Complex cu = field.curl(x);
      const double w = q.weight * area;
      e_l2 += w * (std::norm(u[0] - uh[0]) + std::norm(u[1] - uh[1]));
      e_curl += w * std::norm(cu - curl_h);
      r_l2 += w * (std::norm(u[0]) + std::norm(u[1]));
      r_curl += w * std::norm(cu);
    }
  }
  return {std::sqrt(e_l2), std::sqrt(e_curl), std::sqrt(r_l2), std::sqrt(r_curl)};
}

void write_coo(std::ostream& out, const SparseMatrix& a) {
  char buf[96];
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      std::snprintf(buf, sizeof buf, "%zu %zu %.17g\n", r, a.col_idx()[k], a.values()[k]);
      out << buf;
    }
  }
}

}  // namespace qrm
