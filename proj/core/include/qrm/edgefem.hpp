#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

#include "qrm/linalg.hpp"
#include "qrm/mesh.hpp"

namespace qrm {

// Lowest-order Nedelec elements on triangles. One complex DOF per global
// edge: the tangential moment int_e u.t_e ds along the low->high direction.

enum class DofClass { Interior, Gamma0, Gamma1, Gammai };

class DofMap {
 public:
  DofMap() = default;
  DofMap(const Mesh& mesh, const BoundaryPartition& partition);

  std::size_t size() const { return cls_.size(); }
  DofClass cls(std::size_t e) const { return cls_[e]; }
  /// Ascending edge indices of one class.
  std::vector<std::size_t> of_class(DofClass c) const;
  /// Ascending edge indices not in any of the listed classes.
  std::vector<std::size_t> excluding(std::initializer_list<DofClass> classes) const;
  std::size_t count(DofClass c) const;

 private:
  std::vector<DofClass> cls_;
};

using Vec2c = std::array<Complex, 2>;

/// Complex vector field with its scalar curl d1 u2 - d2 u1.
struct FieldFunction {
  std::function<Vec2c(Point)> value;
  std::function<Complex(Point)> curl;
};

using KappaField = std::function<Complex(Point)>;

/// Local 3x3 blocks in the counter-clockwise reference orientation (local
/// edge k runs from vertex (k+1)%3 to (k+2)%3). Multiply by the triangle's
/// edge signs to get the global contribution.
struct ElementMatrices {
  using Block = std::array<std::array<double, 3>, 3>;
  Block mass{};
  Block curl_curl{};
  Block kappa_re{};
  Block kappa_im{};
};

/// Exact integration for an affine triangle with constant kappa. Throws
/// InvalidArgument on a degenerate or clockwise triangle.
ElementMatrices element_matrices(const std::array<Point, 3>& p, Complex kappa);

/// Values of the three local reference basis functions and their (constant)
/// curls at a point given in barycentric coordinates.
struct LocalBasis {
  std::array<std::array<double, 2>, 3> value{};
  std::array<double, 3> curl{};
};
LocalBasis local_basis(const std::array<Point, 3>& p, const std::array<double, 3>& lambda);

enum class KappaRule {
  Centroid,  ///< kappa frozen at the element centroid
  Gauss3,    ///< three edge-midpoint samples, exact for constant kappa
};

/// Every real matrix needed by the three formulations. B_* are the
/// boundary tangential masses int (u.t)(v.t) ds over the named parts.
struct AssembledForms {
  DofMap dofs;
  double k = 1.0;
  linalg::SparseMatrix mass;
  linalg::SparseMatrix curl_curl;
  linalg::SparseMatrix kappa_re;
  linalg::SparseMatrix kappa_im;
  linalg::SparseMatrix b_gamma0;
  linalg::SparseMatrix b_gamma1;
  linalg::SparseMatrix b_gammai;
  std::vector<double> edge_length;
  std::vector<int> trace_sign;  ///< t_e . t on boundary edges, 0 inside

  std::size_t size() const { return dofs.size(); }
  /// Real and imaginary parts of A = K - k^2 M_kappa.
  linalg::SparseMatrix a_re() const;
  linalg::SparseMatrix a_im() const;
  /// M + K.
  linalg::SparseMatrix hcurl() const;
  /// M + K + B_Gamma0.
  linalg::SparseMatrix v_norm() const;
  /// B_Gamma1 + B_Gammai.
  linalg::SparseMatrix b_inaccessible() const;
  /// Complex A x.
  std::vector<Complex> apply_a(std::span<const Complex> x) const;
};

AssembledForms assemble(const Mesh& mesh, const BoundaryPartition& partition, double k,
                        const KappaField& kappa, KappaRule rule = KappaRule::Centroid);

/// DOF_e = int_e field.t_e ds by two-point Gauss.
std::vector<Complex> interpolate(const FieldFunction& field, const Mesh& mesh);
std::vector<Complex> interpolate(const std::function<Vec2c(Point)>& field, const Mesh& mesh);

/// Per-edge boundary data on Gamma0, in boundary-tangent convention:
/// f_e = int_e E.t ds, g_e = mean of curl E over e.
struct BoundaryLoads {
  std::vector<Complex> lifted;  ///< DOF values t_e.t * f_e on Gamma0 edges, 0 elsewhere
  std::vector<Complex> b_f;     ///< int_Gamma0 f (phi.t) ds
  std::vector<Complex> b_g;     ///< <curl E x n, psi> = -int_Gamma0 g (psi.t) ds
};

/// `edges` must be a subset of Gamma0. Throws InvalidArgument otherwise.
BoundaryLoads boundary_trace_terms(const AssembledForms& forms, std::span<const int> edges,
                                   std::span<const Complex> f, std::span<const Complex> g);

/// Quadrature on the boundary edges of `edges`: sum |f_e|^2 / |e|.
double boundary_l2_norm_sq(const AssembledForms& forms, std::span<const int> edges,
                           std::span<const Complex> f);

/// L2 and curl errors of the discrete field against an analytic one,
/// integrated with a degree-5 rule per triangle.
struct FieldError {
  double l2 = 0.0;
  double curl = 0.0;
  double ref_l2 = 0.0;
  double ref_curl = 0.0;
  double hcurl() const { return std::sqrt(l2 * l2 + curl * curl); }
  double ref_hcurl() const { return std::sqrt(ref_l2 * ref_l2 + ref_curl * ref_curl); }
};
FieldError field_error(const Mesh& mesh, std::span<const Complex> dofs, const FieldFunction& field);

/// "row col value" lines, 0-based, %.17g.
void write_coo(std::ostream& out, const linalg::SparseMatrix& a);

}  // namespace qrm
