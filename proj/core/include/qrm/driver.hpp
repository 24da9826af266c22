#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrm/edgefem.hpp"
#include "qrm/formulations.hpp"
#include "qrm/linalg.hpp"
#include "qrm/mesh.hpp"
#include "qrm/synth.hpp"

namespace qrm {

/// A mesh, its boundary partition and every assembled matrix.
struct Discretization {
  Mesh mesh;
  BoundaryPartition partition;
  AssembledForms forms;
};

Discretization discretize(Mesh mesh, BoundaryPartition partition, double k, const KappaField& kappa,
                          KappaRule rule = KappaRule::Centroid);

/// Relative errors against a reference DOF vector (NaN when there is no
/// reference or the region is empty) and absolute L2 norms of the solution.
struct ErrorMetrics {
  double err_l2_omega = 0.0;
  double err_gamma0 = 0.0;
  double err_gamma1 = 0.0;
  double err_gammai = 0.0;
  double norm_e = 0.0;  ///< ||E||_{0,Omega}
  double norm_f = 0.0;  ///< ||F||_{0,Omega}
};

ErrorMetrics compute_metrics(const AssembledForms& forms, std::span<const Complex> e,
                             std::span<const Complex> f, std::span<const Complex> reference);

struct QrSolution {
  std::vector<Complex> e;
  std::vector<Complex> f;
  QrParams params;
  ErrorMetrics metrics;
  linalg::SolveReport report;
  double wall_ms = 0.0;
};

/// Builds the mixed system for `params`, solves it and unpacks E and F.
QrSolution solve_system(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params);

/// Full pipeline for one parameter set. `reference` may be empty.
QrSolution solve_once(const Discretization& disc, const CauchyData& data, const QrParams& params,
                      std::span<const Complex> reference);

BoundaryLoads loads_for(const AssembledForms& forms, const CauchyData& data);

// --------------------------------------------------------------------------
// Sweeps

/// n geometric points from hi down to lo (n = 1 gives {hi}).
std::vector<double> geometric_grid(double lo, double hi, std::size_t n);
std::vector<double> default_delta_grid();

using Solver = std::function<QrSolution(const QrParams&)>;

struct SweepPoint {
  QrParams params;
  ErrorMetrics metrics;
  double wall_ms = 0.0;
  bool ok = false;
  std::string error;
};

struct SweepRecord {
  std::vector<SweepPoint> points;
  /// Index of the smallest finite value of `key` among successful points.
  std::optional<std::size_t> argmin(const std::function<double(const ErrorMetrics&)>& key) const;
  std::optional<std::size_t> argmin_l2() const;
};

/// Solves for every delta of `grid` with the other parameters from `base`.
/// When `nu_follows_delta` is set, RRQR points use nu = delta. Points run on
/// up to `jobs` threads; results stay in grid order and failures are kept
/// per point.
SweepRecord sweep_delta(const Solver& solver, const QrParams& base, std::span<const double> grid,
                        bool nu_follows_delta = true, unsigned jobs = 1);

// --------------------------------------------------------------------------
// Relaxation weight

/// eta = ||G||_W / ||f||_{0,Gamma0} with G the W-Riesz representative of
/// the g load on M. Throws InvalidArgument when either norm vanishes.
double auto_eta(const AssembledForms& forms, const CauchyData& data);

// --------------------------------------------------------------------------
// Extension / restriction

/// Ring problem embedded in a disc that contains the ring triangulation.
struct ExtensionProblem {
  NestedMeshes meshes;
  Discretization ring;
  Discretization disc;
};

/// The disc's gamma0 is the image of the ring's; kappa on the disc is the
/// supplied extension (constant continuation by default at the call site).
ExtensionProblem make_extension(NestedMeshes meshes, const BoundaryPartition& ring_partition, double k,
                                const KappaField& ring_kappa, const KappaField& disc_kappa);

/// Same data expressed on the disc's edges.
CauchyData map_to_disc(const ExtensionProblem& problem, const CauchyData& ring_data);

/// Ring DOFs of a disc DOF vector.
std::vector<Complex> restrict_to_ring(const ExtensionProblem& problem, std::span<const Complex> disc_dofs);

/// Solves on the disc and restricts E and F to the ring; metrics use the
/// ring's forms, so gammai errors are available.
QrSolution extension_restriction(const ExtensionProblem& problem, const CauchyData& ring_data,
                                 const QrParams& params, std::span<const Complex> ring_reference);

// --------------------------------------------------------------------------
// L-curve

struct LCurvePoint {
  double delta = 0.0;
  double norm_f = 0.0;
  double norm_e = 0.0;
};

struct LCurveResult {
  std::vector<LCurvePoint> curve;  ///< sorted by decreasing delta
  std::vector<double> angles;      ///< vertex angle in degrees, NaN at the ends
  std::optional<std::size_t> corner;
  bool degenerate = true;
  double corner_delta() const { return corner ? curve[*corner].delta : 0.0; }
};

/// Triangle method on (log ||F||, log ||E||). Every interior point lying on
/// the lower-left side of the chord between the end points is a candidate;
/// the corner is the one with the sharpest angle, ties toward larger delta.
/// No candidate (or an angle no sharper than `flat_degrees`) means the
/// curve is degenerate.
LCurveResult l_curve(std::vector<LCurvePoint> points, double flat_degrees = 179.0);

// --------------------------------------------------------------------------
// Tikhonov functional

/// J(v) = 1/2 ||A v - G||_R^2 + eta^2/2 ||gamma v - f||_Gamma0^2
///      + delta/2 ||v||_N^2 + nu/2 ||gamma v||_{Gamma1 u Gammai}^2,
/// where R is the F-norm of the variant, restricted to M, and N the E-norm
/// without the penalty part. The QR functional has no eta or nu terms.
class TikhonovFunctional {
 public:
  TikhonovFunctional(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params);
  double operator()(std::span<const Complex> v) const;

 private:
  const AssembledForms& forms_;
  const BoundaryLoads& loads_;
  QrParams params_;
  std::vector<std::size_t> f_free_;
  linalg::SparseLu riesz_;
  linalg::SparseMatrix regular_;  ///< delta-weighted norm plus nu trace terms
};

struct TikhonovCheck {
  double j_value = 0.0;
  double max_relative = 0.0;       ///< max |J'(v)d| / (sqrt(2 J(v)) ||d||_Q)
  std::vector<double> derivatives; ///< raw central differences per direction
  std::vector<double> relative;
};

/// Random complex directions (zero on gamma0 for QR) from `seed`, central
/// differences scaled so each step moves ||.||_Q by `step` * sqrt(2 J).
TikhonovCheck tikhonov_gradient_check(const AssembledForms& forms, const BoundaryLoads& loads,
                                      const QrParams& params, std::span<const Complex> v,
                                      std::size_t n_directions, std::uint64_t seed,
                                      double step = 1e-5);

}  // namespace qrm
