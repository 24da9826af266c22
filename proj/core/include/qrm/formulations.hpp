#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qrm/edgefem.hpp"
#include "qrm/linalg.hpp"

namespace qrm {

enum class Variant { QR, RQR, RRQR };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);

/// Parameters of one quasi-reversibility solve. Unset nu means nu = delta;
/// unset nu_inner means the inner loop gets the same weight as gamma1.
struct QrParams {
  Variant variant = Variant::QR;
  double delta = 1e-6;
  double eta = 1.0;
  std::optional<double> nu;
  std::optional<double> nu_inner;

  double nu_outer_value() const { return nu.value_or(delta); }
  double nu_inner_value() const { return nu_inner.value_or(nu_outer_value()); }
  /// Throws InvalidArgument unless delta > 0, eta > 0 (relaxed variants)
  /// and nu > 0 (RRQR).
  void validate() const;
};

/// Real-split mixed system. Unknowns are ordered
/// [Re E | Im E | Re G | Im G] over the free E and F DOFs, G = conj(F).
///
/// Row blocks are the real and imaginary parts of
///   N_E E + conj(A) F = rhs_E   (test phi in the E space)
///   A E  - N_F F      = b_g     (test psi in M)
/// arranged so the symmetric part of the matrix is diag(N_E, N_E, N_F, N_F).
struct MixedSystem {
  Variant variant = Variant::QR;
  linalg::SparseMatrix matrix;
  std::vector<double> rhs;
  std::vector<std::size_t> e_free;  ///< global edges carrying a free E DOF
  std::vector<std::size_t> f_free;  ///< global edges carrying a free F DOF
  std::vector<Complex> e_fixed;     ///< full-length E with eliminated values, 0 on free DOFs

  std::size_t size() const { return matrix.rows(); }
  std::size_t ne() const { return e_free.size(); }
  std::size_t nf() const { return f_free.size(); }

  /// Full-length E and F from a solution vector.
  void unpack(std::span<const double> x, std::vector<Complex>& e, std::vector<Complex>& f) const;
  /// Inverse of unpack on the free DOFs (fixed values are ignored).
  std::vector<double> pack(std::span<const Complex> e, std::span<const Complex> f) const;
};

/// Full-length norm matrices of the two equations.
linalg::SparseMatrix e_norm_matrix(const AssembledForms& forms, const QrParams& params);
linalg::SparseMatrix f_norm_matrix(const AssembledForms& forms, const QrParams& params);

/// Free E and F DOFs for a variant.
std::vector<std::size_t> e_free_dofs(const AssembledForms& forms, Variant v);
std::vector<std::size_t> f_free_dofs(const AssembledForms& forms);

/// Classical QR: E is lifted strongly to `loads.lifted` on Gamma0.
MixedSystem build_qr(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params);
/// Relaxed QR: the Gamma0 trace is penalized with weight eta^2.
MixedSystem build_rqr(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params);
/// Relaxed QR plus nu-weighted trace regularization on gamma1 and gammai.
MixedSystem build_rrqr(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params);
/// Dispatch on params.variant.
MixedSystem build_system(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params);

/// Largest residual of the two complex variational equations over all free
/// test basis functions, relative to the largest term magnitude.
double variational_residual(const AssembledForms& forms, const BoundaryLoads& loads,
                            const QrParams& params, std::span<const Complex> e,
                            std::span<const Complex> f);

}  // namespace qrm
