#include "qrm/formulations.hpp"

#include <algorithm>
#include <cmath>

#include "qrm/error.hpp"

namespace qrm {

using linalg::SparseMatrix;
using linalg::Triplet;

std::string to_string(Variant v) {
  switch (v) {
    case Variant::QR: return "QR";
    case Variant::RQR: return "RQR";
    case Variant::RRQR: return "RRQR";
  }
  return "?";
}

Variant variant_from_string(const std::string& name) {
  if (name == "QR") return Variant::QR;
  if (name == "RQR") return Variant::RQR;
  if (name == "RRQR") return Variant::RRQR;
  throw InvalidArgument("unknown method '" + name + "' (expected QR, RQR or RRQR)");
}

void QrParams::validate() const {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidArgument("delta must be positive");
  if (variant != Variant::QR && (!(eta > 0.0) || !std::isfinite(eta))) {
    throw InvalidArgument("eta must be positive for the relaxed variants");
  }
  if (variant == Variant::RRQR) {
    if (!(nu_outer_value() > 0.0)) throw InvalidArgument("nu must be positive");
    if (!(nu_inner_value() > 0.0)) throw InvalidArgument("nu_inner must be positive");
  }
}

namespace {

void place(std::vector<Triplet>& out, const SparseMatrix& block, std::size_t row0, std::size_t col0,
           double scale) {
  if (scale == 0.0) return;
  for (std::size_t r = 0; r < block.rows(); ++r) {
    for (std::size_t k = block.row_ptr()[r]; k < block.row_ptr()[r + 1]; ++k) {
      out.push_back({row0 + r, col0 + block.col_idx()[k], scale * block.values()[k]});
    }
  }
}

std::vector<double> real_part(std::span<const Complex> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i].real();
  return out;
}

std::vector<double> imag_part(std::span<const Complex> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i].imag();
  return out;
}

MixedSystem build(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params) {
  params.validate();
  const std::size_t n = forms.size();
  if (loads.lifted.size() != n || loads.b_f.size() != n || loads.b_g.size() != n) {
    throw InvalidArgument("build_system: boundary loads do not match the forms");
  }

  MixedSystem sys;
  sys.variant = params.variant;
  sys.e_free = e_free_dofs(forms, params.variant);
  sys.f_free = f_free_dofs(forms);
  sys.e_fixed.assign(n, 0.0);
  if (params.variant == Variant::QR) {
    for (std::size_t e : forms.dofs.of_class(DofClass::Gamma0)) sys.e_fixed[e] = loads.lifted[e];
  }

  const SparseMatrix ne_full = e_norm_matrix(forms, params);
  const SparseMatrix nf_full = f_norm_matrix(forms, params);
  const SparseMatrix ar_full = forms.a_re();
  const SparseMatrix ai_full = forms.a_im();

  const auto& ef = sys.e_free;
  const auto& ff = sys.f_free;
  const std::size_t ne = ef.size();
  const std::size_t nf = ff.size();

  const SparseMatrix n_e = ne_full.submatrix(ef, ef);
  const SparseMatrix n_f = nf_full.submatrix(ff, ff);
  const SparseMatrix ar_ef = ar_full.submatrix(ef, ff);
  const SparseMatrix ai_ef = ai_full.submatrix(ef, ff);
  const SparseMatrix ar_fe = ar_full.submatrix(ff, ef);
  const SparseMatrix ai_fe = ai_full.submatrix(ff, ef);

  const std::size_t re_e = 0, im_e = ne, re_g = 2 * ne, im_g = 2 * ne + nf;
  std::vector<Triplet> t;
  t.reserve(2 * n_e.nnz() + 2 * n_f.nnz() + 4 * ar_ef.nnz() + 4 * ai_ef.nnz());
  // Re / Im of N_E E + A G.
  place(t, n_e, re_e, re_e, 1.0);
  place(t, ar_ef, re_e, re_g, 1.0);
  place(t, ai_ef, re_e, im_g, -1.0);
  place(t, n_e, im_e, im_e, 1.0);
  place(t, ai_ef, im_e, re_g, -1.0);
  place(t, ar_ef, im_e, im_g, -1.0);
  // -Re / +Im of A E - N_F conj(G).
  place(t, ar_fe, re_g, re_e, -1.0);
  place(t, ai_fe, re_g, im_e, 1.0);
  place(t, n_f, re_g, re_g, 1.0);
  place(t, ai_fe, im_g, re_e, 1.0);
  place(t, ar_fe, im_g, im_e, 1.0);
  place(t, n_f, im_g, im_g, 1.0);
  const std::size_t dim = 2 * ne + 2 * nf;
  sys.matrix = SparseMatrix::from_triplets(dim, dim, std::move(t));

  // Right-hand side; eliminated E values move across through N_E and A.
  sys.rhs.assign(dim, 0.0);
  const double eta2 = params.variant == Variant::QR ? 0.0 : params.eta * params.eta;
  const std::vector<double> fix_r = real_part(sys.e_fixed);
  const std::vector<double> fix_i = imag_part(sys.e_fixed);
  const std::vector<double> ne_r = ne_full.multiply(fix_r);
  const std::vector<double> ne_i = ne_full.multiply(fix_i);
  const std::vector<double> ar_r = ar_full.multiply(fix_r);
  const std::vector<double> ar_i = ar_full.multiply(fix_i);
  const std::vector<double> ai_r = ai_full.multiply(fix_r);
  const std::vector<double> ai_i = ai_full.multiply(fix_i);
  for (std::size_t j = 0; j < ne; ++j) {
    const std::size_t e = ef[j];
    sys.rhs[re_e + j] = eta2 * loads.b_f[e].real() - ne_r[e];
    sys.rhs[im_e + j] = eta2 * loads.b_f[e].imag() - ne_i[e];
  }
  for (std::size_t j = 0; j < nf; ++j) {
    const std::size_t e = ff[j];
    sys.rhs[re_g + j] = -loads.b_g[e].real() + (ar_r[e] - ai_i[e]);
    sys.rhs[im_g + j] = loads.b_g[e].imag() - (ai_r[e] + ar_i[e]);
  }
  return sys;
}

}  // namespace

std::vector<std::size_t> e_free_dofs(const AssembledForms& forms, Variant v) {
  if (v == Variant::QR) return forms.dofs.excluding({DofClass::Gamma0});
  return forms.dofs.excluding({});
}

std::vector<std::size_t> f_free_dofs(const AssembledForms& forms) {
  return forms.dofs.excluding({DofClass::Gamma1, DofClass::Gammai});
}

SparseMatrix e_norm_matrix(const AssembledForms& forms, const QrParams& params) {
  switch (params.variant) {
    case Variant::QR:
      return linalg::combine(params.delta, forms.hcurl(), 0.0, forms.b_gamma0);
    case Variant::RQR:
      return linalg::combine(params.delta, forms.v_norm(), params.eta * params.eta, forms.b_gamma0);
    case Variant::RRQR: {
      const SparseMatrix v = linalg::combine(params.delta, forms.v_norm(), params.eta * params.eta,
                                             forms.b_gamma0);
      const SparseMatrix b = linalg::combine(params.nu_outer_value(), forms.b_gamma1,
                                             params.nu_inner_value(), forms.b_gammai);
      return linalg::combine(1.0, v, 1.0, b);
    }
  }
  throw InvalidArgument("unknown variant");
}

SparseMatrix f_norm_matrix(const AssembledForms& forms, const QrParams& params) {
  switch (params.variant) {
    case Variant::QR: return forms.hcurl();
    case Variant::RQR: return forms.v_norm();
    // W-norm; on M it coincides with the V-norm since traces vanish on gamma1 and gammai.
    case Variant::RRQR: return linalg::combine(1.0, forms.v_norm(), 1.0, forms.b_inaccessible());
  }
  throw InvalidArgument("unknown variant");
}

MixedSystem build_qr(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params) {
  if (params.variant != Variant::QR) throw InvalidArgument("build_qr: params.variant is not QR");
  return build(forms, loads, params);
}

MixedSystem build_rqr(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params) {
  if (params.variant != Variant::RQR) throw InvalidArgument("build_rqr: params.variant is not RQR");
  return build(forms, loads, params);
}

MixedSystem build_rrqr(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params) {
  if (params.variant != Variant::RRQR) throw InvalidArgument("build_rrqr: params.variant is not RRQR");
  return build(forms, loads, params);
}

MixedSystem build_system(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params) {
  return build(forms, loads, params);
}

void MixedSystem::unpack(std::span<const double> x, std::vector<Complex>& e, std::vector<Complex>& f) const {
  if (x.size() != size()) throw InvalidArgument("MixedSystem::unpack: length mismatch");
  const std::size_t n_e = ne();
  const std::size_t n_f = nf();
  e = e_fixed;
  f.assign(e_fixed.size(), 0.0);
  for (std::size_t j = 0; j < n_e; ++j) e[e_free[j]] = {x[j], x[n_e + j]};
  // F = conj(G).
  for (std::size_t j = 0; j < n_f; ++j) f[f_free[j]] = {x[2 * n_e + j], -x[2 * n_e + n_f + j]};
}

std::vector<double> MixedSystem::pack(std::span<const Complex> e, std::span<const Complex> f) const {
  if (e.size() != e_fixed.size() || f.size() != e_fixed.size()) {
    throw InvalidArgument("MixedSystem::pack: length mismatch");
  }
  const std::size_t n_e = ne();
  const std::size_t n_f = nf();
  std::vector<double> x(size());
  for (std::size_t j = 0; j < n_e; ++j) {
    x[j] = e[e_free[j]].real();
    x[n_e + j] = e[e_free[j]].imag();
  }
  for (std::size_t j = 0; j < n_f; ++j) {
    x[2 * n_e + j] = f[f_free[j]].real();
    x[2 * n_e + n_f + j] = -f[f_free[j]].imag();
  }
  return x;
}

double variational_residual(const AssembledForms& forms, const BoundaryLoads& loads,
                            const QrParams& params, std::span<const Complex> e,
                            std::span<const Complex> f) {
  const std::size_t n = forms.size();
  if (e.size() != n || f.size() != n) throw InvalidArgument("variational_residual: length mismatch");
  const SparseMatrix ne_full = e_norm_matrix(forms, params);
  const SparseMatrix nf_full = f_norm_matrix(forms, params);
  const double eta2 = params.variant == Variant::QR ? 0.0 : params.eta * params.eta;

  // Equation 1 tested with real phi_j and i*phi_j is the complex identity
  // N_E E + conj(A) F = eta^2 b_f; A is complex symmetric.
  std::vector<Complex> conj_f(n);
  for (std::size_t i = 0; i < n; ++i) conj_f[i] = std::conj(f[i]);
  std::vector<Complex> a_conj_f = forms.apply_a(conj_f);
  const std::vector<Complex> ne_e = ne_full.multiply(e);
  const std::vector<Complex> a_e = forms.apply_a(e);
  const std::vector<Complex> nf_f = nf_full.multiply(f);

  double scale = 0.0;
  double worst = 0.0;
  for (std::size_t i : e_free_dofs(forms, params.variant)) {
    const Complex aterm = std::conj(a_conj_f[i]);
    const Complex rhs = eta2 * loads.b_f[i];
    scale = std::max({scale, std::abs(ne_e[i]), std::abs(aterm), std::abs(rhs)});
    worst = std::max(worst, std::abs(ne_e[i] + aterm - rhs));
  }
  for (std::size_t i : f_free_dofs(forms)) {
    scale = std::max({scale, std::abs(a_e[i]), std::abs(nf_f[i]), std::abs(loads.b_g[i])});
    worst = std::max(worst, std::abs(a_e[i] - nf_f[i] - loads.b_g[i]));
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace qrm
