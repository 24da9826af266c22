#include <algorithm>
#include <cmath>

#include "qrm/driver.hpp"
#include "qrm/error.hpp"

namespace qrm {

using linalg::SparseMatrix;

TikhonovFunctional::TikhonovFunctional(const AssembledForms& forms, const BoundaryLoads& loads,
                                       const QrParams& params)
    : forms_(forms), loads_(loads), params_(params), f_free_(f_free_dofs(forms)) {
  params.validate();
  riesz_.factor(f_norm_matrix(forms, params).submatrix(f_free_, f_free_));
  switch (params.variant) {
    case Variant::QR: regular_ = linalg::combine(params.delta, forms.hcurl(), 0.0, forms.mass); break;
    case Variant::RQR: regular_ = linalg::combine(params.delta, forms.v_norm(), 0.0, forms.mass); break;
    case Variant::RRQR: {
      const SparseMatrix b = linalg::combine(params.nu_outer_value(), forms.b_gamma1,
                                             params.nu_inner_value(), forms.b_gammai);
      regular_ = linalg::combine(params.delta, forms.v_norm(), 1.0, b);
      break;
    }
  }
}

double TikhonovFunctional::operator()(std::span<const Complex> v) const {
  if (v.size() != forms_.size()) throw InvalidArgument("TikhonovFunctional: length mismatch");
  const std::vector<Complex> av = forms_.apply_a(v);
  std::vector<Complex> r(f_free_.size());
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = av[f_free_[j]] - loads_.b_g[f_free_[j]];
  const std::vector<Complex> y = riesz_.solve(r);
  double misfit = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) misfit += (std::conj(y[j]) * r[j]).real();

  double penalty = 0.0;
  if (params_.variant != Variant::QR) {
    std::vector<Complex> d(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) d[i] = v[i] - loads_.lifted[i];
    penalty = params_.eta * params_.eta * linalg::quadratic_form(forms_.b_gamma0, d);
  }
  return 0.5 * (misfit + penalty + linalg::quadratic_form(regular_, v));
}

TikhonovCheck tikhonov_gradient_check(const AssembledForms& forms, const BoundaryLoads& loads,
                                      const QrParams& params, std::span<const Complex> v,
                                      std::size_t n_directions, std::uint64_t seed, double step) {
  if (!(step > 0.0)) throw InvalidArgument("tikhonov_gradient_check: step must be positive");
  const TikhonovFunctional j(forms, loads, params);
  const std::vector<std::size_t> free = e_free_dofs(forms, params.variant);
  NormalStream rng(seed);

  TikhonovCheck out;
  out.j_value = j(v);
  const double j_scale = std::sqrt(2.0 * std::max(out.j_value, 0.0));
  std::vector<Complex> d(v.size()), plus(v.size()), minus(v.size());
  for (std::size_t k = 0; k < n_directions; ++k) {
    std::fill(d.begin(), d.end(), Complex(0.0));
    for (std::size_t i : free) {
      const double re = rng.next();
      d[i] = {re, rng.next()};
    }
    // J is quadratic: J(v+d) + J(v-d) - 2J(v) = d^H Q d exactly.
    for (std::size_t i = 0; i < v.size(); ++i) {
      plus[i] = v[i] + d[i];
      minus[i] = v[i] - d[i];
    }
    double q = j(plus) + j(minus) - 2.0 * out.j_value;
    if (!(q > 0.0)) throw NumericalError("tikhonov_gradient_check: functional is not convex along a direction");
    const double t = (j_scale > 0.0 ? step * j_scale : step) / std::sqrt(q);
    for (std::size_t i = 0; i < v.size(); ++i) {
      plus[i] = v[i] + t * d[i];
      minus[i] = v[i] - t * d[i];
    }
    const double deriv = (j(plus) - j(minus)) / (2.0 * t);
    const double denom = (j_scale > 0.0 ? j_scale : 1.0) * std::sqrt(q);
    out.derivatives.push_back(deriv);
    out.relative.push_back(std::abs(deriv) / denom);
    out.max_relative = std::max(out.max_relative, out.relative.back());
  }
  return out;
}

}  // namespace qrm
