// Helpers shared by the unit tests and the acceptance runner.
#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qrm/driver.hpp"

namespace qrm::testing {

inline KappaField constant_kappa(Complex c) {
  return [c](Point) { return c; };
}

inline const Complex kPaperKappa{1.0, 1.0};

inline Discretization disc_problem(double h, const PartitionSpec& spec, Complex kappa = kPaperKappa) {
  Mesh m = generate_disc(1.0, h);
  BoundaryPartition p = partition_boundary(m, spec);
  return discretize(std::move(m), std::move(p), 1.0, constant_kappa(kappa));
}

inline Discretization ring_problem(double r_inner, double h, const PartitionSpec& spec,
                                   Complex kappa = kPaperKappa) {
  Mesh m = generate_ring(r_inner, 1.0, h);
  BoundaryPartition p = partition_boundary(m, spec);
  return discretize(std::move(m), std::move(p), 1.0, constant_kappa(kappa));
}

inline double norm(std::span<const Complex> x) {
  double s = 0.0;
  for (auto v : x) s += std::norm(v);
  return std::sqrt(s);
}

inline double diff_norm(std::span<const Complex> a, std::span<const Complex> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s);
}

inline double wnorm(const linalg::SparseMatrix& w, std::span<const Complex> x) {
  return std::sqrt(std::max(0.0, linalg::quadratic_form(w, x)));
}

inline std::vector<Complex> minus(std::span<const Complex> a, std::span<const Complex> b) {
  std::vector<Complex> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

/// Least-squares slope of log(err) against log(h).
inline double fitted_rate(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace qrm::testing
