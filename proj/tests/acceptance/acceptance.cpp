// End-to-end acceptance runner: one [PASS]/[FAIL] line per criterion, exit
// status 1 if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "qrm/driver.hpp"
#include "qrm/error.hpp"

using namespace qrm;
using namespace qrm::testing;

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kNoiseSeed = 42;
constexpr std::uint64_t kOracleSeed = 7;
constexpr double kNoise = 0.05;
constexpr double kRingInner = 0.75;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  bool pass = o.pass;
  std::string detail = o.detail;
  if (budget_s > 0.0 && secs > budget_s) {
    pass = false;
    detail += "; over time budget";
  }
  char timing[64];
  std::snprintf(timing, sizeof timing, " [%.1fs", secs);
  std::string t = timing;
  if (budget_s > 0.0) {
    std::snprintf(timing, sizeof timing, " / %.0fs", budget_s);
    t += timing;
  }
  t += "]";
  std::printf("[%s] criterion %d: %s -- %s%s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(),
              t.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Test-side norm matrices, assembled from the primitive blocks.
linalg::SparseMatrix sum(std::initializer_list<std::pair<double, const linalg::SparseMatrix*>> terms) {
  auto it = terms.begin();
  linalg::SparseMatrix acc = linalg::combine(it->first, *it->second, 0.0, *it->second);
  for (++it; it != terms.end(); ++it) acc = linalg::combine(1.0, acc, it->first, *it->second);
  return acc;
}

struct Norms {
  linalg::SparseMatrix h, v, w;
  explicit Norms(const AssembledForms& f)
      : h(sum({{1.0, &f.mass}, {1.0, &f.curl_curl}})),
        v(sum({{1.0, &f.mass}, {1.0, &f.curl_curl}, {1.0, &f.b_gamma0}})),
        w(sum({{1.0, &f.mass}, {1.0, &f.curl_curl}, {1.0, &f.b_gamma0}, {1.0, &f.b_gamma1}, {1.0, &f.b_gammai}})) {}
};

SweepRecord sweep(const Solver& solver, Variant v, double eta = 1.0) {
  QrParams base;
  base.variant = v;
  base.eta = eta;
  const auto grid = default_delta_grid();
  return sweep_delta(solver, base, grid);
}

bool interior(const SweepRecord& r, std::size_t i) { return i > 0 && i + 1 < r.points.size(); }

// --------------------------------------------------------------------------

Outcome direct_convergence() {
  const PlaneWave w;
  std::vector<double> hs, errs;
  for (double h : {0.2, 0.1, 0.05}) {
    const Discretization d = disc_problem(h, PartitionSpec::g34());
    const auto e = solve_direct_problem(d.forms, interpolate(w.field(), d.mesh));
    const auto err = field_error(d.mesh, e, w.field());
    hs.push_back(d.mesh.h());
    errs.push_back(err.hcurl() / err.ref_hcurl());
  }
  const double rate = fitted_rate(hs, errs);
  return {rate >= 0.9, fmt("h = %.3f/%.3f/%.3f, rel H(curl) err %.3e/%.3e/%.3e, rate %.3f (>= 0.9)", hs[0], hs[1],
                           hs[2], errs[0], errs[1], errs[2], rate)};
}

Outcome qr_noiseless() {
  double best[2] = {0, 0}, best_delta[2] = {0, 0}, spread = 0.0;
  bool inside = false;
  const PartitionSpec specs[2] = {PartitionSpec::g34(), PartitionSpec::ge37()};
  std::size_t edges = 0;
  for (int c = 0; c < 2; ++c) {
    const Discretization d = disc_problem(0.05, specs[c]);
    edges = d.mesh.num_edges();
    const auto md = plane_wave_data(PlaneWave{}, d.mesh, d.partition);
    const auto rec = sweep([&](const QrParams& p) { return solve_once(d, md.data, p, md.exact); }, Variant::QR);
    const auto i = rec.argmin_l2();
    if (!i) return {false, "no successful sweep point"};
    best[c] = rec.points[*i].metrics.err_l2_omega;
    best_delta[c] = rec.points[*i].params.delta;
    if (c == 0) {
      inside = interior(rec, *i);
    } else {
      // The electrode layout determines the field well enough that the error
      // settles on a plateau as delta -> 0; report how flat it is.
      double lo = INFINITY, hi = 0.0;
      for (const auto& p : rec.points) {
        if (!p.ok || p.params.delta > 1e-8) continue;
        lo = std::min(lo, p.metrics.err_l2_omega);
        hi = std::max(hi, p.metrics.err_l2_omega);
      }
      spread = hi / lo - 1.0;
    }
  }
  const bool pass = inside && best[0] <= 5e-2 && best[1] < best[0];
  return {pass, fmt("%zu edges; G34 min L2 %.4e at delta %.2e%s; GE37 min L2 %.4e at delta %.2e "
                    "(plateau below 1e-8, relative spread %.1e) (need G34 interior argmin <= 5e-2, GE37 < G34)",
                    edges, best[0], best_delta[0], inside ? " (interior)" : " (grid end)", best[1], best_delta[1],
                    spread)};
}

Outcome exact_estimates() {
  const Discretization d = disc_problem(0.1, PartitionSpec::g34());
  if (d.mesh.num_edges() > 3000) return {false, "mesh too large"};
  const auto oracle = discrete_oracle(d.mesh, d.partition, d.forms, kPaperKappa, kOracleSeed);
  const auto loads = loads_for(d.forms, oracle.data);
  const Norms n(d.forms);
  const double slack = 1.0 + 1e-10;
  double worst_f = 0.0, worst_t = 0.0;  // max ratio lhs / rhs
  int count = 0;
  for (Variant v : {Variant::RQR, Variant::RRQR}) {
    const auto& big = v == Variant::RQR ? n.v : n.w;
    const double eh = wnorm(big, oracle.exact);
    for (double delta : {1e-8, 1e-6, 1e-4, 1e-2, 1.0}) {
      for (double eta : {0.1, 1.0, 10.0}) {
        QrParams p;
        p.variant = v;
        p.delta = delta;
        p.eta = eta;
        if (v == Variant::RRQR) p.nu = delta;
        const auto sol = solve_system(d.forms, loads, p);
        const double fn = wnorm(big, sol.f);
        const double tn = wnorm(d.forms.b_gamma0, minus(sol.e, oracle.exact));
        worst_f = std::max(worst_f, fn / (std::sqrt(delta) * eh));
        worst_t = std::max(worst_t, tn / (std::sqrt(delta) / eta * eh));
        ++count;
      }
    }
  }
  return {worst_f <= slack && worst_t <= slack,
          fmt("%zu edges, %d (variant, delta, eta) cases; max ||F||/(sqrt(delta)||E_h||) = %.4f, "
              "max ||trace misfit||/(sqrt(delta)/eta ||E_h||) = %.4f (<= 1)",
              d.mesh.num_edges(), count, worst_f, worst_t)};
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  std::string meshes;
  const Discretization cases[] = {disc_problem(0.45, PartitionSpec::g34()),
                                  ring_problem(0.5, 0.45, PartitionSpec::ge37(8, 0.3))};
  for (const auto& d : cases) {
    if (d.mesh.num_edges() > 200) return {false, fmt("mesh has %zu edges", d.mesh.num_edges())};
    meshes += fmt("%s%zu", meshes.empty() ? "" : "+", d.mesh.num_edges());
    const auto md = plane_wave_data(PlaneWave{}, d.mesh, d.partition);
    const auto loads = loads_for(d.forms, add_noise(md.data, kNoise, kNoiseSeed));
    for (Variant v : {Variant::QR, Variant::RQR, Variant::RRQR}) {
      QrParams p;
      p.variant = v;
      p.delta = 1e-5;
      p.eta = 2.0;
      const auto sys = build_system(d.forms, loads, p);
      const auto xs = linalg::sparse_lu_solve(sys.matrix, sys.rhs);
      const auto xd = linalg::dense_solve(linalg::DenseMatrix::from_sparse(sys.matrix), sys.rhs);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - xd[i]) * (xs[i] - xd[i]);
        den += xd[i] * xd[i];
      }
      worst = std::max(worst, std::sqrt(num / den));
    }
  }
  return {worst <= 1e-10, fmt("meshes with %s edges, 3 variants: max sparse/dense rel diff %.2e (<= 1e-10)",
                              meshes.c_str(), worst)};
}

Outcome coercivity() {
  const Discretization d = ring_problem(0.5, 0.25, PartitionSpec::ge37());
  const auto md = plane_wave_data(PlaneWave{}, d.mesh, d.partition);
  const auto loads = loads_for(d.forms, md.data);
  const Norms n(d.forms);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (Variant v : {Variant::QR, Variant::RQR, Variant::RRQR}) {
    QrParams p;
    p.variant = v;
    p.delta = 3e-3;
    p.eta = 1.7;
    p.nu = 0.4;
    const auto sys = build_system(d.forms, loads, p);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<Complex> e(d.forms.size(), 0.0), f(d.forms.size(), 0.0);
      for (std::size_t i : sys.e_free) e[i] = {nd(rng), nd(rng)};
      for (std::size_t i : sys.f_free) f[i] = {nd(rng), nd(rng)};
      const auto x = sys.pack(e, f);
      const double lhs = linalg::quadratic_form(sys.matrix, x);
      double rhs = 0.0;
      switch (v) {
        case Variant::QR:
          rhs = p.delta * linalg::quadratic_form(n.h, e) + linalg::quadratic_form(n.h, f);
          break;
        case Variant::RQR:
          rhs = p.delta * linalg::quadratic_form(n.v, e) + p.eta * p.eta * linalg::quadratic_form(d.forms.b_gamma0, e) +
                linalg::quadratic_form(n.v, f);
          break;
        case Variant::RRQR:
          rhs = p.delta * linalg::quadratic_form(n.v, e) + p.eta * p.eta * linalg::quadratic_form(d.forms.b_gamma0, e) +
                *p.nu * (linalg::quadratic_form(d.forms.b_gamma1, e) + linalg::quadratic_form(d.forms.b_gammai, e)) +
                linalg::quadratic_form(n.w, f);
          break;
      }
      worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
    }
  }
  return {worst <= 1e-12, fmt("ring, 3 variants x 100 random vectors: max rel deviation %.2e (<= 1e-12)", worst)};
}

Outcome noise_calibration() {
  const Discretization d = disc_problem(0.1, PartitionSpec::g34());
  const auto md = plane_wave_data(PlaneWave{}, d.mesh, d.partition);
  double worst = 0.0;
  for (double p : {0.01, 0.05, 0.1}) {
    const auto noisy = add_noise(md.data, p, kNoiseSeed);
    worst = std::max(worst, std::abs(diff_norm(noisy.f, md.data.f) / norm(md.data.f) - p) / p);
    worst = std::max(worst, std::abs(diff_norm(noisy.g, md.data.g) / norm(md.data.g) - p) / p);
  }
  return {worst <= 1e-14, fmt("p in {0.01, 0.05, 0.1}: max relative deviation %.2e (<= 1e-14)", worst)};
}

// Shared with the L-curve criterion.
struct NoisyRing {
  SweepRecord record;
  double eta = 0.0;
};
NoisyRing noisy_ring;

Outcome noisy_rrqr() {
  // Disc, G34.
  const Discretization d = disc_problem(0.05, PartitionSpec::g34());
  const auto md = plane_wave_data(PlaneWave{}, d.mesh, d.partition);
  const auto noisy = add_noise(md.data, kNoise, kNoiseSeed);
  const double eta = auto_eta(d.forms, noisy);
  const auto rec = sweep([&](const QrParams& p) { return solve_once(d, noisy, p, md.exact); }, Variant::RRQR, eta);
  const auto i = rec.argmin_l2();
  if (!i) return {false, "disc sweep failed"};
  const double disc_err = rec.points[*i].metrics.err_l2_omega;

  // Ring with extension/restriction, GE37.
  NestedMeshes nested = generate_nested(kRingInner, 1.0, 0.05);
  const auto ring_part = partition_boundary(nested.ring, PartitionSpec::ge37());
  const ExtensionProblem problem =
      make_extension(std::move(nested), ring_part, 1.0, constant_kappa(kPaperKappa), constant_kappa(kPaperKappa));
  const auto rmd = plane_wave_data(PlaneWave{}, problem.ring.mesh, problem.ring.partition);
  const auto rnoisy = add_noise(rmd.data, kNoise, kNoiseSeed);
  noisy_ring.eta = auto_eta(problem.disc.forms, map_to_disc(problem, rnoisy));
  noisy_ring.record = sweep([&](const QrParams& p) { return extension_restriction(problem, rnoisy, p, rmd.exact); },
                            Variant::RRQR, noisy_ring.eta);
  const auto j = noisy_ring.record.argmin_l2();
  if (!j) return {false, "ring sweep failed"};
  const auto& m = noisy_ring.record.points[*j].metrics;
  return {disc_err <= 1e-1 && m.err_gammai <= 8e-2,
          fmt("disc G34 eta %.3f: min L2 %.4e at delta %.2e (<= 1e-1, eta/delta %.3g); ring GE37 ext eta %.3f: at "
              "optimal delta %.2e Gamma_i err %.4e (<= 8e-2), L2 %.4e, eta/delta %.3g",
              eta, disc_err, rec.points[*i].params.delta, eta / rec.points[*i].params.delta, noisy_ring.eta,
              noisy_ring.record.points[*j].params.delta, m.err_gammai, m.err_l2_omega,
              noisy_ring.eta / noisy_ring.record.points[*j].params.delta)};
}

Outcome extension_improvement() {
  NestedMeshes nested = generate_nested(kRingInner, 1.0, 0.05);
  const auto ring_part = partition_boundary(nested.ring, PartitionSpec::g34());
  const ExtensionProblem problem =
      make_extension(std::move(nested), ring_part, 1.0, constant_kappa(kPaperKappa), constant_kappa(kPaperKappa));
  const auto md = plane_wave_data(PlaneWave{}, problem.ring.mesh, problem.ring.partition);
  const auto plain =
      sweep([&](const QrParams& p) { return solve_once(problem.ring, md.data, p, md.exact); }, Variant::QR);
  const auto ext =
      sweep([&](const QrParams& p) { return extension_restriction(problem, md.data, p, md.exact); }, Variant::QR);
  const auto i = plain.argmin_l2();
  const auto j = ext.argmin_l2();
  if (!i || !j) return {false, "sweep failed"};
  const double a = plain.points[*i].metrics.err_gammai;
  const double b = ext.points[*j].metrics.err_gammai;
  return {a >= 10.0 * b, fmt("G34 at optimal delta: plain ring Gamma_i err %.4e (delta %.2e), extension %.4e "
                             "(delta %.2e), improvement %.1fx (>= 10x)",
                             a, plain.points[*i].params.delta, b, ext.points[*j].params.delta, a / b)};
}

Outcome tikhonov() {
  const Discretization d = disc_problem(0.1, PartitionSpec::ge37());
  const auto md = plane_wave_data(PlaneWave{}, d.mesh, d.partition);
  const auto noisy = add_noise(md.data, kNoise, kNoiseSeed);
  const auto loads = loads_for(d.forms, noisy);
  const double eta = auto_eta(d.forms, noisy);
  std::string detail;
  double worst = 0.0;
  for (Variant v : {Variant::QR, Variant::RQR, Variant::RRQR}) {
    QrParams p;
    p.variant = v;
    p.delta = 1e-4;
    p.eta = eta;
    const auto sol = solve_system(d.forms, loads, p);
    const auto check = tikhonov_gradient_check(d.forms, loads, p, sol.e, 20, 99);
    worst = std::max(worst, check.max_relative);
    detail += fmt("%s%s %.2e", detail.empty() ? "" : ", ", to_string(v).c_str(), check.max_relative);
  }
  return {worst <= 1e-6, "max relative directional derivative over 20 directions: " + detail + " (<= 1e-6)"};
}

Outcome l_curve_corner() {
  const auto& rec = noisy_ring.record;
  if (rec.points.empty()) return {false, "noisy ring sweep unavailable"};
  std::vector<LCurvePoint> pts;
  for (const auto& p : rec.points) {
    if (p.ok) pts.push_back({p.params.delta, p.metrics.norm_f, p.metrics.norm_e});
  }
  const auto lc = l_curve(pts);
  const auto i = rec.argmin_l2();
  const auto gi = rec.argmin([](const ErrorMetrics& m) { return m.err_gammai; });
  const double best = rec.points[*i].params.delta;
  if (lc.degenerate) return {false, fmt("degenerate L-curve; error-minimizing delta %.2e", best)};
  const double gap = std::abs(std::log10(lc.corner_delta() / best));
  return {gap <= 1.0, fmt("corner delta %.2e (angle %.1f deg), error-minimizing delta %.2e (Gamma_i argmin %.2e), "
                          "%.2f decades apart (<= 1)",
                          lc.corner_delta(), lc.angles[*lc.corner], best, rec.points[*gi].params.delta, gap)};
}

}  // namespace

int main() {
  report(1, "direct problem H(curl) convergence", 120, direct_convergence);
  report(2, "noiseless QR on the disc", 600, qr_noiseless);
  report(3, "exact discrete estimates (relaxed variants)", 300, exact_estimates);
  report(4, "sparse vs dense solver equivalence", 60, oracle_equivalence);
  report(5, "coercivity identity", 0, coercivity);
  report(6, "noise calibration", 0, noise_calibration);
  report(7, "noisy RR-QR on disc and ring", 900, noisy_rrqr);
  report(8, "extension/restriction improvement", 0, extension_improvement);
  report(9, "Tikhonov stationarity", 0, tikhonov);
  report(10, "L-curve corner", 0, l_curve_corner);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
