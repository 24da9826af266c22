#include "qrm/driver.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include "qrm/error.hpp"

namespace qrm {

using linalg::SparseMatrix;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double relative(const SparseMatrix& w, std::span<const Complex> diff, std::span<const Complex> ref) {
  if (w.nnz() == 0) return kNaN;
  const double den = linalg::quadratic_form(w, ref);
  if (!(den > 0.0)) return kNaN;
  return std::sqrt(std::max(0.0, linalg::quadratic_form(w, diff)) / den);
}

}  // namespace

Discretization discretize(Mesh mesh, BoundaryPartition partition, double k, const KappaField& kappa,
                          KappaRule rule) {
  Discretization d{std::move(mesh), std::move(partition), {}};
  d.forms = assemble(d.mesh, d.partition, k, kappa, rule);
  return d;
}

ErrorMetrics compute_metrics(const AssembledForms& forms, std::span<const Complex> e,
                             std::span<const Complex> f, std::span<const Complex> reference) {
  ErrorMetrics m;
  m.norm_e = std::sqrt(std::max(0.0, linalg::quadratic_form(forms.mass, e)));
  m.norm_f = std::sqrt(std::max(0.0, linalg::quadratic_form(forms.mass, f)));
  if (reference.empty()) {
    m.err_l2_omega = m.err_gamma0 = m.err_gamma1 = m.err_gammai = kNaN;
    return m;
  }
  if (reference.size() != e.size()) throw InvalidArgument("compute_metrics: reference length mismatch");
  std::vector<Complex> diff(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) diff[i] = e[i] - reference[i];
  m.err_l2_omega = relative(forms.mass, diff, reference);
  m.err_gamma0 = relative(forms.b_gamma0, diff, reference);
  m.err_gamma1 = relative(forms.b_gamma1, diff, reference);
  m.err_gammai = relative(forms.b_gammai, diff, reference);
  return m;
}

BoundaryLoads loads_for(const AssembledForms& forms, const CauchyData& data) {
  return boundary_trace_terms(forms, data.edges, data.f, data.g);
}

QrSolution solve_system(const AssembledForms& forms, const BoundaryLoads& loads, const QrParams& params) {
  const auto start = std::chrono::steady_clock::now();
  const MixedSystem sys = build_system(forms, loads, params);
  QrSolution sol;
  sol.params = params;
  const std::vector<double> x = linalg::sparse_lu_solve(sys.matrix, sys.rhs, &sol.report);
  sys.unpack(x, sol.e, sol.f);
  sol.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

QrSolution solve_once(const Discretization& disc, const CauchyData& data, const QrParams& params,
                      std::span<const Complex> reference) {
  data.validate(disc.partition);
  const auto start = std::chrono::steady_clock::now();
  QrSolution sol = solve_system(disc.forms, loads_for(disc.forms, data), params);
  sol.metrics = compute_metrics(disc.forms, sol.e, sol.f, reference);
  sol.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

// ---------------------------------------------------------------------------

std::vector<double> geometric_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw InvalidArgument("geometric_grid: need 0 < lo <= hi, n >= 1");
  if (n == 1) return {hi};
  if (hi == lo) throw InvalidArgument("geometric_grid: lo == hi with more than one point");
  std::vector<double> g(n);
  const double a = std::log(hi);
  const double b = std::log(lo);
  for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  g.front() = hi;
  g.back() = lo;
  return g;
}

std::vector<double> default_delta_grid() { return geometric_grid(1e-12, 1e-2, 25); }

std::optional<std::size_t> SweepRecord::argmin(const std::function<double(const ErrorMetrics&)>& key) const {
  std::optional<std::size_t> best;
  double best_v = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].ok) continue;
    const double v = key(points[i].metrics);
    if (!std::isfinite(v)) continue;
    if (!best || v < best_v) {
      best = i;
      best_v = v;
    }
  }
  return best;
}

std::optional<std::size_t> SweepRecord::argmin_l2() const {
  return argmin([](const ErrorMetrics& m) { return m.err_l2_omega; });
}

SweepRecord sweep_delta(const Solver& solver, const QrParams& base, std::span<const double> grid,
                        bool nu_follows_delta, unsigned jobs) {
  if (grid.empty()) throw InvalidArgument("sweep_delta: empty grid");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if ((grid[i] - grid[i - 1]) * (grid[1] - grid[0]) <= 0.0) {
      throw InvalidArgument("sweep_delta: grid must be strictly monotone");
    }
  }
  SweepRecord rec;
  rec.points.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    QrParams p = base;
    p.delta = grid[i];
    if (nu_follows_delta && p.variant == Variant::RRQR) p.nu = grid[i];
    rec.points[i].params = p;
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < rec.points.size(); i = next++) {
      SweepPoint& pt = rec.points[i];
      try {
        const QrSolution sol = solver(pt.params);
        pt.metrics = sol.metrics;
        pt.wall_ms = sol.wall_ms;
        pt.ok = true;
      } catch (const Error& e) {
        pt.error = e.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(grid.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rec;
}

// ---------------------------------------------------------------------------

double auto_eta(const AssembledForms& forms, const CauchyData& data) {
  const BoundaryLoads loads = loads_for(forms, data);
  const double f_norm = std::sqrt(boundary_l2_norm_sq(forms, data.edges, data.f));
  if (!(f_norm > 0.0)) throw InvalidArgument("auto_eta: ||f||_{0,Gamma0} = 0");

  const std::vector<std::size_t> ff = f_free_dofs(forms);
  QrParams w_params;
  w_params.variant = Variant::RRQR;
  const SparseMatrix w = f_norm_matrix(forms, w_params).submatrix(ff, ff);
  std::vector<Complex> rhs(ff.size());
  for (std::size_t j = 0; j < ff.size(); ++j) rhs[j] = loads.b_g[ff[j]];
  const linalg::SparseLu lu(w);
  const std::vector<Complex> g = lu.solve(rhs);
  // ||G||_W^2 = G^H W G = G^H b.
  double g_sq = 0.0;
  for (std::size_t j = 0; j < ff.size(); ++j) g_sq += (std::conj(g[j]) * rhs[j]).real();
  const double eta = std::sqrt(std::max(0.0, g_sq)) / f_norm;
  if (!(eta > 0.0)) throw InvalidArgument("auto_eta: Riesz representative of g vanishes, eta = 0");
  return eta;
}

// ---------------------------------------------------------------------------

ExtensionProblem make_extension(NestedMeshes meshes, const BoundaryPartition& ring_partition, double k,
                                const KappaField& ring_kappa, const KappaField& disc_kappa) {
  if (meshes.ring_to_disc_edge.size() != meshes.ring.num_edges()) {
    throw InvalidArgument("extension: meshes are not nested");
  }
  std::vector<int> gamma0;
  gamma0.reserve(ring_partition.gamma0.size());
  for (int e : ring_partition.gamma0) {
    const int d = meshes.ring_to_disc_edge[e];
    if (!meshes.disc.is_boundary_edge(d)) throw InvalidArgument("extension: gamma0 edge is inside the disc");
    gamma0.push_back(d);
  }
  ExtensionProblem p;
  BoundaryPartition disc_partition = partition_from_gamma0(meshes.disc, gamma0);
  p.ring = discretize(meshes.ring, ring_partition, k, ring_kappa);
  p.disc = discretize(meshes.disc, std::move(disc_partition), k, disc_kappa);
  p.meshes = std::move(meshes);
  return p;
}

CauchyData map_to_disc(const ExtensionProblem& problem, const CauchyData& ring_data) {
  ring_data.validate(problem.ring.partition);
  CauchyData out = ring_data;
  for (auto& e : out.edges) {
    const int d = problem.meshes.ring_to_disc_edge[e];
    // Orientation is preserved by construction; a flip would mean a broken embedding.
    if (problem.disc.forms.trace_sign[d] != problem.ring.forms.trace_sign[e]) {
      throw Error("extension: boundary orientation differs between ring and disc");
    }
    e = d;
  }
  return out;
}

std::vector<Complex> restrict_to_ring(const ExtensionProblem& problem, std::span<const Complex> disc_dofs) {
  if (disc_dofs.size() != problem.meshes.disc.num_edges()) {
    throw InvalidArgument("restrict_to_ring: length mismatch");
  }
  std::vector<Complex> out(problem.meshes.ring.num_edges());
  for (std::size_t e = 0; e < out.size(); ++e) out[e] = disc_dofs[problem.meshes.ring_to_disc_edge[e]];
  return out;
}

QrSolution extension_restriction(const ExtensionProblem& problem, const CauchyData& ring_data,
                                 const QrParams& params, std::span<const Complex> ring_reference) {
  const auto start = std::chrono::steady_clock::now();
  const CauchyData disc_data = map_to_disc(problem, ring_data);
  QrSolution disc_sol = solve_system(problem.disc.forms, loads_for(problem.disc.forms, disc_data), params);
  QrSolution sol;
  sol.params = params;
  sol.report = disc_sol.report;
  sol.e = restrict_to_ring(problem, disc_sol.e);
  sol.f = restrict_to_ring(problem, disc_sol.f);
  sol.metrics = compute_metrics(problem.ring.forms, sol.e, sol.f, ring_reference);
  sol.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace qrm
