#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <random>

#include "config.hpp"
#include "qrm/error.hpp"
#include "report.hpp"

namespace qrm::cli {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out;
  bool strict = false;
  bool timing = false;
  bool svg = false;
};

struct Context {
  ExperimentConfig config;
  Options options;
  RunInfo info;
  fs::path dir;
  std::ostream& out;
  std::ostream& err;

  void warn(const std::string& message) const {
    if (options.strict) throw InvariantViolation("warning treated as error: " + message);
    err << "warning: " << message << '\n';
  }
  std::uint64_t seed() const {
    if (!options.seed) throw ConfigError("--seed is required: this run draws random numbers");
    return *options.seed;
  }
  std::string header() const {
    // header_lines without the comment markers, for writers that add their own
    std::string text;
    const std::string lines = header_lines(info);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (lines.compare(i, 2, "# ") == 0 && (i == 0 || lines[i - 1] == '\n')) {
        i += 1;
        continue;
      }
      text += lines[i];
    }
    return text;
  }
};

// --------------------------------------------------------------------------
// Problem set-up shared by the commands

struct Problem {
  Discretization base;                 ///< the configured domain
  std::optional<ExtensionProblem> ext; ///< ring embedded in a disc
  CauchyData data;                     ///< on base's mesh
  std::vector<Complex> reference;      ///< empty without one
  double eta = 1.0;

  Solver solver(bool extended) const {
    if (extended) {
      return [this](const QrParams& p) { return extension_restriction(*ext, data, p, reference); };
    }
    return [this](const QrParams& p) { return solve_once(base, data, p, reference); };
  }
};

Problem setup(const Context& ctx, bool need_extension) {
  const auto& c = ctx.config;
  Problem pr;
  const KappaField kappa = c.kappa_field();
  if (c.shape == Shape::Disc) {
    Mesh mesh = generate_disc(1.0, c.h);
    BoundaryPartition part = partition_boundary(mesh, c.partition);
    pr.base = discretize(std::move(mesh), std::move(part), c.k, kappa);
  } else {
    // Ring runs always use the nested construction, so ring edge numbering
    // is the same with or without extension.
    NestedMeshes nested = generate_nested(c.r_inner, 1.0, c.h);
    const BoundaryPartition part = partition_boundary(nested.ring, c.partition);
    if (need_extension) {
      pr.ext = make_extension(std::move(nested), part, c.k, kappa, kappa);
      pr.base = pr.ext->ring;
    } else {
      pr.base = discretize(std::move(nested.ring), part, c.k, kappa);
    }
  }

  switch (c.source) {
    case DataSource::PlaneWave: {
      const PlaneWave wave = PlaneWave::from_angle(c.angle, c.k, c.kappa);
      auto md = plane_wave_data(wave, pr.base.mesh, pr.base.partition);
      pr.data = std::move(md.data);
      pr.reference = std::move(md.exact);
      break;
    }
    case DataSource::Oracle: {
      auto md = discrete_oracle(pr.base.mesh, pr.base.partition, pr.base.forms, c.kappa, ctx.seed());
      pr.data = std::move(md.data);
      pr.reference = std::move(md.exact);
      break;
    }
    case DataSource::File: {
      std::ifstream in(c.data_file);
      if (!in) throw ConfigError(fmt::format("cannot open data file '{}'", c.data_file));
      pr.data = read_cauchy_data(in);
      try {
        pr.data.validate(pr.base.partition);
      } catch (const InvalidArgument& e) {
        throw ConfigError(fmt::format("data file '{}' does not fit the configured mesh: {}", c.data_file, e.what()));
      }
      break;
    }
  }
  if (c.noise > 0.0) pr.data = add_noise(pr.data, c.noise, ctx.seed());

  if (c.eta) {
    pr.eta = *c.eta;
  } else if (pr.ext) {
    pr.eta = auto_eta(pr.ext->disc.forms, map_to_disc(*pr.ext, pr.data));
  } else {
    pr.eta = auto_eta(pr.base.forms, pr.data);
  }
  return pr;
}

QrParams params_of(const Context& ctx, const Problem& pr) {
  QrParams p = ctx.config.params();
  p.eta = pr.eta;
  p.validate();
  return p;
}

/// Optimal delta: error argmin with a reference, L-curve corner otherwise.
struct Choice {
  std::optional<std::size_t> index;
  std::string rule;
};

Choice choose(const Context& ctx, const SweepRecord& rec, bool has_reference) {
  if (has_reference) {
    const auto i = rec.argmin_l2();
    if (i && (*i == 0 || *i + 1 == rec.points.size()) && rec.points.size() > 2) {
      ctx.warn(fmt::format("error minimum at the end of the delta grid (delta = {:.3e})", rec.points[*i].params.delta));
    }
    return {i, "argmin of the relative L2 error"};
  }
  std::vector<LCurvePoint> pts;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rec.points.size(); ++i) {
    const auto& p = rec.points[i];
    if (p.ok && p.metrics.norm_f > 0.0 && p.metrics.norm_e > 0.0) {
      pts.push_back({p.params.delta, p.metrics.norm_f, p.metrics.norm_e});
      idx.push_back(i);
    }
  }
  if (pts.size() < 5) {
    ctx.warn("fewer than 5 usable sweep points; no optimal delta");
    return {std::nullopt, "L-curve corner"};
  }
  const auto lc = l_curve(pts);
  if (lc.degenerate) {
    ctx.warn("degenerate L-curve; no optimal delta");
    return {std::nullopt, "L-curve corner"};
  }
  for (std::size_t j = 0; j < idx.size(); ++j) {
    if (rec.points[idx[j]].params.delta == lc.corner_delta()) return {idx[j], "L-curve corner"};
  }
  return {std::nullopt, "L-curve corner"};
}

SweepRecord run_sweep(const Context& ctx, const Problem& pr, bool extended) {
  QrParams base = params_of(ctx, pr);
  const auto grid = ctx.config.grid();
  const auto rec = sweep_delta(pr.solver(extended), base, grid, !ctx.config.nu.has_value(), ctx.options.jobs);
  std::size_t failed = 0;
  for (const auto& p : rec.points) {
    if (!p.ok) {
      ++failed;
      ctx.err << fmt::format("delta {:.3e} failed: {}\n", p.params.delta, p.error);
    }
  }
  if (failed == rec.points.size()) throw NumericalError("every sweep point failed");
  if (failed > 0) ctx.warn(fmt::format("{} of {} sweep points failed", failed, rec.points.size()));
  return rec;
}

std::string metric(double v) { return std::isnan(v) ? "n/a" : fmt::format("{:.4e}", v); }

void write_sweep_svg(const Context& ctx, const SweepRecord& rec, const std::optional<std::size_t>& best,
                     const std::string& name, const std::string& title) {
  Series l2{"relative L2 error", {}, {}, best};
  Series gi{"Gamma_i trace error", {}, {}, best};
  Series f{"||F||", {}, {}, best};
  for (const auto& p : rec.points) {
    l2.x.push_back(p.params.delta);
    l2.y.push_back(p.ok ? p.metrics.err_l2_omega : NAN);
    gi.x.push_back(p.params.delta);
    gi.y.push_back(p.ok ? p.metrics.err_gammai : NAN);
    f.x.push_back(p.params.delta);
    f.y.push_back(p.ok ? p.metrics.norm_f : NAN);
  }
  std::vector<Series> s;
  if (std::any_of(l2.y.begin(), l2.y.end(), [](double v) { return v > 0.0; })) s.push_back(l2);
  if (std::any_of(gi.y.begin(), gi.y.end(), [](double v) { return v > 0.0; })) s.push_back(gi);
  s.push_back(f);
  auto out = open_output(ctx.dir, name);
  write_plot_svg(out, title, "delta", "value", s);
}

// --------------------------------------------------------------------------
// Commands

int cmd_mesh(const Context& ctx) {
  const auto pr = setup(ctx, ctx.config.extension);
  {
    auto out = open_output(ctx.dir, "mesh.txt");
    write_mesh(out, pr.base.mesh, ctx.header());
  }
  {
    auto out = open_output(ctx.dir, "partition.txt");
    out << header_lines(ctx.info) << "# edge class (0 = gamma0, 1 = gamma1, i = gammai)\n";
    std::vector<std::pair<int, char>> rows;
    for (int e : pr.base.partition.gamma0) rows.emplace_back(e, '0');
    for (int e : pr.base.partition.gamma1) rows.emplace_back(e, '1');
    for (int e : pr.base.partition.gammai) rows.emplace_back(e, 'i');
    std::sort(rows.begin(), rows.end());
    for (const auto& [e, c] : rows) out << e << ' ' << c << '\n';
  }
  if (pr.ext) {
    auto out = open_output(ctx.dir, "disc_mesh.txt");
    write_mesh(out, pr.ext->disc.mesh, ctx.header());
  }
  const auto& m = pr.base.mesh;
  ctx.out << fmt::format("mesh: {} vertices, {} triangles, {} edges, h = {:.4f}\n", m.num_vertices(),
                         m.num_triangles(), m.num_edges(), m.h());
  ctx.out << fmt::format("boundary: gamma0 {} edges ({:.1f}% of length), gamma1 {}, gammai {}\n",
                         pr.base.partition.gamma0.size(),
                         100.0 * total_length(m, pr.base.partition.gamma0) / m.boundary_length(),
                         pr.base.partition.gamma1.size(), pr.base.partition.gammai.size());
  return kExitOk;
}

int cmd_synth(const Context& ctx) {
  const auto pr = setup(ctx, false);
  auto out = open_output(ctx.dir, "data.txt");
  write_cauchy_data(out, pr.data, ctx.header());
  ctx.out << fmt::format("data: {} gamma0 edges, provenance {}, noise {}\n", pr.data.size(),
                         to_string(pr.data.provenance), pr.data.noise);
  return kExitOk;
}

int cmd_solve(const Context& ctx) {
  const auto pr = setup(ctx, ctx.config.extension);
  const QrParams p = params_of(ctx, pr);
  const QrSolution sol = pr.solver(ctx.config.extension)(p);
  {
    auto out = open_output(ctx.dir, "metrics.csv");
    write_metrics_csv(out, ctx.info, sol.params, sol.metrics, sol.wall_ms);
  }
  const auto& m = sol.metrics;
  ctx.out << fmt::format("{} delta = {:.3e}, eta = {:.4g}: L2 error {}, gamma0 {}, gamma1 {}, gammai {}, "
                         "||E|| = {:.4e}, ||F|| = {:.4e}\n",
                         to_string(p.variant), p.delta, p.eta, metric(m.err_l2_omega), metric(m.err_gamma0),
                         metric(m.err_gamma1), metric(m.err_gammai), m.norm_e, m.norm_f);
  if (ctx.config.svg) {
    std::vector<Complex> field = sol.e;
    if (!pr.reference.empty()) field = [&] {
      std::vector<Complex> d(sol.e.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = sol.e[i] - pr.reference[i];
      return d;
    }();
    auto out = open_output(ctx.dir, "solve.svg");
    write_field_svg(out, pr.reference.empty() ? "|E_delta|" : "|E - E_delta|", pr.base.mesh,
                    centroid_magnitude(pr.base.mesh, field));
  }
  return kExitOk;
}

void write_choice(std::ostream& out, const SweepRecord& rec, const Choice& choice, double eta) {
  if (!choice.index) {
    out << "optimal_delta none\n";
    return;
  }
  const auto& p = rec.points[*choice.index];
  out << fmt::format("optimal_delta {:.10e}\nrule {}\n", p.params.delta, choice.rule);
  out << fmt::format("err_L2_Omega {}\nerr_Gamma0 {}\nerr_Gamma1 {}\nerr_Gammai {}\nnorm_F {:.10e}\n",
                     metric(p.metrics.err_l2_omega), metric(p.metrics.err_gamma0), metric(p.metrics.err_gamma1),
                     metric(p.metrics.err_gammai), p.metrics.norm_f);
  if (p.params.variant != Variant::QR) {
    out << fmt::format("eta {:.10e}\neta_over_delta {:.10e}\n", eta, eta / p.params.delta);
  }
}

int cmd_sweep(const Context& ctx) {
  const auto pr = setup(ctx, ctx.config.extension);
  const auto rec = run_sweep(ctx, pr, ctx.config.extension);
  {
    auto out = open_output(ctx.dir, "sweep.csv");
    write_sweep_csv(out, ctx.info, rec);
  }
  const Choice choice = choose(ctx, rec, !pr.reference.empty());
  {
    auto out = open_output(ctx.dir, "summary.txt");
    out << header_lines(ctx.info);
    write_choice(out, rec, choice, pr.eta);
  }
  if (choice.index) {
    const auto& p = rec.points[*choice.index];
    ctx.out << fmt::format("{} points; optimal delta {:.3e} ({}): L2 error {}, gammai {}\n", rec.points.size(),
                           p.params.delta, choice.rule, metric(p.metrics.err_l2_omega), metric(p.metrics.err_gammai));
  }
  if (ctx.config.svg) write_sweep_svg(ctx, rec, choice.index, "sweep.svg", "delta sweep");
  return kExitOk;
}

int cmd_lcurve(const Context& ctx) {
  const auto pr = setup(ctx, ctx.config.extension);
  const auto rec = run_sweep(ctx, pr, ctx.config.extension);
  std::vector<LCurvePoint> pts;
  for (const auto& p : rec.points) {
    if (p.ok) pts.push_back({p.params.delta, p.metrics.norm_f, p.metrics.norm_e});
  }
  const auto lc = l_curve(pts);
  {
    auto out = open_output(ctx.dir, "sweep.csv");
    write_sweep_csv(out, ctx.info, rec);
  }
  {
    auto out = open_output(ctx.dir, "lcurve.csv");
    write_lcurve_csv(out, ctx.info, lc);
  }
  {
    auto out = open_output(ctx.dir, "corner.txt");
    out << header_lines(ctx.info);
    if (lc.degenerate) {
      out << "corner none\ndegenerate true\n";
    } else {
      out << fmt::format("corner_delta {:.10e}\nangle_deg {:.6f}\ndegenerate false\n", lc.corner_delta(),
                         lc.angles[*lc.corner]);
    }
    if (!pr.reference.empty()) {
      const auto i = rec.argmin_l2();
      if (i) {
        const double best = rec.points[*i].params.delta;
        out << fmt::format("error_min_delta {:.10e}\n", best);
        if (!lc.degenerate) out << fmt::format("decades_apart {:.4f}\n", std::abs(std::log10(lc.corner_delta() / best)));
      }
    }
  }
  if (lc.degenerate) {
    ctx.warn("degenerate L-curve: no corner");
  } else {
    ctx.out << fmt::format("L-curve corner at delta {:.3e} (angle {:.2f} deg)\n", lc.corner_delta(),
                           lc.angles[*lc.corner]);
  }
  if (ctx.config.svg) {
    Series s{"L-curve", {}, {}, lc.corner};
    for (const auto& p : lc.curve) {
      s.x.push_back(p.norm_f);
      s.y.push_back(p.norm_e);
    }
    auto out = open_output(ctx.dir, "lcurve.svg");
    write_plot_svg(out, "L-curve", "||F||", "||E||", {s});
  }
  return kExitOk;
}

int cmd_extend(const Context& ctx) {
  if (ctx.config.shape != Shape::Ring) throw ConfigError("extend needs domain.shape = ring");
  const auto pr = setup(ctx, true);
  if (pr.reference.empty()) throw ConfigError("extend compares errors and needs plane_wave or oracle data");
  const auto plain = run_sweep(ctx, pr, false);
  const auto ext = run_sweep(ctx, pr, true);
  {
    auto out = open_output(ctx.dir, "plain.csv");
    write_sweep_csv(out, ctx.info, plain);
  }
  {
    auto out = open_output(ctx.dir, "extended.csv");
    write_sweep_csv(out, ctx.info, ext);
  }
  const Choice a = choose(ctx, plain, true);
  const Choice b = choose(ctx, ext, true);
  if (!a.index || !b.index) throw NumericalError("no successful sweep point");
  const auto& pa = plain.points[*a.index];
  const auto& pb = ext.points[*b.index];
  const double ratio = pa.metrics.err_gammai / pb.metrics.err_gammai;
  {
    auto out = open_output(ctx.dir, "extend_summary.txt");
    out << header_lines(ctx.info);
    out << "[plain]\n";
    write_choice(out, plain, a, pr.eta);
    out << "[extended]\n";
    write_choice(out, ext, b, pr.eta);
    out << fmt::format("gammai_improvement {:.6e}\n", ratio);
  }
  ctx.out << fmt::format("gammai error at optimal delta: plain {} (delta {:.2e}), extended {} (delta {:.2e}), "
                         "improvement {:.1f}x\n",
                         metric(pa.metrics.err_gammai), pa.params.delta, metric(pb.metrics.err_gammai),
                         pb.params.delta, ratio);
  if (ctx.config.svg) {
    write_sweep_svg(ctx, plain, a.index, "plain.svg", "plain ring");
    write_sweep_svg(ctx, ext, b.index, "extended.svg", "extension/restriction");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check

struct CheckLine {
  std::string name;
  double value;
  double limit;
  bool ok() const { return value <= limit; }
};

int cmd_check(const Context& ctx) {
  const auto pr = setup(ctx, false);
  const auto& f = pr.base.forms;
  std::vector<CheckLine> lines;

  validate_partition(pr.base.mesh, pr.base.partition);

  // Symmetric part of the mixed matrix against the block norms.
  {
    std::mt19937_64 rng(*ctx.options.seed);
    std::normal_distribution<double> nd;
    double worst = 0.0;
    const auto loads = loads_for(f, pr.data);
    for (Variant v : {Variant::QR, Variant::RQR, Variant::RRQR}) {
      QrParams p = params_of(ctx, pr);
      p.variant = v;
      const auto sys = build_system(f, loads, p);
      const auto ne = e_norm_matrix(f, p);
      const auto nf = f_norm_matrix(f, p);
      for (int t = 0; t < 20; ++t) {
        std::vector<Complex> e(f.size(), 0.0), g(f.size(), 0.0);
        for (auto i : sys.e_free) e[i] = {nd(rng), nd(rng)};
        for (auto i : sys.f_free) g[i] = {nd(rng), nd(rng)};
        const double lhs = linalg::quadratic_form(sys.matrix, sys.pack(e, g));
        const double rhs = linalg::quadratic_form(ne, e) + linalg::quadratic_form(nf, g);
        worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
      }
    }
    lines.push_back({"coercivity identity (rel)", worst, 1e-12});
  }

  // The computed solution satisfies the variational equations.
  {
    const QrParams p = params_of(ctx, pr);
    const auto loads = loads_for(f, pr.data);
    const auto sol = solve_system(f, loads, p);
    lines.push_back({"variational residual (rel)", variational_residual(f, loads, p, sol.e, sol.f), 1e-10});
    const auto check = tikhonov_gradient_check(f, loads, p, sol.e, 5, *ctx.options.seed);
    lines.push_back({"Tikhonov stationarity (rel)", check.max_relative, 1e-6});
  }

  // Relaxed estimates with exact discrete data.
  {
    const auto oracle = discrete_oracle(pr.base.mesh, pr.base.partition, f, ctx.config.kappa, *ctx.options.seed);
    const auto loads = loads_for(f, oracle.data);
    double worst = 0.0;
    for (Variant v : {Variant::RQR, Variant::RRQR}) {
      QrParams p;
      p.variant = v;
      const auto big = f_norm_matrix(f, [&] {
        QrParams w;
        w.variant = v;
        return w;
      }());
      const double eh = std::sqrt(linalg::quadratic_form(big, oracle.exact));
      for (double delta : {1e-6, 1e-3, 1.0}) {
        for (double eta : {0.1, 1.0, 10.0}) {
          p.delta = delta;
          p.eta = eta;
          if (v == Variant::RRQR) p.nu = delta;
          const auto sol = solve_system(f, loads, p);
          std::vector<Complex> d(f.size());
          for (std::size_t i = 0; i < d.size(); ++i) d[i] = sol.e[i] - oracle.exact[i];
          const double fn = std::sqrt(linalg::quadratic_form(big, sol.f));
          const double tn = std::sqrt(linalg::quadratic_form(f.b_gamma0, d));
          worst = std::max({worst, fn / (std::sqrt(delta) * eh), tn * eta / (std::sqrt(delta) * eh)});
        }
      }
    }
    lines.push_back({"relaxed estimates (ratio)", worst, 1.0 + 1e-10});
  }

  // Sparse against dense on a coarse copy of the domain.
  {
    const auto& c = ctx.config;
    Mesh mesh = c.shape == Shape::Disc ? generate_disc(1.0, 0.45) : generate_ring(c.r_inner, 1.0, 0.45);
    BoundaryPartition part;
    try {
      part = partition_boundary(mesh, c.partition);
    } catch (const InvalidArgument&) {
      part = partition_boundary(mesh, PartitionSpec::g34());  // electrodes may not fit the coarse mesh
    }
    const auto small = discretize(std::move(mesh), std::move(part), c.k, c.kappa_field());
    std::vector<Complex> ones(small.partition.gamma0.size(), Complex(1.0, 0.5));
    const auto loads = boundary_trace_terms(small.forms, small.partition.gamma0, ones, ones);
    double worst = 0.0;
    for (Variant v : {Variant::QR, Variant::RQR, Variant::RRQR}) {
      QrParams p = params_of(ctx, pr);
      p.variant = v;
      const auto sys = build_system(small.forms, loads, p);
      if (sys.size() > linalg::kDenseSolveLimit) continue;
      const auto xs = linalg::sparse_lu_solve(sys.matrix, sys.rhs);
      const auto xd = linalg::dense_solve(linalg::DenseMatrix::from_sparse(sys.matrix), sys.rhs);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        num += (xs[i] - xd[i]) * (xs[i] - xd[i]);
        den += xd[i] * xd[i];
      }
      worst = std::max(worst, std::sqrt(num / den));
    }
    lines.push_back({"sparse vs dense (rel)", worst, 1e-10});
  }

  if (ctx.config.noise > 0.0) {
    // Rebuild the clean data to measure the applied perturbation.
    Context clean_ctx{ctx.config, ctx.options, ctx.info, ctx.dir, ctx.out, ctx.err};
    clean_ctx.config.noise = 0.0;
    clean_ctx.config.eta = 1.0;
    const auto clean = setup(clean_ctx, false);
    auto rel = [](const std::vector<Complex>& a, const std::vector<Complex>& b) {
      double n = 0.0, d = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        n += std::norm(a[i] - b[i]);
        d += std::norm(b[i]);
      }
      return std::sqrt(n / d);
    };
    const double p = ctx.config.noise;
    const double dev = std::max(std::abs(rel(pr.data.f, clean.data.f) - p), std::abs(rel(pr.data.g, clean.data.g) - p)) / p;
    lines.push_back({"noise calibration (rel)", dev, 1e-14});
  }

  bool ok = true;
  auto out = open_output(ctx.dir, "check_report.txt");
  out << header_lines(ctx.info);
  for (const auto& l : lines) {
    const std::string text =
        fmt::format("[{}] {}: {:.3e} (limit {:.1e})\n", l.ok() ? "ok" : "violation", l.name, l.value, l.limit);
    out << text;
    ctx.out << text;
    ok = ok && l.ok();
  }
  return ok ? kExitOk : kExitInvariant;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cauchy data completion for 2D time-harmonic Maxwell by quasi-reversibility", "qrmaxwell"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--config", opt.config_path, "INI experiment configuration");
  app.add_option("--set", opt.overrides, "Override one setting, section.key=value (repeatable)");
  app.add_option("--seed", opt.seed, "Seed for every random step");
  app.add_option("--jobs", opt.jobs, "Sweep threads")->check(CLI::Range(1u, 256u));
  app.add_option("--out", opt.out, "Output directory (overrides output.dir)");
  app.add_flag("--strict", opt.strict, "Treat warnings as errors");
  app.add_flag("--svg", opt.svg, "Also write SVG plots");
  app.add_flag("--timing", opt.timing, "Record wall-clock times in CSV output (breaks byte reproducibility)");

  using Command = std::function<int(const Context&)>;
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"mesh", "Generate the mesh and boundary partition", cmd_mesh},
      {"synth", "Generate Cauchy data on gamma0", cmd_synth},
      {"solve", "Solve once at the configured delta", cmd_solve},
      {"sweep", "Sweep delta and report the optimal value", cmd_sweep},
      {"lcurve", "Sweep delta and locate the L-curve corner", cmd_lcurve},
      {"extend", "Compare plain ring solves with extension/restriction", cmd_extend},
      {"check", "Run the invariant checks on the configured problem", cmd_check},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help, fn] : commands) subs.push_back(app.add_subcommand(name, help));

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    ExperimentConfig config = opt.config_path.empty() ? ExperimentConfig{} : load_config(opt.config_path);
    apply_overrides(config, opt.overrides);
    if (!opt.out.empty()) config.out_dir = opt.out;
    if (opt.svg) config.svg = true;
    config.validate();

    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const std::string& name = std::get<0>(commands[i]);
      RunInfo info{name, fnv1a(config.canonical()), opt.seed, opt.timing};
      const Context ctx{config, opt, info, fs::path(config.out_dir), out, err};
      if (name == "check") ctx.seed();  // the oracle and random vectors need one
      return std::get<2>(commands[i])(ctx);
    }
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace qrm::cli
