#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qrm/error.hpp"

#ifndef QRM_VERSION
#define QRM_VERSION "unknown"
#endif

namespace qrm::cli {

namespace {

std::string value(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.10e}", v);
}

void row(std::ostream& out, const QrParams& p, const ErrorMetrics& m, double wall_ms, bool timing) {
  out << value(p.delta) << ',' << value(m.err_l2_omega) << ',' << value(m.err_gamma0) << ','
      << value(m.err_gamma1) << ',' << value(m.err_gammai) << ',' << value(m.norm_f) << ','
      << (p.variant == Variant::QR ? std::string("nan") : value(p.eta)) << ','
      << (p.variant == Variant::RRQR ? value(p.nu_outer_value()) : std::string("nan")) << ','
      << fmt::format("{:.3f}", timing ? wall_ms : 0.0) << '\n';
}

constexpr const char* kSweepColumns = "delta,err_L2_Omega,err_Gamma0,err_Gamma1,err_Gammai,norm_F,eta,nu,wall_ms\n";

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string tool_version() { return QRM_VERSION; }

std::string header_lines(const RunInfo& info) {
  std::string s = fmt::format("# qrmaxwell {}\n# command {}\n# config-hash {:016x}\n", tool_version(), info.command,
                              info.config_hash);
  s += info.seed ? fmt::format("# seed {}\n", *info.seed) : std::string("# seed none\n");
  return s;
}

void write_sweep_csv(std::ostream& out, const RunInfo& info, const SweepRecord& record) {
  out << header_lines(info) << kSweepColumns;
  const ErrorMetrics failed{NAN, NAN, NAN, NAN, NAN, NAN};
  for (const auto& p : record.points) row(out, p.params, p.ok ? p.metrics : failed, p.wall_ms, info.timing);
}

void write_metrics_csv(std::ostream& out, const RunInfo& info, const QrParams& params, const ErrorMetrics& metrics,
                       double wall_ms) {
  // Sweep columns plus ||E||, which a single solve reports as well.
  std::string columns = kSweepColumns;
  columns.insert(columns.size() - 1, ",norm_E");
  out << header_lines(info) << columns;
  std::ostringstream line;
  row(line, params, metrics, wall_ms, info.timing);
  std::string text = line.str();
  text.insert(text.size() - 1, "," + value(metrics.norm_e));
  out << text;
}

void write_lcurve_csv(std::ostream& out, const RunInfo& info, const LCurveResult& lc) {
  out << header_lines(info) << "delta,norm_F,norm_E,angle_deg,corner\n";
  for (std::size_t i = 0; i < lc.curve.size(); ++i) {
    const auto& p = lc.curve[i];
    out << value(p.delta) << ',' << value(p.norm_f) << ',' << value(p.norm_e) << ','
        << (std::isnan(lc.angles[i]) ? std::string("nan") : fmt::format("{:.6f}", lc.angles[i])) << ','
        << (lc.corner == i ? 1 : 0) << '\n';
  }
}

void write_plot_svg(std::ostream& out, const std::string& title, const std::string& xlabel, const std::string& ylabel,
                    const std::vector<Series>& series) {
  const double w = 640, h = 440, ml = 70, mr = 20, mt = 40, mb = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0)) continue;
      x0 = std::min(x0, std::log10(s.x[i]));
      x1 = std::max(x1, std::log10(s.x[i]));
      y0 = std::min(y0, std::log10(s.y[i]));
      y1 = std::max(y1, std::log10(s.y[i]));
    }
  }
  if (!(x1 >= x0)) x0 = 0, x1 = 1;
  if (!(y1 >= y0)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-9) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  auto px = [&](double x) { return ml + (std::log10(x) - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (std::log10(y) - y0) / (y1 - y0) * (h - mt - mb); };

  out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
                     "font-size=\"12\">\n",
                     w, h);
  out << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", ml, mt,
                     w - ml - mr, h - mt - mb);
  out << fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", w / 2,
                     escape(title));
  out << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (ml + w - mr) / 2, h - 12,
                     escape(xlabel));
  out << fmt::format("<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
                     (mt + h - mb) / 2, (mt + h - mb) / 2, escape(ylabel));
  for (int e = static_cast<int>(std::ceil(x0)); e <= static_cast<int>(std::floor(x1)); ++e) {
    const double x = px(std::pow(10.0, e));
    out << fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">1e{}</text>\n", x, h - mb + 16, e);
  }
  for (int e = static_cast<int>(std::ceil(y0)); e <= static_cast<int>(std::floor(y1)); ++e) {
    const double y = py(std::pow(10.0, e));
    out << fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">1e{}</text>\n", ml - 6, y + 4, e);
  }
  const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colours[k % 4];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (s.x[i] > 0.0 && s.y[i] > 0.0) pts += fmt::format("{:.1f},{:.1f} ", px(s.x[i]), py(s.y[i]));
    }
    out << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", c, pts);
    if (s.marker && s.x[*s.marker] > 0.0 && s.y[*s.marker] > 0.0) {
      out << fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"6\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                         px(s.x[*s.marker]), py(s.y[*s.marker]), c);
    }
    out << fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", ml + 10, mt + 16 + 16 * k, c,
                       escape(s.label));
  }
  out << "</svg>\n";
}

void write_field_svg(std::ostream& out, const std::string& title, const Mesh& mesh, const std::vector<double>& values) {
  const double size = 560, margin = 30;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& p : mesh.vertices()) {
    lo = std::min({lo, p.x, p.y});
    hi = std::max({hi, p.x, p.y});
  }
  const double scale = (size - 2 * margin) / std::max(hi - lo, 1e-12);
  const double vmax = values.empty() ? 1.0 : std::max(*std::max_element(values.begin(), values.end()), 1e-300);
  out << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" "
                     "font-size=\"12\">\n",
                     size, size + 20);
  out << fmt::format("<text x=\"{}\" y=\"16\" text-anchor=\"middle\">{} (max {:.3e})</text>\n", size / 2,
                     escape(title), vmax);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto p = mesh.triangle_points(t);
    const double s = std::clamp(values[t] / vmax, 0.0, 1.0);
    const int r = static_cast<int>(230 + 25 * s), g = static_cast<int>(230 * (1 - s)), b = static_cast<int>(230 * (1 - s));
    std::string pts;
    for (const auto& q : p) {
      pts += fmt::format("{:.2f},{:.2f} ", margin + (q.x - lo) * scale, 20 + margin + (hi - q.y) * scale);
    }
    out << fmt::format("<polygon points=\"{}\" fill=\"rgb({},{},{})\"/>\n", pts, r, g, b);
  }
  out << "</svg>\n";
}

std::vector<double> centroid_magnitude(const Mesh& mesh, std::span<const Complex> dofs) {
  std::vector<double> out(mesh.num_triangles());
  const std::array<double, 3> centroid{1.0 / 3, 1.0 / 3, 1.0 / 3};
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const LocalBasis b = local_basis(mesh.triangle_points(t), centroid);
    const auto& edges = mesh.triangle_edges(t);
    const auto& signs = mesh.triangle_edge_signs(t);
    Complex u[2] = {0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
      const Complex c = static_cast<double>(signs[k]) * dofs[edges[k]];
      u[0] += c * b.value[k][0];
      u[1] += c * b.value[k][1];
    }
    out[t] = std::sqrt(std::norm(u[0]) + std::norm(u[1]));
  }
  return out;
}

std::ofstream open_output(const std::filesystem::path& dir, const std::string& name) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
  return out;
}

}  // namespace qrm::cli
