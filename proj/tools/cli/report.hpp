#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qrm/driver.hpp"

namespace qrm::cli {

/// Provenance stamped on every output file.
struct RunInfo {
  std::string command;
  std::uint64_t config_hash = 0;
  std::optional<std::uint64_t> seed;
  bool timing = false;  ///< write measured wall_ms instead of 0
};

std::string tool_version();

/// "# qrmaxwell <version>" etc., one '#'-prefixed line each.
std::string header_lines(const RunInfo& info);

/// Sweep CSV: delta, err_L2_Omega, err_Gamma0, err_Gamma1, err_Gammai,
/// norm_F, eta, nu, wall_ms. Failed points keep their row with NaN metrics.
void write_sweep_csv(std::ostream& out, const RunInfo& info, const SweepRecord& record);

/// Sweep columns plus a trailing norm_E, one row.
void write_metrics_csv(std::ostream& out, const RunInfo& info, const QrParams& params,
                       const ErrorMetrics& metrics, double wall_ms);

/// delta, norm_F, norm_E, angle_deg, corner.
void write_lcurve_csv(std::ostream& out, const RunInfo& info, const LCurveResult& lc);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::optional<std::size_t> marker;
};

/// Log-log line plot.
void write_plot_svg(std::ostream& out, const std::string& title, const std::string& xlabel,
                    const std::string& ylabel, const std::vector<Series>& series);

/// Triangles coloured by a per-triangle value (linear grey-to-red scale).
void write_field_svg(std::ostream& out, const std::string& title, const Mesh& mesh,
                     const std::vector<double>& values);

/// |u_h| at each triangle centroid for a DOF vector.
std::vector<double> centroid_magnitude(const Mesh& mesh, std::span<const Complex> dofs);

/// Opens `dir/name` for writing, creating `dir`. Throws qrm::Error on failure.
std::ofstream open_output(const std::filesystem::path& dir, const std::string& name);

}  // namespace qrm::cli
