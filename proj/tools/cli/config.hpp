#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qrm/driver.hpp"

namespace qrm::cli {

/// Bad config file, bad flag or inconsistent settings. Exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A checked invariant failed, or a warning under --strict. Exit code 3.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Shape { Disc, Ring };
enum class DataSource { PlaneWave, Oracle, File };

struct ExperimentConfig {
  // [domain]
  Shape shape = Shape::Disc;
  double r_inner = 0.75;
  double h = 0.1;
  // [partition]
  PartitionSpec partition;
  // [physics]
  double k = 1.0;
  Complex kappa{1.0, 1.0};
  std::string kappa_profile = "constant";  ///< constant | bump
  double bump_amplitude = 0.5;
  // [data]
  DataSource source = DataSource::PlaneWave;
  double angle = 0.0;  ///< plane-wave direction, radians
  std::string data_file;
  double noise = 0.0;
  // [method]
  Variant variant = Variant::QR;
  double delta = 1e-6;
  std::optional<double> eta = 1.0;  ///< nullopt: automatic
  std::optional<double> nu;         ///< nullopt: nu = delta
  std::optional<double> nu_inner;   ///< nullopt: same as nu
  bool extension = false;
  // [sweep]
  double delta_min = 1e-12;
  double delta_max = 1e-2;
  std::size_t points = 25;
  // [output]
  std::string out_dir = "out";
  bool svg = false;

  /// True when any step draws random numbers (noise or oracle direction).
  bool stochastic() const { return noise > 0.0 || source == DataSource::Oracle; }
  KappaField kappa_field() const;
  QrParams params() const;
  std::vector<double> grid() const;

  /// Every setting as sorted "section.key = value" lines; the config hash
  /// is taken over this text.
  std::string canonical() const;
  void validate() const;
};

/// Parses INI text ("[section]" headers, "key = value", ';' or '#'
/// comments). Unknown sections or keys are errors.
ExperimentConfig parse_config(std::istream& in, const std::string& source_name = "config");
ExperimentConfig load_config(const std::string& path);

/// Applies "section.key=value" overrides on top of a parsed config.
void apply_overrides(ExperimentConfig& config, const std::vector<std::string>& overrides);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

}  // namespace qrm::cli
