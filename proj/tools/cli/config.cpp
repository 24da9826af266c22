#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "qrm/error.hpp"

namespace qrm::cli {

namespace {

using boost::property_tree::ptree;

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
  }
  if (used != text.size() || !std::isfinite(v)) throw ConfigError(fmt::format("{}: '{}' is not a number", key, text));
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_double(key, text);
  if (v < 1.0 || v != std::floor(v) || v > 1e6) throw ConfigError(fmt::format("{}: expected a positive integer", key));
  return static_cast<std::size_t>(v);
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "on" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "off" || text == "0" || text == "no") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

/// "1+1i", "2-0.5i", "3", "0.5i".
Complex parse_complex(const std::string& key, const std::string& text) {
  static const std::regex full(R"(^([+-]?[0-9.]+(?:[eE][+-]?[0-9]+)?)([+-][0-9.]*(?:[eE][+-]?[0-9]+)?)i$)");
  static const std::regex imag(R"(^([+-]?[0-9.]*(?:[eE][+-]?[0-9]+)?)i$)");
  std::string s;
  for (char c : text) {
    if (c != ' ') s += c;
  }
  std::smatch m;
  auto part = [&](std::string p) {
    if (p == "+" || p.empty()) p = "1";
    if (p == "-") p = "-1";
    return parse_double(key, p);
  };
  if (std::regex_match(s, m, full)) return {parse_double(key, m[1]), part(m[2])};
  if (std::regex_match(s, m, imag)) return {0.0, part(m[1])};
  return {parse_double(key, s), 0.0};
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

/// Sets one "section.key" from text. Throws ConfigError for unknown keys.
void set_value(ExperimentConfig& c, const std::string& section, const std::string& key, const std::string& raw) {
  const std::string name = section + "." + key;
  const std::string v = raw;
  if (section == "domain") {
    if (key == "shape") {
      const auto s = lower(v);
      if (s == "disc") c.shape = Shape::Disc;
      else if (s == "ring") c.shape = Shape::Ring;
      else throw ConfigError(fmt::format("{}: expected disc or ring, got '{}'", name, v));
      return;
    }
    if (key == "r_inner") return void(c.r_inner = parse_double(name, v));
    if (key == "h") return void(c.h = parse_double(name, v));
  } else if (section == "partition") {
    if (key == "kind") {
      try {
        c.partition.kind = partition_kind_from_string(v);
      } catch (const Error& e) {
        throw ConfigError(fmt::format("{}: {}", name, e.what()));
      }
      return;
    }
    if (key == "electrodes") return void(c.partition.electrodes = static_cast<int>(parse_count(name, v)));
    if (key == "electrode_length") return void(c.partition.electrode_length = parse_double(name, v));
    if (key == "intervals") {
      // "a:b, c:d" in radians
      c.partition.intervals.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError(fmt::format("{}: expected a:b pairs", name));
        auto trim = [](std::string s) {
          s.erase(0, s.find_first_not_of(' '));
          s.erase(s.find_last_not_of(' ') + 1);
          return s;
        };
        c.partition.intervals.emplace_back(parse_double(name, trim(item.substr(0, colon))),
                                           parse_double(name, trim(item.substr(colon + 1))));
      }
      return;
    }
  } else if (section == "physics") {
    if (key == "k") return void(c.k = parse_double(name, v));
    if (key == "kappa") return void(c.kappa = parse_complex(name, v));
    if (key == "kappa_profile") return void(c.kappa_profile = lower(v));
    if (key == "bump_amplitude") return void(c.bump_amplitude = parse_double(name, v));
  } else if (section == "data") {
    if (key == "source") {
      const auto s = lower(v);
      if (s == "plane_wave") c.source = DataSource::PlaneWave;
      else if (s == "oracle") c.source = DataSource::Oracle;
      else if (s == "file") c.source = DataSource::File;
      else throw ConfigError(fmt::format("{}: expected plane_wave, oracle or file, got '{}'", name, v));
      return;
    }
    if (key == "angle") return void(c.angle = parse_double(name, v));
    if (key == "file") return void(c.data_file = v);
    if (key == "noise") return void(c.noise = parse_double(name, v));
  } else if (section == "method") {
    if (key == "variant") {
      try {
        c.variant = variant_from_string(v);
      } catch (const Error& e) {
        throw ConfigError(fmt::format("{}: {}", name, e.what()));
      }
      return;
    }
    if (key == "delta") return void(c.delta = parse_double(name, v));
    if (key == "eta") {
      if (lower(v) == "auto") c.eta.reset();
      else c.eta = parse_double(name, v);
      return;
    }
    if (key == "nu") {
      if (lower(v) == "delta") c.nu.reset();
      else c.nu = parse_double(name, v);
      return;
    }
    if (key == "nu_inner") {
      if (lower(v) == "nu") c.nu_inner.reset();
      else c.nu_inner = parse_double(name, v);
      return;
    }
    if (key == "extension") return void(c.extension = parse_bool(name, v));
  } else if (section == "sweep") {
    if (key == "delta_min") return void(c.delta_min = parse_double(name, v));
    if (key == "delta_max") return void(c.delta_max = parse_double(name, v));
    if (key == "points") return void(c.points = parse_count(name, v));
  } else if (section == "output") {
    if (key == "dir") return void(c.out_dir = v);
    if (key == "svg") return void(c.svg = parse_bool(name, v));
  } else {
    throw ConfigError(fmt::format("unknown section [{}]", section));
  }
  throw ConfigError(fmt::format("unknown key '{}'", name));
}

}  // namespace

KappaField ExperimentConfig::kappa_field() const {
  const Complex k0 = kappa;
  if (kappa_profile == "bump") {
    const double a = bump_amplitude;
    return [k0, a](Point x) { return k0 * (1.0 + a * std::exp(-(x.x * x.x + x.y * x.y) / 0.08)); };
  }
  return [k0](Point) { return k0; };
}

QrParams ExperimentConfig::params() const {
  QrParams p;
  p.variant = variant;
  p.delta = delta;
  p.eta = eta.value_or(1.0);
  p.nu = nu;
  p.nu_inner = nu_inner;
  return p;
}

std::vector<double> ExperimentConfig::grid() const { return geometric_grid(delta_min, delta_max, points); }

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(h > 0.0 && h <= 0.5, "domain.h must lie in (0, 0.5]");
  require(shape == Shape::Disc || (r_inner > 0.0 && r_inner < 1.0), "domain.r_inner must lie in (0, 1)");
  require(shape == Shape::Ring || !extension, "method.extension needs domain.shape = ring");
  require(k > 0.0, "physics.k must be positive");
  require(kappa.real() > 0.0, "physics.kappa needs a positive real part");
  require(kappa_profile == "constant" || kappa_profile == "bump", "physics.kappa_profile: expected constant or bump");
  require(kappa_profile == "constant" || source != DataSource::PlaneWave,
          "plane-wave data need physics.kappa_profile = constant; use data.source = oracle");
  require(bump_amplitude > -1.0, "physics.bump_amplitude must exceed -1");
  require(noise >= 0.0, "data.noise must be >= 0");
  require(source != DataSource::File || !data_file.empty(), "data.source = file needs data.file");
  require(delta > 0.0, "method.delta must be positive");
  require(!eta || *eta > 0.0, "method.eta must be positive or auto");
  require(!nu || *nu > 0.0, "method.nu must be positive or delta");
  require(!nu_inner || *nu_inner > 0.0, "method.nu_inner must be positive or nu");
  require(delta_min > 0.0 && delta_max >= delta_min, "sweep: need 0 < delta_min <= delta_max");
  require(points == 1 || delta_max > delta_min, "sweep: several points need delta_min < delta_max");
  require(!out_dir.empty(), "output.dir must not be empty");
  if (partition.kind == PartitionSpec::Kind::Intervals) require(!partition.intervals.empty(), "partition.intervals is empty");
  require(partition.electrodes > 0 && partition.electrode_length > 0.0, "partition: electrodes need a positive count and length");
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["domain.shape"] = shape == Shape::Disc ? "disc" : "ring";
  kv["domain.r_inner"] = num(r_inner);
  kv["domain.h"] = num(h);
  kv["partition.kind"] = to_string(partition.kind);
  kv["partition.electrodes"] = std::to_string(partition.electrodes);
  kv["partition.electrode_length"] = num(partition.electrode_length);
  std::string iv;
  for (const auto& [a, b] : partition.intervals) iv += (iv.empty() ? "" : ",") + num(a) + ":" + num(b);
  kv["partition.intervals"] = iv;
  kv["physics.k"] = num(k);
  kv["physics.kappa"] = num(kappa.real()) + (kappa.imag() < 0 ? "" : "+") + num(kappa.imag()) + "i";
  kv["physics.kappa_profile"] = kappa_profile;
  kv["physics.bump_amplitude"] = num(bump_amplitude);
  const char* src[] = {"plane_wave", "oracle", "file"};
  kv["data.source"] = src[static_cast<int>(source)];
  kv["data.angle"] = num(angle);
  kv["data.file"] = data_file;
  kv["data.noise"] = num(noise);
  kv["method.variant"] = to_string(variant);
  kv["method.delta"] = num(delta);
  kv["method.eta"] = eta ? num(*eta) : "auto";
  kv["method.nu"] = nu ? num(*nu) : "delta";
  kv["method.nu_inner"] = nu_inner ? num(*nu_inner) : "nu";
  kv["method.extension"] = extension ? "true" : "false";
  kv["sweep.delta_min"] = num(delta_min);
  kv["sweep.delta_max"] = num(delta_max);
  kv["sweep.points"] = std::to_string(points);
  // output.* does not change results and stays out of the hash.
  std::string out;
  for (const auto& [key, value] : kv) out += key + " = " + value + "\n";
  return out;
}

namespace {

// read_ini only knows whole-line comments; "h = 0.1  ; coarse" keeps the tail.
std::string strip_inline_comment(std::string v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if ((v[i] == ';' || v[i] == '#') && (v[i - 1] == ' ' || v[i - 1] == '\t')) {
      v.erase(i);
      break;
    }
  }
  v.erase(v.find_last_not_of(" \t") + 1);
  return v;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source_name) {
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source_name, e.line(), e.message()));
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(fmt::format("{}: key '{}' outside of a [section]", source_name, section));
    }
    for (const auto& [key, value] : body) set_value(c, section, key, strip_inline_comment(value.data()));
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path));
  return parse_config(in, path);
}

void apply_overrides(ExperimentConfig& config, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError(fmt::format("override '{}': expected section.key=value", o));
    }
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    set_value(config, trim(o.substr(0, dot)), trim(o.substr(dot + 1, eq - dot - 1)), trim(o.substr(eq + 1)));
  }
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace qrm::cli
