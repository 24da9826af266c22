#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "qrm/error.hpp"
#include "qrm/mesh.hpp"

namespace qrm {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double polar_angle(Point p) {
  double a = std::atan2(p.y, p.x);
  if (a < 0.0) a += kTwoPi;
  return a;
}

double mean_radius(const Mesh& mesh, const std::vector<int>& loop) {
  double s = 0.0;
  for (int e : loop) {
    const Point m = mesh.edge_midpoint(e);
    s += std::hypot(m.x, m.y);
  }
  return s / static_cast<double>(loop.size());
}

struct Loops {
  std::vector<int> outer;
  std::vector<int> inner;
};

Loops split_loops(const Mesh& mesh) {
  const auto& loops = mesh.boundary_loops();
  if (loops.size() == 1) return {loops[0], {}};
  if (loops.size() == 2) {
    if (mean_radius(mesh, loops[0]) >= mean_radius(mesh, loops[1])) return {loops[0], loops[1]};
    return {loops[1], loops[0]};
  }
  throw InvalidArgument("partition: expected one or two boundary loops, found " +
                        std::to_string(loops.size()));
}

}  // namespace

std::string to_string(PartitionSpec::Kind kind) {
  switch (kind) {
    case PartitionSpec::Kind::G34: return "G34";
    case PartitionSpec::Kind::GE37: return "GE37";
    case PartitionSpec::Kind::GExt: return "GExt";
    case PartitionSpec::Kind::Intervals: return "intervals";
  }
  return "?";
}

PartitionSpec::Kind partition_kind_from_string(const std::string& name) {
  if (name == "G34") return PartitionSpec::Kind::G34;
  if (name == "GE37") return PartitionSpec::Kind::GE37;
  if (name == "GExt") return PartitionSpec::Kind::GExt;
  if (name == "intervals") return PartitionSpec::Kind::Intervals;
  throw InvalidArgument("unknown partition configuration '" + name + "'");
}

double total_length(const Mesh& mesh, const std::vector<int>& edges) {
  double s = 0.0;
  for (int e : edges) s += mesh.edge_length(e);
  return s;
}

BoundaryPartition partition_boundary(const Mesh& mesh, const PartitionSpec& spec) {
  const Loops loops = split_loops(mesh);
  double outer_radius = 0.0;
  for (int e : loops.outer) {
    for (int v : mesh.edges()[e].v) {
      outer_radius = std::max(outer_radius, std::hypot(mesh.vertices()[v].x, mesh.vertices()[v].y));
    }
  }

  std::function<bool(double)> accessible;
  switch (spec.kind) {
    case PartitionSpec::Kind::G34:
      accessible = [](double a) { return a <= 1.5 * std::numbers::pi; };
      break;
    case PartitionSpec::Kind::GE37: {
      if (spec.electrodes < 1 || !(spec.electrode_length > 0.0)) {
        throw InvalidArgument("GE37: need at least one electrode of positive length");
      }
      const double width = spec.electrode_length / outer_radius;
      if (spec.electrodes * width > kTwoPi) {
        throw InvalidArgument("GE37: electrodes overlap (total length exceeds the perimeter)");
      }
      const int n = spec.electrodes;
      accessible = [n, width](double a) {
        const double pitch = kTwoPi / n;
        const double k = std::round(a / pitch);
        return std::abs(a - k * pitch) <= 0.5 * width;
      };
      break;
    }
    case PartitionSpec::Kind::GExt:
      if (loops.inner.empty()) throw InvalidArgument("GExt requires a ring (two boundary loops)");
      accessible = [](double) { return true; };
      break;
    case PartitionSpec::Kind::Intervals: {
      if (spec.intervals.empty()) throw InvalidArgument("intervals: empty interval list");
      for (const auto& [a, b] : spec.intervals) {
        if (!(b > a) || b - a > kTwoPi) throw InvalidArgument("intervals: need a < b <= a + 2pi");
      }
      accessible = [iv = spec.intervals](double a) {
        return std::any_of(iv.begin(), iv.end(), [a](const auto& ab) {
          const double d = std::fmod(std::fmod(a - ab.first, kTwoPi) + kTwoPi, kTwoPi);
          return d <= ab.second - ab.first;
        });
      };
      break;
    }
  }

  BoundaryPartition p;
  for (int e : loops.outer) {
    (accessible(polar_angle(mesh.edge_midpoint(e))) ? p.gamma0 : p.gamma1).push_back(e);
  }
  p.gammai = loops.inner;
  std::sort(p.gamma0.begin(), p.gamma0.end());
  std::sort(p.gamma1.begin(), p.gamma1.end());
  std::sort(p.gammai.begin(), p.gammai.end());
  validate_partition(mesh, p);
  return p;
}

BoundaryPartition partition_from_gamma0(const Mesh& mesh, std::vector<int> gamma0) {
  const Loops loops = split_loops(mesh);
  std::sort(gamma0.begin(), gamma0.end());
  BoundaryPartition p;
  p.gamma0 = gamma0;
  for (int e : loops.outer) {
    if (!std::binary_search(gamma0.begin(), gamma0.end(), e)) p.gamma1.push_back(e);
  }
  p.gammai = loops.inner;
  std::sort(p.gamma1.begin(), p.gamma1.end());
  std::sort(p.gammai.begin(), p.gammai.end());
  validate_partition(mesh, p);
  return p;
}

void validate_partition(const Mesh& mesh, const BoundaryPartition& partition) {
  if (partition.gamma0.empty()) throw InvalidArgument("partition: gamma0 is empty");
  std::vector<int> seen(mesh.num_edges(), 0);
  for (const auto* set : {&partition.gamma0, &partition.gamma1, &partition.gammai}) {
    for (int e : *set) {
      if (e < 0 || static_cast<std::size_t>(e) >= mesh.num_edges()) {
        throw InvalidArgument("partition: edge index out of range");
      }
      if (!mesh.is_boundary_edge(e)) throw InvalidArgument("partition: interior edge tagged");
      if (seen[e]++) throw InvalidArgument("partition: edge tagged twice");
    }
  }
  for (int e : mesh.boundary_edges()) {
    if (!seen[e]) throw InvalidArgument("partition: boundary edge left untagged");
  }
}

}  // namespace qrm
