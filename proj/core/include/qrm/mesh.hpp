#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace qrm {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }

/// Globally oriented edge, v[0] < v[1].
struct Edge {
  std::array<int, 2> v;
};

/// Triangulation of a planar domain with global edges and boundary data.
///
/// Triangles are counter-clockwise. Local edge k of a triangle joins local
/// vertices (k+1)%3 -> (k+2)%3 (the counter-clockwise direction); its sign is
/// +1 when that direction agrees with the global low->high orientation.
///
/// On a boundary edge the outward normal n and the tangent t = (n.y, -n.x)
/// fix the scalar tangential trace u.t. `trace_sign(e)` is t_e . t where t_e
/// is the global edge direction.
class Mesh {
 public:
  Mesh() = default;

  /// Validates and builds all derived connectivity. Throws InvalidArgument
  /// on out-of-range indices, non-positive triangles or non-manifold edges.
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::array<int, 3>& triangle_edges(std::size_t t) const { return tri_edges_[t]; }
  const std::array<int, 3>& triangle_edge_signs(std::size_t t) const { return tri_signs_[t]; }
  std::array<Point, 3> triangle_points(std::size_t t) const;
  double triangle_area(std::size_t t) const;

  /// Number of triangles sharing each edge (1 on the boundary, 2 inside).
  int edge_valence(std::size_t e) const { return edge_valence_[e]; }
  bool is_boundary_edge(std::size_t e) const { return edge_valence_[e] == 1; }
  double edge_length(std::size_t e) const;
  Point edge_midpoint(std::size_t e) const;

  /// Boundary edges in ascending edge index.
  const std::vector<int>& boundary_edges() const { return boundary_edges_; }
  Point outward_normal(std::size_t e) const;
  int trace_sign(std::size_t e) const;

  /// Closed boundary loops, each an ascending list of edge indices.
  const std::vector<std::vector<int>>& boundary_loops() const { return loops_; }

  /// Largest triangle diameter (longest edge).
  double h() const;
  double boundary_length() const;

 private:
  void build();

  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::array<int, 3>> tri_signs_;
  std::vector<int> edge_valence_;
  std::vector<int> boundary_edges_;
  std::vector<int> boundary_slot_;  // edge -> position in boundary_edges_, -1 inside
  std::vector<Point> normals_;      // per boundary slot
  std::vector<int> trace_signs_;    // per boundary slot
  std::vector<std::vector<int>> loops_;
};

/// Generated mesh plus sizing metadata.
Mesh generate_disc(double radius, double h_target);
Mesh generate_ring(double r_inner, double r_outer, double h_target);

/// A disc whose triangulation contains the ring r_inner <= r <= r_outer
/// exactly as `generate_ring` builds it. The ring's vertices keep their
/// relative order, so ring edges map to disc edges with identical
/// orientation.
struct NestedMeshes {
  Mesh disc;
  Mesh ring;
  std::vector<int> ring_to_disc_vertex;
  std::vector<int> ring_to_disc_edge;
};
NestedMeshes generate_nested(double r_inner, double r_outer, double h_target);

/// Ratio between the requested h and the nominal vertex spacing of the
/// polar generators.
inline constexpr double kSpacingFactor = 1.61;

// --------------------------------------------------------------------------
// Boundary partition

struct BoundaryPartition {
  std::vector<int> gamma0;  ///< accessible
  std::vector<int> gamma1;  ///< inaccessible, outer
  std::vector<int> gammai;  ///< inner loop of a ring
};

struct PartitionSpec {
  enum class Kind { G34, GE37, GExt, Intervals };
  Kind kind = Kind::G34;
  int electrodes = 37;
  double electrode_length = std::numbers::pi / 25.0;
  /// Angle intervals [a, b] in radians on the outer boundary (Kind::Intervals).
  std::vector<std::pair<double, double>> intervals;

  static PartitionSpec g34() { return {}; }
  static PartitionSpec ge37(int n = 37, double length = std::numbers::pi / 25.0) {
    PartitionSpec s;
    s.kind = Kind::GE37;
    s.electrodes = n;
    s.electrode_length = length;
    return s;
  }
  static PartitionSpec gext() {
    PartitionSpec s;
    s.kind = Kind::GExt;
    return s;
  }
  static PartitionSpec from_intervals(std::vector<std::pair<double, double>> iv) {
    PartitionSpec s;
    s.kind = Kind::Intervals;
    s.intervals = std::move(iv);
    return s;
  }
};

std::string to_string(PartitionSpec::Kind kind);
PartitionSpec::Kind partition_kind_from_string(const std::string& name);

/// Tags every boundary edge by the polar angle of its midpoint. With two
/// loops the inner one is always gammai.
BoundaryPartition partition_boundary(const Mesh& mesh, const PartitionSpec& spec);

/// gamma0 given explicitly; the remaining outer edges go to gamma1 and the
/// inner loop (if any) to gammai.
BoundaryPartition partition_from_gamma0(const Mesh& mesh, std::vector<int> gamma0);

/// Throws InvalidArgument unless the three sets partition the boundary and
/// gamma0 is nonempty.
void validate_partition(const Mesh& mesh, const BoundaryPartition& partition);

double total_length(const Mesh& mesh, const std::vector<int>& edges);

// --------------------------------------------------------------------------
// ASCII mesh format: "nv nt", nv lines "x y", nt lines "i j k"; '#' starts a
// comment. Edges are rebuilt on load.

struct MeshReadOptions {
  /// Reject clockwise triangles instead of reorienting them.
  bool strict = true;
};

struct MeshReadResult {
  Mesh mesh;
  std::vector<std::string> warnings;
};

MeshReadResult read_mesh(std::istream& in, const MeshReadOptions& options = {});
void write_mesh(std::ostream& out, const Mesh& mesh, const std::string& header = {});

}  // namespace qrm
