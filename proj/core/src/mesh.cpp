#include "qrm/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>

#include "qrm/error.hpp"

namespace qrm {
namespace {

double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  build();
}

void Mesh::build() {
  const int nv = static_cast<int>(vertices_.size());
  if (triangles_.empty()) throw InvalidArgument("mesh has no triangles");
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int v : triangles_[t]) {
      if (v < 0 || v >= nv) {
        throw InvalidArgument("triangle " + std::to_string(t) + " references vertex " +
                              std::to_string(v) + " out of range");
      }
    }
    if (!(triangle_area(t) > 0.0)) {
      throw InvalidArgument("triangle " + std::to_string(t) + " is not counter-clockwise");
    }
  }

  std::unordered_map<std::uint64_t, int> index;
  index.reserve(triangles_.size() * 2);
  tri_edges_.resize(triangles_.size());
  tri_signs_.resize(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[(k + 1) % 3];
      const int b = tri[(k + 2) % 3];
      auto [it, inserted] = index.try_emplace(edge_key(a, b), static_cast<int>(edges_.size()));
      if (inserted) {
        edges_.push_back(Edge{{std::min(a, b), std::max(a, b)}});
        edge_valence_.push_back(0);
      }
      const int e = it->second;
      if (++edge_valence_[e] > 2) {
        throw InvalidArgument("edge (" + std::to_string(a) + "," + std::to_string(b) +
                              ") is shared by more than two triangles");
      }
      tri_edges_[t][k] = e;
      tri_signs_[t][k] = a < b ? 1 : -1;
    }
  }

  boundary_slot_.assign(edges_.size(), -1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_valence_[e] == 1) {
      boundary_slot_[e] = static_cast<int>(boundary_edges_.size());
      boundary_edges_.push_back(static_cast<int>(e));
    }
  }
  normals_.resize(boundary_edges_.size());
  trace_signs_.resize(boundary_edges_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int k = 0; k < 3; ++k) {
      const int e = tri_edges_[t][k];
      const int slot = boundary_slot_[e];
      if (slot < 0) continue;
      const Point p = vertices_[triangles_[t][(k + 1) % 3]];
      const Point q = vertices_[triangles_[t][(k + 2) % 3]];
      const double len = dist(p, q);
      // p -> q runs counter-clockwise around the triangle, so the outward
      // normal is the clockwise rotation of that direction and t = -(q-p)/len.
      normals_[slot] = {(q.y - p.y) / len, -(q.x - p.x) / len};
      trace_signs_[slot] = -tri_signs_[t][k];
    }
  }

  // Boundary loops via union-find on shared vertices.
  std::vector<int> parent(vertices_.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (int e : boundary_edges_) {
    const int a = find_root(parent, edges_[e].v[0]);
    const int b = find_root(parent, edges_[e].v[1]);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::unordered_map<int, std::size_t> loop_of_root;
  for (int e : boundary_edges_) {
    const int r = find_root(parent, edges_[e].v[0]);
    auto [it, inserted] = loop_of_root.try_emplace(r, loops_.size());
    if (inserted) loops_.emplace_back();
    loops_[it->second].push_back(e);
  }
}

std::array<Point, 3> Mesh::triangle_points(std::size_t t) const {
  const auto& tri = triangles_[t];
  return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

double Mesh::triangle_area(std::size_t t) const {
  const auto p = triangle_points(t);
  return 0.5 * cross(p[1] - p[0], p[2] - p[0]);
}

double Mesh::edge_length(std::size_t e) const {
  return dist(vertices_[edges_[e].v[0]], vertices_[edges_[e].v[1]]);
}

Point Mesh::edge_midpoint(std::size_t e) const {
  return 0.5 * (vertices_[edges_[e].v[0]] + vertices_[edges_[e].v[1]]);
}

Point Mesh::outward_normal(std::size_t e) const {
  if (boundary_slot_.at(e) < 0) throw InvalidArgument("outward_normal on an interior edge");
  return normals_[boundary_slot_[e]];
}

int Mesh::trace_sign(std::size_t e) const {
  if (boundary_slot_.at(e) < 0) throw InvalidArgument("trace_sign on an interior edge");
  return trace_signs_[boundary_slot_[e]];
}

double Mesh::h() const {
  double h = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto p = triangle_points(t);
    h = std::max({h, dist(p[0], p[1]), dist(p[1], p[2]), dist(p[2], p[0])});
  }
  return h;
}

double Mesh::boundary_length() const { return total_length(*this, boundary_edges_); }

// --------------------------------------------------------------------------
// Structured polar generators

namespace {

struct Layer {
  double radius;
  int count;      // 1 for the centre point
  double offset;  // angular offset in units of the layer spacing
};

Point layer_point(const Layer& l, int i) {
  if (l.count == 1) return {0.0, 0.0};
  const double theta = 2.0 * std::numbers::pi * (i + l.offset) / l.count;
  return {l.radius * std::cos(theta), l.radius * std::sin(theta)};
}

int layer_count(double radius, double spacing) {
  return std::max(6, static_cast<int>(std::ceil(2.0 * std::numbers::pi * radius / spacing)));
}

std::vector<Layer> annulus_layers(double r_inner, double r_outer, double spacing) {
  const double radial = spacing * std::sqrt(3.0) / 2.0;
  const int n = std::max(1, static_cast<int>(std::ceil((r_outer - r_inner) / radial)));
  std::vector<Layer> layers;
  for (int j = 0; j <= n; ++j) {
    const double r = r_inner + (r_outer - r_inner) * j / n;
    layers.push_back({r, layer_count(r, spacing), 0.5 * (j % 2)});
  }
  layers.back().radius = r_outer;
  return layers;
}

std::vector<Layer> disc_layers(double radius, double spacing) {
  const double radial = spacing * std::sqrt(3.0) / 2.0;
  const int n = std::max(2, static_cast<int>(std::ceil(radius / radial)));
  std::vector<Layer> layers{{0.0, 1, 0.0}};
  for (int j = 1; j <= n; ++j) {
    const double r = radius * j / n;
    layers.push_back({r, layer_count(r, spacing), 0.5 * (j % 2)});
  }
  layers.back().radius = radius;
  return layers;
}

void push_ccw(std::vector<std::array<int, 3>>& tris, const std::vector<Point>& pts, int a, int b,
              int c) {
  if (cross(pts[b] - pts[a], pts[c] - pts[a]) < 0.0) std::swap(b, c);
  tris.push_back({a, b, c});
}

/// Vertices layer by layer; consecutive layers are zipped together by always
/// adding the shorter of the two candidate diagonals.
std::pair<std::vector<Point>, std::vector<std::array<int, 3>>> build_layers(
    const std::vector<Layer>& layers) {
  std::vector<Point> pts;
  std::vector<int> first;
  for (const auto& l : layers) {
    first.push_back(static_cast<int>(pts.size()));
    for (int i = 0; i < l.count; ++i) pts.push_back(layer_point(l, i));
  }
  std::vector<std::array<int, 3>> tris;
  for (std::size_t j = 0; j + 1 < layers.size(); ++j) {
    const Layer& in = layers[j];
    const Layer& out = layers[j + 1];
    const int a0 = first[j];
    const int b0 = first[j + 1];
    if (in.count == 1) {
      for (int i = 0; i < out.count; ++i) {
        push_ccw(tris, pts, a0, b0 + i, b0 + (i + 1) % out.count);
      }
      continue;
    }
    int i = 0;
    int k = 0;
    while (i < in.count || k < out.count) {
      const int ai = a0 + i % in.count;
      const int ai1 = a0 + (i + 1) % in.count;
      const int bk = b0 + k % out.count;
      const int bk1 = b0 + (k + 1) % out.count;
      bool advance_inner;
      if (i == in.count) {
        advance_inner = false;
      } else if (k == out.count) {
        advance_inner = true;
      } else {
        advance_inner = dist(pts[ai1], pts[bk]) <= dist(pts[ai], pts[bk1]);
      }
      if (advance_inner) {
        push_ccw(tris, pts, ai, bk, ai1);
        ++i;
      } else {
        push_ccw(tris, pts, ai, bk, bk1);
        ++k;
      }
    }
  }
  return {std::move(pts), std::move(tris)};
}

}  // namespace

Mesh generate_disc(double radius, double h_target) {
  if (!(radius > 0.0)) throw InvalidArgument("generate_disc: radius must be positive");
  if (!(h_target > 0.0) || !(h_target < radius)) {
    throw InvalidArgument("generate_disc: need 0 < h_target < radius");
  }
  auto [pts, tris] = build_layers(disc_layers(radius, h_target / kSpacingFactor));
  return Mesh(std::move(pts), std::move(tris));
}

Mesh generate_ring(double r_inner, double r_outer, double h_target) {
  if (!(r_inner > 0.0) || !(r_inner < r_outer)) {
    throw InvalidArgument("generate_ring: need 0 < r_inner < r_outer");
  }
  if (!(h_target > 0.0)) throw InvalidArgument("generate_ring: h_target must be positive");
  auto [pts, tris] = build_layers(annulus_layers(r_inner, r_outer, h_target / kSpacingFactor));
  return Mesh(std::move(pts), std::move(tris));
}

NestedMeshes generate_nested(double r_inner, double r_outer, double h_target) {
  if (!(r_inner > 0.0) || !(r_inner < r_outer)) {
    throw InvalidArgument("generate_nested: need 0 < r_inner < r_outer");
  }
  if (!(h_target > 0.0) || !(h_target < r_outer)) {
    throw InvalidArgument("generate_nested: need 0 < h_target < r_outer");
  }
  const double spacing = h_target / kSpacingFactor;
  auto inner = disc_layers(r_inner, spacing);
  const auto ring_layers = annulus_layers(r_inner, r_outer, spacing);
  inner.pop_back();
  std::vector<Layer> all = inner;
  all.insert(all.end(), ring_layers.begin(), ring_layers.end());

  auto [disc_pts, disc_tris] = build_layers(all);
  auto [ring_pts, ring_tris] = build_layers(ring_layers);

  int offset = 0;
  for (const auto& l : inner) offset += l.count;

  NestedMeshes out;
  out.ring_to_disc_vertex.resize(ring_pts.size());
  std::iota(out.ring_to_disc_vertex.begin(), out.ring_to_disc_vertex.end(), offset);
  out.disc = Mesh(std::move(disc_pts), std::move(disc_tris));
  out.ring = Mesh(std::move(ring_pts), std::move(ring_tris));

  std::unordered_map<std::uint64_t, int> disc_edge;
  for (std::size_t e = 0; e < out.disc.num_edges(); ++e) {
    const auto& v = out.disc.edges()[e].v;
    disc_edge.emplace(edge_key(v[0], v[1]), static_cast<int>(e));
  }
  out.ring_to_disc_edge.resize(out.ring.num_edges());
  for (std::size_t e = 0; e < out.ring.num_edges(); ++e) {
    const auto& v = out.ring.edges()[e].v;
    const auto it = disc_edge.find(edge_key(v[0] + offset, v[1] + offset));
    if (it == disc_edge.end()) throw Error("generate_nested: ring edge missing from disc");
    out.ring_to_disc_edge[e] = it->second;
  }
  return out;
}

}  // namespace qrm
