#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace driftlab {

using Vec2 = Eigen::Vector2d;

/// Rotation by +90 degrees: (a, b) -> (-b, a).
inline Vec2 perp(const Vec2& v) { return Vec2(-v.y(), v.x()); }

struct BoundaryEdge {
  std::array<int, 2> v;  // counterclockwise along the circle
  double angle;          // angle of the arc midpoint
  int cell;              // adjacent triangle
};

/// Conforming triangulation of the closed unit disk.
///
/// Vertex order is deterministic: center, then the six base boundary
/// vertices counterclockwise from angle 0, then edge midpoints in the order
/// each refinement pass first meets them. Boundary vertices lie on the unit
/// circle; every refinement keeps existing vertices in place.
class TriMesh {
 public:
  TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
          std::vector<BoundaryEdge> boundary_edges, int level);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  int level() const { return level_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return num_edges_; }

  double area(std::size_t t) const { return areas_[t]; }
  /// Gradient of the hat function of local vertex k on triangle t.
  const Vec2& basis_gradient(std::size_t t, int k) const { return grads_[t][k]; }
  Vec2 centroid(std::size_t t) const;

  bool is_boundary(std::size_t v) const { return on_boundary_[v] != 0; }
  /// Boundary vertices in cycle order (first endpoint of each boundary edge).
  const std::vector<int>& boundary_vertices() const { return boundary_vertices_; }
  /// Position of vertex v in boundary_vertices(), or -1 for interior vertices.
  int boundary_slot(std::size_t v) const { return boundary_slot_[v]; }

  /// Largest edge length.
  double h() const { return h_; }
  double total_area() const { return total_area_; }

  struct Location {
    int cell;
    std::array<double, 3> bary;
  };
  /// Triangle containing p with barycentric weights, or nullopt when p lies
  /// outside the polygon.
  std::optional<Location> locate(const Vec2& p) const;
  /// Like locate(), but points outside the polygon fall back to the closest
  /// triangle with clamped barycentric weights.
  Location locate_nearest(const Vec2& p) const;

 private:
  void build_locator();
  std::array<double, 3> barycentric(std::size_t t, const Vec2& p) const;

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  int level_;

  std::size_t num_edges_ = 0;
  std::vector<double> areas_;
  std::vector<std::array<Vec2, 3>> grads_;
  std::vector<char> on_boundary_;
  std::vector<int> boundary_vertices_;
  std::vector<int> boundary_slot_;
  double h_ = 0.0;
  double total_area_ = 0.0;

  int bucket_n_ = 1;
  std::vector<std::vector<int>> buckets_;
};

using MeshPtr = std::shared_ptr<const TriMesh>;

/// Number of vertices of the level-k disk mesh, without building it.
std::size_t disk_mesh_vertex_count(int level);

inline constexpr std::size_t kDefaultVertexCap = 4'000'000;

/// Six-triangle fan refined `level` times by quadrisection, new boundary
/// midpoints projected radially onto the circle.
MeshPtr build_disk_mesh(int level, std::size_t vertex_cap = kDefaultVertexCap);

struct BoundaryGeometry {
  std::vector<Vec2> midpoint;  // chord midpoint
  std::vector<Vec2> normal;    // outward unit normal at the midpoint
  std::vector<Vec2> tangent;   // counterclockwise unit tangent, normal rotated +90
  std::vector<double> length;  // chord length
};

/// Frame at a boundary point m: normal m/|m| and tangent perp(normal).
std::pair<Vec2, Vec2> boundary_frame(const Vec2& m);

BoundaryGeometry boundary_geometry(const TriMesh& mesh);

}  // namespace driftlab
