#include "driftlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <utility>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
                 std::vector<BoundaryEdge> boundary_edges, int level)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      level_(level) {
  const std::size_t nt = triangles_.size();
  areas_.resize(nt);
  grads_.resize(nt);
  std::map<EdgeKey, int> edge_owner;
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    const Vec2& a = vertices_[tri[0]];
    const Vec2& b = vertices_[tri[1]];
    const Vec2& c = vertices_[tri[2]];
    const double twice = cross(b - a, c - a);
    areas_[t] = 0.5 * twice;
    total_area_ += areas_[t];
    // grad phi_k = perp(opposite edge) / (2|T|), edges taken counterclockwise
    grads_[t][0] = perp(c - b) / twice;
    grads_[t][1] = perp(a - c) / twice;
    grads_[t][2] = perp(b - a) / twice;
    for (int k = 0; k < 3; ++k) {
      const int i = tri[k];
      const int j = tri[(k + 1) % 3];
      h_ = std::max(h_, (vertices_[i] - vertices_[j]).norm());
      edge_owner.emplace(edge_key(i, j), static_cast<int>(t));
    }
  }
  num_edges_ = edge_owner.size();

  on_boundary_.assign(vertices_.size(), 0);
  boundary_slot_.assign(vertices_.size(), -1);
  for (auto& e : boundary_edges_) {
    on_boundary_[e.v[0]] = 1;
    on_boundary_[e.v[1]] = 1;
    boundary_slot_[e.v[0]] = static_cast<int>(boundary_vertices_.size());
    boundary_vertices_.push_back(e.v[0]);
    auto it = edge_owner.find(edge_key(e.v[0], e.v[1]));
    e.cell = it == edge_owner.end() ? -1 : it->second;
  }
  build_locator();
}

Vec2 TriMesh::centroid(std::size_t t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

void TriMesh::build_locator() {
  bucket_n_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(triangles_.size()) / 2.0)));
  buckets_.assign(static_cast<std::size_t>(bucket_n_) * bucket_n_, {});
  const double cell = 2.0 / bucket_n_;
  auto clamp_idx = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x + 1.0) / cell)), 0, bucket_n_ - 1);
  };
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    double xmin = 2, xmax = -2, ymin = 2, ymax = -2;
    for (int k : triangles_[t]) {
      xmin = std::min(xmin, vertices_[k].x());
      xmax = std::max(xmax, vertices_[k].x());
      ymin = std::min(ymin, vertices_[k].y());
      ymax = std::max(ymax, vertices_[k].y());
    }
    for (int i = clamp_idx(xmin); i <= clamp_idx(xmax); ++i)
      for (int j = clamp_idx(ymin); j <= clamp_idx(ymax); ++j)
        buckets_[static_cast<std::size_t>(j) * bucket_n_ + i].push_back(static_cast<int>(t));
  }
}

std::array<double, 3> TriMesh::barycentric(std::size_t t, const Vec2& p) const {
  const auto& tri = triangles_[t];
  const Vec2& a = vertices_[tri[0]];
  std::array<double, 3> w{};
  // phi_k is affine with gradient grads_[t][k] and value 1 at vertex k
  for (int k = 0; k < 3; ++k) w[k] = (k == 0 ? 1.0 : 0.0) + grads_[t][k].dot(p - a);
  return w;
}

std::optional<TriMesh::Location> TriMesh::locate(const Vec2& p) const {
  if (std::abs(p.x()) > 1.0 + 1e-12 || std::abs(p.y()) > 1.0 + 1e-12) return std::nullopt;
  const double cell = 2.0 / bucket_n_;
  const int i = std::clamp(static_cast<int>(std::floor((p.x() + 1.0) / cell)), 0, bucket_n_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p.y() + 1.0) / cell)), 0, bucket_n_ - 1);
  constexpr double tol = -1e-12;
  for (int t : buckets_[static_cast<std::size_t>(j) * bucket_n_ + i]) {
    auto w = barycentric(t, p);
    if (w[0] >= tol && w[1] >= tol && w[2] >= tol) return Location{t, w};
  }
  return std::nullopt;
}

TriMesh::Location TriMesh::locate_nearest(const Vec2& p) const {
  if (auto loc = locate(p)) return *loc;
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const double d = (centroid(t) - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(t);
    }
  }
  auto w = barycentric(best, p);
  double s = 0.0;
  for (double& x : w) {
    x = std::max(x, 0.0);
    s += x;
  }
  for (double& x : w) x /= s;
  return Location{best, w};
}

std::size_t disk_mesh_vertex_count(int level) {
  // T = 6*4^k, B = 6*2^k, E = (3T + B)/2, V = E - T + 1
  const double t = 6.0 * std::pow(4.0, level);
  const double b = 6.0 * std::pow(2.0, level);
  const double e = (3.0 * t + b) / 2.0;
  const double v = e - t + 1.0;
  return v > 1e18 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(v);
}

MeshPtr build_disk_mesh(int level, std::size_t vertex_cap) {
  if (level < 0) throw DomainError("mesh level must be nonnegative");
  if (level > 40 || disk_mesh_vertex_count(level) > vertex_cap)
    throw CapacityError("disk mesh level " + std::to_string(level) + " exceeds vertex cap " +
                        std::to_string(vertex_cap));

  constexpr double pi = std::numbers::pi;
  std::vector<Vec2> verts{Vec2::Zero()};
  for (int k = 0; k < 6; ++k) verts.emplace_back(std::cos(k * pi / 3), std::sin(k * pi / 3));
  std::vector<std::array<int, 3>> tris;
  std::vector<BoundaryEdge> bnd;
  for (int k = 0; k < 6; ++k) {
    const int a = 1 + k;
    const int b = 1 + (k + 1) % 6;
    tris.push_back({0, a, b});
    bnd.push_back({{a, b}, k * pi / 3 + pi / 6, -1});
  }

  double half_arc = pi / 6;
  for (int lev = 0; lev < level; ++lev) {
    std::map<EdgeKey, int> mid;
    std::map<EdgeKey, double> boundary_angle;
    for (const auto& e : bnd) boundary_angle.emplace(edge_key(e.v[0], e.v[1]), e.angle);
    auto midpoint = [&](int a, int b) {
      auto [it, fresh] = mid.emplace(edge_key(a, b), static_cast<int>(verts.size()));
      if (fresh) {
        auto ba = boundary_angle.find(it->first);
        if (ba != boundary_angle.end())
          verts.emplace_back(std::cos(ba->second), std::sin(ba->second));
        else
          verts.push_back(0.5 * (verts[a] + verts[b]));
      }
      return it->second;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(tris.size() * 4);
    for (const auto& t : tris) {
      const int ab = midpoint(t[0], t[1]);
      const int bc = midpoint(t[1], t[2]);
      const int ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({ab, t[1], bc});
      next.push_back({ca, bc, t[2]});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
    std::vector<BoundaryEdge> nb;
    nb.reserve(bnd.size() * 2);
    const double q = half_arc / 2;
    for (const auto& e : bnd) {
      const int m = mid.at(edge_key(e.v[0], e.v[1]));
      nb.push_back({{e.v[0], m}, e.angle - q, -1});
      nb.push_back({{m, e.v[1]}, e.angle + q, -1});
    }
    bnd = std::move(nb);
    half_arc = q;
  }
  return std::make_shared<const TriMesh>(std::move(verts), std::move(tris), std::move(bnd), level);
}

std::pair<Vec2, Vec2> boundary_frame(const Vec2& m) {
  const Vec2 n = m / m.norm();
  return {n, perp(n)};
}

BoundaryGeometry boundary_geometry(const TriMesh& mesh) {
  BoundaryGeometry g;
  const auto& be = mesh.boundary_edges();
  const auto& v = mesh.vertices();
  g.midpoint.reserve(be.size());
  for (const auto& e : be) {
    const Vec2 m = 0.5 * (v[e.v[0]] + v[e.v[1]]);
    auto [n, t] = boundary_frame(m);
    g.midpoint.push_back(m);
    g.normal.push_back(n);
    g.tangent.push_back(t);
    g.length.push_back((v[e.v[1]] - v[e.v[0]]).norm());
  }
  return g;
}

}  // namespace driftlab
