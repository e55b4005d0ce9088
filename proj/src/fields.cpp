#include "driftlab/fields.hpp"

#include <cmath>
#include <string>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

void require_same_mesh(const TriMesh& a, const TriMesh& b) {
  if (&a != &b) throw DomainError("fields live on different meshes");
}

}  // namespace

ScalarField::ScalarField(MeshPtr mesh, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != mesh_->num_vertices())
    throw DomainError("scalar field has " + std::to_string(values_.size()) + " values for " +
                      std::to_string(mesh_->num_vertices()) + " vertices");
  if (!values_.allFinite()) throw DomainError("scalar field has non-finite values");
}

ScalarField::ScalarField(MeshPtr mesh)
    : ScalarField(mesh, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh->num_vertices()))) {}

double ScalarField::evaluate(const Vec2& p) const {
  const auto loc = mesh_->locate_nearest(p);
  const auto& tri = mesh_->triangles()[loc.cell];
  return loc.bary[0] * values_[tri[0]] + loc.bary[1] * values_[tri[1]] +
         loc.bary[2] * values_[tri[2]];
}

double ScalarField::cell_mean(std::size_t t) const {
  const auto& tri = mesh_->triangles()[t];
  return (values_[tri[0]] + values_[tri[1]] + values_[tri[2]]) / 3.0;
}

CellVectorField::CellVectorField(MeshPtr mesh, std::vector<Vec2> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (values_.size() != mesh_->num_triangles())
    throw DomainError("cell field has " + std::to_string(values_.size()) + " values for " +
                      std::to_string(mesh_->num_triangles()) + " triangles");
  for (const auto& v : values_)
    if (!v.allFinite()) throw DomainError("cell field has non-finite values");
}

CellVectorField::CellVectorField(MeshPtr mesh)
    : CellVectorField(mesh, std::vector<Vec2>(mesh->num_triangles(), Vec2::Zero())) {}

ScalarField interpolate(const MeshPtr& mesh, const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh->num_vertices()));
  for (std::size_t i = 0; i < mesh->num_vertices(); ++i) v[static_cast<Eigen::Index>(i)] = f(mesh->vertices()[i]);
  return ScalarField(mesh, std::move(v));
}

CellVectorField sample_cells(const MeshPtr& mesh, const std::function<Vec2(const Vec2&)>& f) {
  std::vector<Vec2> v(mesh->num_triangles());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = f(mesh->centroid(t));
  return CellVectorField(mesh, std::move(v));
}

BoundaryValues boundary_trace(const TriMesh& mesh, const std::function<double(const Vec2&)>& f) {
  const auto& bv = mesh.boundary_vertices();
  BoundaryValues g(static_cast<Eigen::Index>(bv.size()));
  for (std::size_t k = 0; k < bv.size(); ++k) g[static_cast<Eigen::Index>(k)] = f(mesh.vertices()[bv[k]]);
  return g;
}

BoundaryValues boundary_trace(const ScalarField& f) {
  const auto& bv = f.mesh().boundary_vertices();
  BoundaryValues g(static_cast<Eigen::Index>(bv.size()));
  for (std::size_t k = 0; k < bv.size(); ++k) g[static_cast<Eigen::Index>(k)] = f[bv[k]];
  return g;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  require_same_mesh(a.mesh(), b.mesh());
  return ScalarField(a.mesh_ptr(), a.values() + b.values());
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  require_same_mesh(a.mesh(), b.mesh());
  return ScalarField(a.mesh_ptr(), a.values() - b.values());
}

ScalarField operator*(double s, const ScalarField& a) { return ScalarField(a.mesh_ptr(), s * a.values()); }

CellVectorField operator+(const CellVectorField& a, const CellVectorField& b) {
  require_same_mesh(a.mesh(), b.mesh());
  std::vector<Vec2> v(a.values().size());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = a[t] + b[t];
  return CellVectorField(a.mesh_ptr(), std::move(v));
}

CellVectorField operator-(const CellVectorField& a, const CellVectorField& b) {
  require_same_mesh(a.mesh(), b.mesh());
  std::vector<Vec2> v(a.values().size());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = a[t] - b[t];
  return CellVectorField(a.mesh_ptr(), std::move(v));
}

CellVectorField operator*(double s, const CellVectorField& a) {
  std::vector<Vec2> v(a.values().size());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = s * a[t];
  return CellVectorField(a.mesh_ptr(), std::move(v));
}

ScalarField nodal_product(const ScalarField& a, const ScalarField& b) {
  require_same_mesh(a.mesh(), b.mesh());
  return ScalarField(a.mesh_ptr(), a.values().cwiseProduct(b.values()));
}

ScalarField nodal_map(const ScalarField& a, const std::function<double(double)>& f) {
  return ScalarField(a.mesh_ptr(), a.values().unaryExpr(f));
}

CellVectorField scale_cells(const ScalarField& s, const CellVectorField& g) {
  require_same_mesh(s.mesh(), g.mesh());
  std::vector<Vec2> v(g.values().size());
  for (std::size_t t = 0; t < v.size(); ++t) v[t] = s.cell_mean(t) * g[t];
  return CellVectorField(g.mesh_ptr(), std::move(v));
}

}  // namespace driftlab
