#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "driftlab/mesh.hpp"

namespace driftlab {

/// Per-vertex functional values, e.g. (integral of f * phi_i) for each hat
/// function phi_i.
using DualVector = Eigen::VectorXd;
/// One value per boundary vertex, ordered as TriMesh::boundary_vertices().
using BoundaryValues = Eigen::VectorXd;
/// One value per boundary edge, ordered as TriMesh::boundary_edges().
using EdgeValues = Eigen::VectorXd;
/// One value per triangle.
using CellScalars = Eigen::VectorXd;

/// Continuous piecewise-linear field given by its nodal values.
class ScalarField {
 public:
  ScalarField(MeshPtr mesh, Eigen::VectorXd values);
  /// Zero field.
  explicit ScalarField(MeshPtr mesh);

  const TriMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const Eigen::VectorXd& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  /// Value of the interpolant at p (nearest triangle for points outside).
  double evaluate(const Vec2& p) const;
  /// Average of the interpolant over triangle t.
  double cell_mean(std::size_t t) const;

 private:
  MeshPtr mesh_;
  Eigen::VectorXd values_;
};

/// Piecewise-constant vector field, one 2-vector per triangle.
class CellVectorField {
 public:
  CellVectorField(MeshPtr mesh, std::vector<Vec2> values);
  explicit CellVectorField(MeshPtr mesh);

  const TriMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  const std::vector<Vec2>& values() const { return values_; }
  const Vec2& operator[](std::size_t t) const { return values_[t]; }

 private:
  MeshPtr mesh_;
  std::vector<Vec2> values_;
};

ScalarField interpolate(const MeshPtr& mesh, const std::function<double(const Vec2&)>& f);
/// Samples f at triangle centroids (the cell average for affine f).
CellVectorField sample_cells(const MeshPtr& mesh, const std::function<Vec2(const Vec2&)>& f);
BoundaryValues boundary_trace(const TriMesh& mesh, const std::function<double(const Vec2&)>& f);
BoundaryValues boundary_trace(const ScalarField& f);

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);
CellVectorField operator+(const CellVectorField& a, const CellVectorField& b);
CellVectorField operator-(const CellVectorField& a, const CellVectorField& b);
CellVectorField operator*(double s, const CellVectorField& a);

/// Nodewise product, interpolated back to P1.
ScalarField nodal_product(const ScalarField& a, const ScalarField& b);
ScalarField nodal_map(const ScalarField& a, const std::function<double(double)>& f);
/// Multiplies each cell vector by the cell average of s.
CellVectorField scale_cells(const ScalarField& s, const CellVectorField& g);

}  // namespace driftlab
