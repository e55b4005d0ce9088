#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "driftlab/driftsolve.hpp"
#include "driftlab/hardy.hpp"
#include "driftlab/riviere.hpp"

namespace driftlab {

/// "diskmesh v1": header `V T B level`, then V lines `x y`, T lines `i j k`,
/// B lines `i j`.
void write_mesh(std::ostream& os, const TriMesh& mesh);
MeshPtr read_mesh(std::istream& is);

/// "diskfield v1": header `kind count` with kind `vertex` (one value per
/// line) or `cell` (one 2-vector per line).
void write_field(std::ostream& os, const ScalarField& f);
void write_field(std::ostream& os, const CellVectorField& f);
ScalarField read_scalar_field(std::istream& is, const MeshPtr& mesh);
CellVectorField read_cell_field(std::istream& is, const MeshPtr& mesh);

/// Binary dump: int64 N, float64 L, then N*N float64 row-major.
void write_grid(std::ostream& os, const GridField& f);
GridField read_grid(std::istream& is);

std::string hardy_csv_header();
std::string hardy_csv_row(const HardyReport& r);

/// Columns `iter,dAtilde_inf,dB_h1,residual_ab`.
void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace);

/// Directory with `mesh.txt`, `b.field`, `g.csv` (boundary vertex index,
/// value) and an optional `f.field` holding the source in weak form.
struct ProblemBundle {
  MeshPtr mesh;
  DriftProblem problem;
};
void write_bundle(const std::filesystem::path& dir, const DriftProblem& prob);
ProblemBundle read_bundle(const std::filesystem::path& dir);

/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace driftlab
