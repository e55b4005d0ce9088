#pragma once

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Sparse>

#include "driftlab/fields.hpp"

namespace driftlab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct DirichletConstraint {
  std::vector<int> vertices;
  std::vector<double> values;
};
struct MeanZeroConstraint {};

/// Assembled linear system with its constraint already applied
/// (Dirichlet rows and columns eliminated symmetrically).
struct SparseSystem {
  SparseMatrix matrix;
  DualVector rhs;
  std::variant<DirichletConstraint, MeanZeroConstraint> constraint;
};

// ---- assembly --------------------------------------------------------------

/// K_ij = sum_T c_T grad(phi_i).grad(phi_j) |T|; c = 1 when coeff is empty.
SparseMatrix assemble_stiffness(const TriMesh& mesh, std::span<const double> coeff = {});
/// Consistent P1 mass matrix.
SparseMatrix assemble_mass(const TriMesh& mesh);
/// N_ij = sum_T (b_T . grad phi_j) |T| / 3, i.e. the form (b.grad u, phi_i).
SparseMatrix assemble_drift(const CellVectorField& b);
/// S_ij = sum_T Bbar_T (perp(grad phi_j) . grad phi_i) |T|; skew-symmetric.
SparseMatrix assemble_perp_coupling(const ScalarField& B);

/// Replaces Dirichlet rows and columns by identity, moving the known
/// column contributions to the right-hand side.
SparseSystem dirichlet_system(const TriMesh& mesh, SparseMatrix matrix, DualVector rhs,
                              const BoundaryValues& g);

// ---- discrete differential operators ----------------------------------------

CellVectorField gradient(const ScalarField& f);
CellVectorField perp(const CellVectorField& g);
/// L_i = -sum_T g_T . grad(phi_i) |T|, no boundary term.
DualVector weak_divergence(const CellVectorField& g);
/// Curl as (d2 g1 - d1 g2), tested against hat functions: the interior edge
/// jumps of g.tau. Together with the boundary load of g.tau it reproduces
/// sum_T g_T . perp(grad phi_i) |T| exactly.
DualVector weak_curl(const CellVectorField& g);
/// g.tau on each boundary edge, using the adjacent cell.
EdgeValues tangential_trace(const CellVectorField& g);
/// g.nu on each boundary edge, using the adjacent cell.
EdgeValues normal_trace(const CellVectorField& g);
/// Per-cell dot product.
CellScalars dot(const CellVectorField& a, const CellVectorField& b);

/// Integral of an edgewise-constant boundary function against each hat.
DualVector boundary_load(const TriMesh& mesh, const EdgeValues& values);
/// Integral of a P1 function against each hat (consistent mass).
DualVector load_vector(const ScalarField& f);
/// Integral of a P0 function against each hat.
DualVector cell_load(const TriMesh& mesh, const CellScalars& c);
/// Integral of each hat function (lumped mass).
Eigen::VectorXd lumped_mass(const TriMesh& mesh);

// ---- solvers ----------------------------------------------------------------

struct SolverOptions {
  double rtol = 1e-10;
  double atol = 0.0;
  int max_iter = 0;  // 0 means 10 * number of vertices
};

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;  // final (unpreconditioned) residual norm
  bool converged = false;
};

using LinearOperator = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Jacobi-preconditioned conjugate gradients; x holds the initial guess.
SolveStats pcg(const LinearOperator& apply, const Eigen::VectorXd& diag, const Eigen::VectorXd& b,
               Eigen::VectorXd& x, const SolverOptions& opts);
/// Jacobi-preconditioned BiCGSTAB; x holds the initial guess.
SolveStats bicgstab(const SparseMatrix& a, const Eigen::VectorXd& b, Eigen::VectorXd& x,
                    const SolverOptions& opts);

/// Solves the constrained system: CG when symmetric, BiCGSTAB otherwise.
/// Throws SolverError on non-convergence.
Eigen::VectorXd solve_system(const SparseSystem& sys, bool symmetric, const SolverOptions& opts,
                             const Eigen::VectorXd* initial_guess = nullptr);

/// -Laplace(w) = rhs weakly, w = g on the boundary.
ScalarField solve_dirichlet(const MeshPtr& mesh, const DualVector& rhs, const BoundaryValues& g,
                            const SolverOptions& opts = {});

struct NeumannOptions {
  double compat_tol = 1e-8;
  // Magnitude of the terms that were summed into rhs, added to the
  // compatibility scale so cancellation in rhs is not mistaken for a defect.
  double scale_hint = 0.0;
  SolverOptions solver{};
};

struct NeumannSolution {
  ScalarField w;
  double defect;  // sum(rhs) + boundary integral of flux, before projection
};

/// -Laplace(w) = rhs weakly, dw/dnu = flux on boundary edges, mean(w) = 0.
/// Throws CompatibilityError when |defect| > compat_tol * (|rhs|_1 + |flux|_1 + scale_hint);
/// a smaller defect is projected onto constants before solving.
NeumannSolution solve_neumann(const MeshPtr& mesh, const DualVector& rhs, const EdgeValues& flux,
                              const NeumannOptions& opts = {});

// ---- norms ------------------------------------------------------------------

struct Norms {
  double l2 = 0.0;
  double linf = 0.0;
  double h1_semi = 0.0;  // zero for cell fields
};

Norms norms(const ScalarField& f);
Norms norms(const CellVectorField& g);
double integral(const ScalarField& f);
double mean(const ScalarField& f);
double boundary_integral(const TriMesh& mesh, const EdgeValues& values);
/// L2 norm of a cell field restricted to cells whose centroid lies in B_r(x0).
double l2_norm_in_ball(const CellVectorField& g, const Vec2& x0, double r);

/// ||f - exact||_{L2} with a degree-5 rule per triangle.
double l2_error(const ScalarField& f, const std::function<double(const Vec2&)>& exact);
/// ||grad f - exact_grad||_{L2} with a degree-5 rule per triangle.
double h1_error(const ScalarField& f, const std::function<Vec2(const Vec2&)>& exact_grad);

}  // namespace driftlab
