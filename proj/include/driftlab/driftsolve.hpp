#pragma once

#include <cstdint>
#include <optional>

#include "driftlab/fem.hpp"

namespace driftlab {

/// Laplace(u) + b.grad(u) = f with u = g on the boundary. f is given in
/// weak form (integrals against hats) and defaults to zero.
struct DriftProblem {
  CellVectorField b;
  BoundaryValues g;
  std::optional<DualVector> f;
};

/// Solves (K - N) u = -F, where N is the drift form (b.grad u, phi_i).
ScalarField solve_drift(const DriftProblem& prob, const SolverOptions& opts = {});

/// Solves div(A grad u - B perp(grad u)) = A f weakly with u = g on the
/// boundary. Throws DomainError unless A > 0 at every vertex.
ScalarField solve_conservation(const ScalarField& A, const ScalarField& B, const BoundaryValues& g,
                               const std::optional<DualVector>& f = std::nullopt,
                               const SolverOptions& opts = {});

/// integral of A |grad v|^2 with A averaged to cells.
double weighted_energy(const ScalarField& A, const ScalarField& v);

struct UniquenessReport {
  double energy = 0.0;
  int iterations = 0;
  ScalarField v;
};

/// Solves the homogeneous conservation problem (g = 0, f = 0) and returns
/// its energy. With a seed the Krylov solve starts from a random guess
/// instead of zero.
UniquenessReport uniqueness_energy(const ScalarField& A, const ScalarField& B,
                                   std::optional<std::uint64_t> seed = std::nullopt);

/// u(x0 + r x) sampled at the vertices of target. Throws DomainError unless
/// B_r(x0) lies in the unit disk.
ScalarField rescale(const ScalarField& u, const Vec2& x0, double r, const MeshPtr& target);
/// r b(x0 + r x) sampled at the cell centroids of target.
CellVectorField rescale(const CellVectorField& b, const Vec2& x0, double r, const MeshPtr& target);

}  // namespace driftlab
