#pragma once

#include <array>
#include <vector>

#include "driftlab/fem.hpp"

namespace driftlab {

/// N x N cell-centred samples of [-L, L]^2, treated as periodic.
struct PeriodicGrid {
  double L = 4.0;
  int N = 256;

  double spacing() const { return 2.0 * L / N; }
  double cell_area() const { return spacing() * spacing(); }
  double coord(int k) const { return -L + (k + 0.5) * spacing(); }
  /// Throws ConfigError unless N is a power of two and L >= 2.
  void validate() const;
};

/// Row-major samples: value(ix, iy) = data[iy * N + ix].
struct GridField {
  PeriodicGrid grid;
  std::vector<double> data;

  explicit GridField(const PeriodicGrid& g);
  GridField(const PeriodicGrid& g, std::vector<double> values);
  double& operator()(int ix, int iy) { return data[static_cast<std::size_t>(iy) * grid.N + ix]; }
  double operator()(int ix, int iy) const { return data[static_cast<std::size_t>(iy) * grid.N + ix]; }
};

GridField sample_grid(const PeriodicGrid& g, const std::function<double(const Vec2&)>& f);
/// P1 interpolant at grid points inside the mesh, zero outside.
GridField rasterize(const ScalarField& f, const PeriodicGrid& g);
/// Cell values at grid points inside the mesh, zero outside.
GridField rasterize(const TriMesh& mesh, const CellScalars& c, const PeriodicGrid& g);

/// Fourier multiplier -i xi_j / |xi| (j = 1 or 2), zero at the origin and at
/// the Nyquist index of component j, so that R1^2 + R2^2 = -Id on
/// band-limited mean-zero data.
GridField riesz_transform(const GridField& f, int j);

struct HardyReport {
  double l1 = 0.0;
  std::array<double, 2> riesz_l1{0.0, 0.0};
  double total = 0.0;  // l1 + riesz_l1[0] + riesz_l1[1]
  double mean = 0.0;   // integral of f
  PeriodicGrid grid;
};

HardyReport hardy_norm(const GridField& f);

/// Per-cell grad(u) . perp(grad(v)).
CellScalars jacobian(const ScalarField& u, const ScalarField& v);
/// Same product from centred differences of periodic grid samples.
GridField jacobian(const GridField& u, const GridField& v);

/// Zero-extended div b on the grid: the weak divergence at every vertex
/// (boundary flux included) divided by the lumped mass, rasterized.
GridField divergence_grid(const CellVectorField& b, const PeriodicGrid& g);
/// hardy_norm of divergence_grid.
HardyReport divergence_hardy(const CellVectorField& b, const PeriodicGrid& g);

/// hardy_norm(jacobian(u, v)) / (||grad u|| ||grad v||); throws DomainError
/// when either gradient vanishes.
double clms_check(const ScalarField& u, const ScalarField& v, const PeriodicGrid& g);
double clms_check(const GridField& u, const GridField& v);

enum class WenteBoundary { DirichletZero, NeumannMeanZero };

struct WenteResult {
  ScalarField w;
  double ratio_inf = 0.0;   // ||w||_inf / (||grad u|| ||grad v||)
  double ratio_grad = 0.0;  // ||grad w|| / (||grad u|| ||grad v||)
  double defect = 0.0;      // integral of the Jacobian removed in the Neumann case
};

/// Laplace(w) = grad(u) . perp(grad(v)). Ratios are 0 when a gradient vanishes.
WenteResult wente_solve(const ScalarField& u, const ScalarField& v, WenteBoundary bc,
                        const SolverOptions& opts = {});

}  // namespace driftlab
