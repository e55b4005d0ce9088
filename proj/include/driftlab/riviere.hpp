#pragma once

#include <string>
#include <vector>

#include "driftlab/hodge.hpp"

namespace driftlab {

/// Iterate of the fixed-point scheme: Atilde = 1 on the boundary, mean(B) = 0.
struct RiviereState {
  ScalarField Atilde;
  ScalarField B;
};

struct TraceEntry {
  double dAtilde_inf = 0.0;
  double dB_h1 = 0.0;
  double residual_ab = 0.0;
};

struct BoundsReport {
  double A_inf = 0.0;          // ||Atilde P^-1||_inf
  double Ainv_inf = 0.0;       // ||(Atilde P^-1)^-1||_inf, infinite if A changes sign
  double Atilde_dev_inf = 0.0; // ||Atilde - 1||_inf
  double grad_Atilde_l2 = 0.0;
  double grad_B_l2 = 0.0;
};

struct RiviereDecomp {
  ScalarField A;
  ScalarField B;
  ScalarField Atilde;
  ScalarField B0;
  int iterations = 0;
  std::vector<double> contraction_trace;  // dAtilde_inf + dB_h1 per iteration
  std::vector<TraceEntry> trace;
  double contraction_ratio = 0.0;  // largest ratio of successive trace entries
  double residual_ab = 0.0;        // ||A b - grad A - perp(grad B)||
  double residual_step2 = 0.0;
  BoundsReport bounds;
  bool smallness_passed = true;
  std::vector<std::string> warnings;
};

struct RiviereOptions {
  double tol = 1e-8;
  int max_iter = 50;
  double epsilon = 0.01;  // smallness threshold, only warned about
  NeumannOptions solver{};
};

/// Neumann problem for B0: Laplace(B0) = div(grad(xi) P^-1), dB0/dnu = b.tau, mean zero.
ScalarField b0_solve(const HodgeParts& parts, const CellVectorField& b, const NeumannOptions& opts = {});

/// One sweep of the coupled linear system for (Atilde, B) given the previous iterate.
RiviereState fixed_point_step(const RiviereState& state, const HodgeParts& parts, const ScalarField& B0,
                              const NeumannOptions& opts = {});

/// Iterates from (1, B0) until the update falls below tol. Throws
/// ConvergenceError with the trace when max_iter is reached first.
RiviereDecomp decompose(const CellVectorField& b, const HodgeParts& parts, const RiviereOptions& opts = {});

/// ||A b - grad A - perp(grad B)|| with A averaged to cells.
double decomposition_residual(const CellVectorField& b, const ScalarField& A, const ScalarField& B);

/// ||grad Atilde - Atilde perp(grad xi) + P perp(grad B)||, which vanishes
/// when the Step-2 potential is constant.
double step2_residual(const RiviereDecomp& decomp, const HodgeParts& parts);

/// Largest ratio of consecutive entries, 0 for fewer than two.
double contraction_ratio(const std::vector<double>& trace);

}  // namespace driftlab
