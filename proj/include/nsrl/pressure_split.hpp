#pragma once

#include "nsrl/field.hpp"

#include <variant>

namespace nsrl {

struct PeriodicDomain {};
using SplitDomain = std::variant<PeriodicDomain, Ball>;

struct SplitOptions {
    double cg_tol = 1e-10;    // relative residual
    int max_iterations = 0;   // 0 means 10 * n
};

struct PressureSplit {
    ScalarField p1;
    ScalarField p2;
    SplitDomain domain;
    // int |p1|^{3/2} / int |v|^3 over the domain (0 when v vanishes there).
    double cz_ratio = 0.0;
    // Max-norm of lap p2: globally (periodic) or away from a two-cell boundary layer (ball).
    double harmonic_residual = 0.0;
    double p2_max = 0.0;
    int cg_iterations = 0;
    double cg_relative_residual = 0.0;
};

// p = p1 + p2 with lap p1 = -d_i d_j (v_i v_j). Periodic: spectral zero-mean solve.
// Ball: 7-point Dirichlet problem on the cells centred in the ball, p1 = 0 outside,
// solved by conjugate gradients; p1 and p2 are reported as zero outside the ball.
// Throws ResolutionError for balls under four cells in radius and SolverError when CG
// stalls.
PressureSplit split_pressure(const Snapshot& snapshot, const SplitDomain& domain, const SplitOptions& options = {});

// sup_inner |p2|^{3/2} / int_outer |p2|^{3/2}. The sup is taken over the nodes in the
// inner ball together with interpolated values on its sphere (maximum principle).
// Throws GeometryError unless inner lies strictly inside outer and DegenerateFieldError
// when the denominator is below eps_den.
double harmonic_interior_ratio(const ScalarField& p2, const Ball& outer, const Ball& inner, double eps_den = 1e-30);

} // namespace nsrl
