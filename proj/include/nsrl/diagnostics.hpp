#pragma once

#include "nsrl/field.hpp"
#include "nsrl/field_ops.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nsrl {

// g(t) = int_ball |v(., t)|^3 dx per snapshot (the cubed L3 norm).
TimeSeries g_profile(const SpaceTimeSlab& slab, const Ball& ball);

// Least-squares slope of log y against log x; nullopt unless every y > 0 and there
// are at least two points.
std::optional<double> log_log_slope(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------

struct CriterionOptions {
    double delta = 0.5;         // largest window length
    int windows = 8;            // J: t_j = T - delta 2^{-j}, j = 0..J-1
    std::optional<Ball> domain;  // nullopt integrates over the whole box
};

struct CriterionWindow {
    double t = 0.0;
    double average = 0.0;  // (1 / (T - t)) int_t^T int |v|^3
};

struct CriterionProfile {
    double T = 0.0;
    std::vector<CriterionWindow> windows;
    double m_proxy = 0.0;  // tail min, the liminf stand-in
    double M_proxy = 0.0;  // tail max, the limsup stand-in
    // d log A / d log (T - t) over all windows.
    std::optional<double> fitted_exponent;
};

// Throws WindowError if the windows leave the slab and ResolutionError if the
// smallest window holds fewer than two snapshots.
CriterionProfile criterion_profile(const SpaceTimeSlab& slab, double T, const CriterionOptions& options = {});

// ---------------------------------------------------------------------------

struct GoodSlices {
    double M = 0.0;
    double threshold = 0.0;  // 10 M
    double t_k = 0.0;
    double t_final = 0.0;
    double window_average = 0.0;
    bool precondition_holds = false;  // window average <= M
    double E_k_measure = 0.0;         // |{g > 10 M}| by left-endpoint step quadrature
    double Ek_bound = 0.0;            // |t_final - t_k| / 10
    double s_k = 0.0;
    double g_at_sk = 0.0;
};

// Chebyshev selection on [t_k, t_final]. s_k is the latest sample with g <= 10 M.
// Throws DomainError for M <= 0, WindowError when g does not cover the window, and
// SelectionError when no sample qualifies.
GoodSlices good_slices(const TimeSeries& g, double t_k, double M, double t_final = 0.0);

struct FatouCheck {
    std::vector<GoodSlices> slices;
    double g_final = 0.0;
    double bound = 0.0;  // 10 M
    bool holds = false;  // g_final <= bound + tol
};

// Runs good_slices for each t_k and compares g at t_final with 10 M.
FatouCheck fatou_final_slice(const TimeSeries& g, std::span<const double> t_ks, double M, double t_final = 0.0,
                             double tol = 1e-12);

// ---------------------------------------------------------------------------

struct CknOptions {
    double eps_threshold = 0.0;  // required; no default exists
    int min_radius_cells = 4;
};

struct CknScanResult {
    Vec3 center{};
    double t0 = 0.0;
    std::vector<double> radii;
    std::vector<double> values;  // (1/R^2) int_{Q(z0,R)} |v|^3 + |p|^{3/2}
    std::optional<double> fitted_slope;
    double eps_threshold = 0.0;
    bool flagged = false;  // min_R C(R) >= eps_threshold
};

CknScanResult ckn_scan(const SpaceTimeSlab& slab, const Vec3& center, double t0, std::span<const double> radii,
                       const CknOptions& options);

// ---------------------------------------------------------------------------

// phi(x, t) = A (1 - |x - x0|^2 / rho^2)^k sigma((t - t_on) / tau), sigma the quintic
// smoothstep ramp from 0 to 1.
struct BumpTestFunction {
    std::string id = "bump";
    Vec3 center{};
    double rho = 1.0;
    double t_on = 0.0;
    double tau = 1.0;
    int k = 4;
    double amplitude = 1.0;

    double value(const Vec3& d, double t) const;  // d = x - x0 (minimum image)
};

struct EnergyResidual {
    std::string test_function_id;
    double t = 0.0;
    double lhs = 0.0;  // int phi |v|^2 (t) + 2 int int phi |grad v|^2
    double rhs = 0.0;  // int int |v|^2 (lap phi + phi_t) + v . grad phi (|v|^2 + 2 p)
    double residual = 0.0;
};

// Throws DomainError when phi could be negative or does not vanish at the slab start,
// GeometryError when its support does not fit the box, WindowError for t outside the slab.
EnergyResidual energy_residual(const SpaceTimeSlab& slab, const BumpTestFunction& phi, double t);

// ---------------------------------------------------------------------------

struct VorticityCheck {
    VectorField omega;
    double max_vorticity = 0.0;
    double max_laplacian = 0.0;
};

VorticityCheck vorticity_harmonic_check(const VectorField& u);

// Members of the curl-free, divergence-free family on the periodic box: constants.
VectorField harmonic_generator(const Grid& grid, const Vec3& value);

// ---------------------------------------------------------------------------

struct DecayScan {
    std::vector<Vec3> centers;
    std::vector<double> values;  // int_{Q(z0, r)} |u|^3 + |q|^{3/2}
    bool decreasing = false;     // strictly
};

DecayScan decay_scan(const SpaceTimeSlab& slab, std::span<const Vec3> centers, double t0, double r = 1.0);

} // namespace nsrl
