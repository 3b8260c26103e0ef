#pragma once

#include "nsrl/field.hpp"
#include "nsrl/field_ops.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace nsrl {

// u(y, s) = R v(R y, R^2 s), q(y, s) = R^2 p(R y, R^2 s) on the target window [T, 0].
struct ZoomParams {
    double R_k = 1.0;
    double T = -1.0;

    double t_k() const noexcept { return T * R_k * R_k; }
};

// Throws DomainError unless 0 < R_k <= 1 and T < 0.
void validate(const ZoomParams& params);

struct ZoomOptions {
    SampleMode mode = SampleMode::trilinear;
    // Target times in [T, 0]. Default: the source times inside [T R^2, 0] divided by R^2,
    // with T itself added when it is not one of them.
    std::optional<std::vector<double>> times;
    // Pulled-back points outside the source box read as zero (the extension by zero);
    // false wraps periodically.
    bool zero_outside = true;
};

// Throws WindowError when the source slab does not cover [T R^2, 0] or a requested
// target time falls outside [T, 0].
SpaceTimeSlab zoom(const SpaceTimeSlab& slab, const ZoomParams& params, const Grid& target, const ZoomOptions& options = {});

// Closed-form space-time fields.
struct AnalyticField {
    std::function<Vec3(const Vec3&, double)> velocity;
    std::function<double(const Vec3&, double)> pressure;
};

// Samples an analytic field on a grid at the given times.
SpaceTimeSlab sample_analytic(const AnalyticField& field, const Grid& grid, std::span<const double> times);

// The zoomed analytic field, evaluated in closed form.
AnalyticField zoom_analytic(const AnalyticField& field, const ZoomParams& params);

struct IdentitySides {
    double original = 0.0;  // computed on the source slab
    double zoomed = 0.0;    // computed on the zoomed slab
    double relative_discrepancy = 0.0;
};

struct ScalingReport {
    ZoomParams params;
    double a = 0.0;
    // -(1/T) int_T^0 int_{B(1/R)} |u|^3  vs  -(1/(T R^2)) int_{T R^2}^0 int_{B(1)} |v|^3
    IdentitySides window_average;
    // (1/a^2) int_{Q(a)} |u|^3 + |q|^{3/2}  vs  (1/(aR)^2) int_{Q(aR)} |v|^3 + |p|^{3/2}
    IdentitySides cylinder;
    // Same as window_average with |p1|^{3/2}, p1 from the split on B(1); only when requested.
    std::optional<IdentitySides> pressure_window_average;
};

struct ScalingOptions {
    ZoomOptions zoom;
    bool include_pressure_part = false;
};

// Gridded input: zooms the slab onto `target` and compares both sides.
ScalingReport scaling_identity_check(const SpaceTimeSlab& slab, const ZoomParams& params, double a, const Grid& target,
                                     const ScalingOptions& options = {});

// Analytic input: both sides sampled exactly, the zoomed side on `target` at times t / R^2.
ScalingReport scaling_identity_check(const AnalyticField& field, const ZoomParams& params, double a, const Grid& source,
                                     std::span<const double> source_times, const Grid& target);

// Given both slabs (target slab already zoomed); shared by the two entry points.
ScalingReport compare_scaling_sides(const SpaceTimeSlab& source, const SpaceTimeSlab& zoomed, const ZoomParams& params,
                                    double a, const SpaceTimeSlab* source_p1 = nullptr,
                                    const SpaceTimeSlab* zoomed_p1 = nullptr);

struct VanishingSeries {
    double a = 0.0;
    double T = 0.0;
    std::vector<double> R;
    std::vector<double> values;  // -(1/T) int_T^0 int_{B(a)} |q2|^{3/2}
    std::optional<double> fitted_exponent;
    bool decreasing = false;
};

// Analytic p2(x, t): q2 = R^2 p2(R y, R^2 s) sampled on `target` at `target_times`
// (covering [T, 0]). Throws GeometryError when a R >= 2/3.
VanishingSeries harmonic_part_vanishing(const std::function<double(const Vec3&, double)>& p2, std::span<const double> Rs,
                                        double T, double a, const Grid& target, std::span<const double> target_times);

// Slab input: p2 from the ball split on B(1) of every snapshot, then zoomed.
VanishingSeries harmonic_part_vanishing(const SpaceTimeSlab& slab, std::span<const double> Rs, double T, double a,
                                        const Grid& target, const ZoomOptions& options = {});

// v(x, t) = A (Ts - t)^{-alpha} U(x / sqrt(Ts - t)) with U = curl((1 - |y|^2)^k e3) on the
// unit ball, i.e. U = -2k (1 - |y|^2)^{k-1} (y2, -y1, 0).
struct SyntheticProfile {
    double alpha = 0.5;
    double T_sing = 0.0;
    int k = 2;
    double amplitude = 1.0;
};

// int |U|^3 = 2 pi^2 k^2 / ((3k - 1)(3k - 2)) for unit amplitude.
double synthetic_profile_l3_cubed(int k);

Vec3 synthetic_velocity(const SyntheticProfile& profile, const Vec3& x, double t);

// One snapshot; pressure from the periodic Poisson solve.
Snapshot synthetic_snapshot(const SyntheticProfile& profile, const Grid& grid, double t);

// Pressure from the periodic Poisson solve of each snapshot. Throws DomainError for
// t >= T_sing, alpha < 0 or k < 2.
SpaceTimeSlab synthetic_profile(const SyntheticProfile& profile, const Grid& grid, std::span<const double> times);

} // namespace nsrl
