#pragma once

#include "nsrl/field.hpp"

#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace nsrl {

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

// (h^3 * sum over cells centred in the ball of |f|^p)^(1/p).
double lp_norm_ball(const ScalarField& f, const Ball& ball, double p);
double lp_norm_ball(const VectorField& f, const Ball& ball, double p);

// h^3 * sum of density over the ball's cells.
double integrate_ball(const ScalarField& density, const Ball& ball);
// h^3 * sum of density over the whole box.
double integrate_box(const ScalarField& density);

// Samples (t_i, F_i) of a time series.
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> values;
};

// Trapezoid on [a, b] with linear interpolation at partial end intervals.
// Throws WindowError if a >= b or [a, b] is not inside [t.front(), t.back()].
double trapezoid(const TimeSeries& series, double a, double b);

// Linear interpolation; throws WindowError outside the sampled range.
double interpolate(const TimeSeries& series, double t);

using SnapshotFunctional = std::function<double(const Snapshot&)>;

TimeSeries evaluate(const SpaceTimeSlab& slab, const SnapshotFunctional& functional);

// Per-snapshot pointwise density, e.g. |v|^3 + |p|^{3/2}.
using Density = std::function<ScalarField(const Snapshot&)>;

// Trapezoid in time of the ball integrals of `density` over the cylinder.
double space_time_integral(const SpaceTimeSlab& slab, const ParabolicCylinder& cyl, const Density& density);

// Common densities.
ScalarField speed_power(const VectorField& v, double p);  // |v|^p
ScalarField abs_power(const ScalarField& f, double p);     // |f|^p
ScalarField ckn_density(const Snapshot& s);                // |v|^3 + |p|^{3/2}

// ---------------------------------------------------------------------------
// Spectral differential operators (exact for resolved modes; first derivatives drop
// the Nyquist mode so that curl(grad) and div(curl) vanish identically).
// ---------------------------------------------------------------------------

VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
VectorField curl(const VectorField& v);
ScalarField laplacian(const ScalarField& f);
VectorField laplacian(const VectorField& v);
ScalarField partial(const ScalarField& f, int axis);

enum class DiffOp { grad, div, curl, laplacian };
using AnyField = std::variant<ScalarField, VectorField>;

// Dispatcher over the operators above; throws DomainError on a shape mismatch
// (div or curl of a scalar, grad of a vector).
AnyField apply_operator(const AnyField& field, DiffOp op);

// Max-norm of the spectral divergence.
double max_divergence(const VectorField& v);

// Default tolerance for calling a spectral field solenoidal.
inline constexpr double default_div_tol = 1e-10;

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

enum class SampleMode { trilinear, spectral };

// Value at an arbitrary point (wrapped periodically).
double sample(const ScalarField& f, const Vec3& point, SampleMode mode);
Vec3 sample(const VectorField& f, const Vec3& point, SampleMode mode);

// Values on the tensor lattice xs x ys x zs (x fastest). Points outside [-L/2, L/2)
// along any axis are wrapped when `zero_outside` is false and return 0 otherwise.
std::vector<double> sample_lattice(const ScalarField& f, std::span<const double> xs, std::span<const double> ys,
                                   std::span<const double> zs, SampleMode mode, bool zero_outside);

} // namespace nsrl
