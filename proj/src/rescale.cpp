#include "nsrl/rescale.hpp"

#include "nsrl/diagnostics.hpp"
#include "nsrl/error.hpp"
#include "nsrl/parallel.hpp"
#include "nsrl/pressure_split.hpp"
#include "nsrl/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

namespace nsrl {

namespace {

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double time_tol(double T) { return 1e-12 * std::max(1.0, std::abs(T)); }

// Snaps s onto T or 0 when it only misses them by round-off.
double snap(double s, double T)
{
    const double tol = time_tol(T);
    if (std::abs(s - T) <= tol) return T;
    if (std::abs(s) <= tol) return 0.0;
    return s;
}

// (1 / (b - a)) int_a^b int_ball density, trapezoid in time.
double window_average(const SpaceTimeSlab& slab, const Ball& ball, double a, double b, const Density& density)
{
    TimeSeries series;
    for (std::size_t i = 0; i < slab.size(); ++i) {
        const double t = slab[i].time;
        const bool needed = (t >= a && t <= b) || (i + 1 < slab.size() && t < a && slab[i + 1].time > a) ||
                            (i > 0 && t > b && slab[i - 1].time < b);
        if (!needed) continue;
        series.t.push_back(t);
        series.values.push_back(integrate_ball(density(slab[i]), ball));
    }
    if (series.t.size() < 2) throw WindowError("window [" + fmt(a) + ", " + fmt(b) + "] not covered by the slab");
    return trapezoid(series, a, b) / (b - a);
}

IdentitySides sides(double original, double zoomed)
{
    const double den = std::max(std::abs(original), std::abs(zoomed));
    return {original, zoomed, den > 0.0 ? std::abs(original - zoomed) / den : 0.0};
}

ScalarField from_values(const Grid& g, std::vector<double> v, double scale)
{
    for (auto& x : v) x *= scale;
    return ScalarField(g, std::move(v));
}

std::vector<double> default_times(const SpaceTimeSlab& slab, const ZoomParams& p)
{
    const double R2 = p.R_k * p.R_k;
    const double tk = p.t_k();
    const double tol = time_tol(tk);
    std::vector<double> s;
    for (const auto& snap_ : slab.snapshots()) {
        if (snap_.time < tk - tol || snap_.time > tol) continue;
        s.push_back(snap(snap_.time / R2, p.T));
    }
    if (s.empty() || s.front() > p.T) s.insert(s.begin(), p.T);
    if (s.back() < 0.0) s.push_back(0.0);
    return s;
}

SpaceTimeSlab with_pressure(const SpaceTimeSlab& slab, const std::vector<ScalarField>& pressures)
{
    std::vector<Snapshot> out;
    out.reserve(slab.size());
    for (std::size_t i = 0; i < slab.size(); ++i) out.emplace_back(slab[i].time, slab[i].velocity, pressures[i]);
    return SpaceTimeSlab(std::move(out));
}

std::vector<ScalarField> ball_parts(const SpaceTimeSlab& slab, bool harmonic)
{
    std::vector<ScalarField> parts;
    parts.reserve(slab.size());
    for (const auto& s : slab.snapshots()) {
        auto split = split_pressure(s, Ball{{0.0, 0.0, 0.0}, 1.0});
        parts.push_back(harmonic ? std::move(split.p2) : std::move(split.p1));
    }
    return parts;
}

std::optional<double> slope_and_order(const std::vector<double>& R, const std::vector<double>& values, bool& decreasing)
{
    std::vector<std::size_t> order(R.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return R[a] > R[b]; });
    decreasing = order.size() >= 2;
    for (std::size_t i = 1; i < order.size(); ++i)
        if (!(values[order[i]] < values[order[i - 1]])) decreasing = false;
    return log_log_slope(R, values);
}

void check_vanishing_args(std::span<const double> Rs, double T, double a)
{
    if (Rs.empty()) throw DomainError("harmonic_part_vanishing: no R values");
    if (!(T < 0.0)) throw DomainError("harmonic_part_vanishing: T must be negative");
    if (!(a > 0.0)) throw DomainError("harmonic_part_vanishing: a must be positive");
    for (double R : Rs) {
        validate(ZoomParams{R, T});
        if (a * R >= 2.0 / 3.0)
            throw GeometryError("harmonic_part_vanishing: a R = " + fmt(a * R) + " is not below 2/3");
    }
}

Snapshot sample_snapshot(const AnalyticField& field, const Grid& grid, double t)
{
    const int n = grid.n();
    std::array<std::vector<double>, 4> v;
    for (auto& c : v) c.assign(grid.size(), 0.0);
    parallel_for(static_cast<std::size_t>(n) * n, [&](std::size_t b, std::size_t e) {
        for (std::size_t jk = b; jk < e; ++jk) {
            const int j = static_cast<int>(jk % n), k = static_cast<int>(jk / n);
            for (int i = 0; i < n; ++i) {
                const Vec3 x = grid.position(i, j, k);
                const std::size_t idx = grid.index(i, j, k);
                const Vec3 u = field.velocity ? field.velocity(x, t) : Vec3{};
                for (int c = 0; c < 3; ++c) v[c][idx] = u[c];
                v[3][idx] = field.pressure ? field.pressure(x, t) : 0.0;
            }
        }
    });
    VectorField u(ScalarField(grid, std::move(v[0])), ScalarField(grid, std::move(v[1])),
                  ScalarField(grid, std::move(v[2])));
    return Snapshot(t, std::move(u), ScalarField(grid, std::move(v[3])));
}

} // namespace

void validate(const ZoomParams& p)
{
    if (!(p.R_k > 0.0 && p.R_k <= 1.0)) throw DomainError("zoom: R_k must lie in (0, 1], got " + fmt(p.R_k));
    if (!(p.T < 0.0)) throw DomainError("zoom: T must be negative, got " + fmt(p.T));
}

SpaceTimeSlab zoom(const SpaceTimeSlab& slab, const ZoomParams& params, const Grid& target, const ZoomOptions& options)
{
    validate(params);
    const double R = params.R_k;
    const double R2 = R * R;
    const double tk = params.t_k();
    const double tol = time_tol(tk);
    if (slab.t_start() > tk + tol || slab.t_end() < -tol)
        throw WindowError("zoom: source slab [" + fmt(slab.t_start()) + ", " + fmt(slab.t_end()) +
                          "] does not cover [" + fmt(tk) + ", 0]");

    std::vector<double> times = options.times ? *options.times : default_times(slab, params);
    for (double& s : times) {
        s = snap(s, params.T);
        if (s < params.T || s > 0.0)
            throw WindowError("zoom: target time " + fmt(s) + " outside [" + fmt(params.T) + ", 0]");
    }

    const int n = target.n();
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) xs[i] = R * target.coord(i);

    struct Sampled {
        std::size_t index;
        std::array<std::vector<double>, 4> values;
    };
    std::deque<Sampled> cache;  // the current bracketing pair
    auto sampled = [&](std::size_t j) -> const Sampled& {
        for (const auto& c : cache)
            if (c.index == j) return c;
        Sampled s{j, {}};
        const Snapshot& src = slab[j];
        for (int c = 0; c < 3; ++c)
            s.values[c] = sample_lattice(src.velocity[c], xs, xs, xs, options.mode, options.zero_outside);
        s.values[3] = sample_lattice(src.pressure, xs, xs, xs, options.mode, options.zero_outside);
        if (cache.size() == 2) cache.pop_front();
        cache.push_back(std::move(s));
        return cache.back();
    };

    const auto src_times = slab.times();
    std::vector<Snapshot> out;
    out.reserve(times.size());
    for (double s : times) {
        const double t = std::clamp(R2 * s, slab.t_start(), slab.t_end());
        auto it = std::upper_bound(src_times.begin(), src_times.end(), t);
        std::size_t j1 = static_cast<std::size_t>(it - src_times.begin());
        std::size_t j0 = j1 == 0 ? 0 : j1 - 1;
        if (j1 >= src_times.size()) j1 = j0;
        const double w = j1 == j0 ? 0.0 : (t - src_times[j0]) / (src_times[j1] - src_times[j0]);

        std::array<std::vector<double>, 4> mixed;
        if (w == 0.0) {
            mixed = sampled(j0).values;
        } else {
            const auto a = sampled(j0).values;
            const auto& b = sampled(j1).values;
            for (int c = 0; c < 4; ++c) {
                mixed[c].resize(a[c].size());
                for (std::size_t i = 0; i < a[c].size(); ++i) mixed[c][i] = (1.0 - w) * a[c][i] + w * b[c][i];
            }
        }
        VectorField u(from_values(target, std::move(mixed[0]), R), from_values(target, std::move(mixed[1]), R),
                      from_values(target, std::move(mixed[2]), R));
        out.emplace_back(s, std::move(u), from_values(target, std::move(mixed[3]), R2));
    }
    return SpaceTimeSlab(std::move(out));
}

SpaceTimeSlab sample_analytic(const AnalyticField& field, const Grid& grid, std::span<const double> times)
{
    std::vector<Snapshot> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(sample_snapshot(field, grid, t));
    return SpaceTimeSlab(std::move(out));
}

AnalyticField zoom_analytic(const AnalyticField& field, const ZoomParams& params)
{
    validate(params);
    const double R = params.R_k;
    AnalyticField out;
    if (field.velocity)
        out.velocity = [f = field.velocity, R](const Vec3& y, double s) {
            Vec3 v = f({R * y[0], R * y[1], R * y[2]}, R * R * s);
            for (auto& c : v) c *= R;
            return v;
        };
    if (field.pressure)
        out.pressure = [f = field.pressure, R](const Vec3& y, double s) {
            return R * R * f({R * y[0], R * y[1], R * y[2]}, R * R * s);
        };
    return out;
}

ScalingReport compare_scaling_sides(const SpaceTimeSlab& source, const SpaceTimeSlab& zoomed, const ZoomParams& params,
                                    double a, const SpaceTimeSlab* source_p1, const SpaceTimeSlab* zoomed_p1)
{
    validate(params);
    if (!(a > 0.0)) throw DomainError("scaling check: a must be positive");
    if (a * a > -params.T) throw WindowError("scaling check: Q(a) reaches below T (a^2 > -T)");
    const double R = params.R_k;
    const double tk = params.t_k();
    const Vec3 origin{0.0, 0.0, 0.0};

    const Density cubed = [](const Snapshot& s) { return speed_power(s.velocity, 3.0); };
    ScalingReport rep;
    rep.params = params;
    rep.a = a;
    rep.window_average = sides(window_average(source, Ball{origin, 1.0}, tk, 0.0, cubed),
                               window_average(zoomed, Ball{origin, 1.0 / R}, params.T, 0.0, cubed));

    const Density ckn = [](const Snapshot& s) { return ckn_density(s); };
    const double aR = a * R;
    rep.cylinder = sides(space_time_integral(source, ParabolicCylinder{Ball{origin, aR}, 0.0}, ckn) / (aR * aR),
                         space_time_integral(zoomed, ParabolicCylinder{Ball{origin, a}, 0.0}, ckn) / (a * a));

    if (source_p1 && zoomed_p1) {
        const Density p32 = [](const Snapshot& s) { return abs_power(s.pressure, 1.5); };
        rep.pressure_window_average = sides(window_average(*source_p1, Ball{origin, 1.0}, tk, 0.0, p32),
                                            window_average(*zoomed_p1, Ball{origin, 1.0 / R}, params.T, 0.0, p32));
    }
    return rep;
}

ScalingReport scaling_identity_check(const SpaceTimeSlab& slab, const ZoomParams& params, double a, const Grid& target,
                                     const ScalingOptions& options)
{
    const auto zoomed = zoom(slab, params, target, options.zoom);
    if (!options.include_pressure_part) return compare_scaling_sides(slab, zoomed, params, a);
    const auto src_p1 = with_pressure(slab, ball_parts(slab, false));
    const auto zoomed_p1 = zoom(src_p1, params, target, options.zoom);
    return compare_scaling_sides(slab, zoomed, params, a, &src_p1, &zoomed_p1);
}

ScalingReport scaling_identity_check(const AnalyticField& field, const ZoomParams& params, double a, const Grid& source,
                                     std::span<const double> source_times, const Grid& target)
{
    validate(params);
    const double R2 = params.R_k * params.R_k;
    std::vector<double> target_times;
    target_times.reserve(source_times.size());
    for (double t : source_times) target_times.push_back(snap(t / R2, params.T));
    const auto src = sample_analytic(field, source, source_times);
    const auto zoomed = sample_analytic(zoom_analytic(field, params), target, target_times);
    return compare_scaling_sides(src, zoomed, params, a);
}

VanishingSeries harmonic_part_vanishing(const std::function<double(const Vec3&, double)>& p2, std::span<const double> Rs,
                                        double T, double a, const Grid& target, std::span<const double> target_times)
{
    check_vanishing_args(Rs, T, a);
    const auto cells = ball_cells(target, Ball{{0.0, 0.0, 0.0}, a});
    const double h3 = target.cell_volume();

    VanishingSeries out;
    out.a = a;
    out.T = T;
    for (double R : Rs) {
        TimeSeries series;
        for (double s : target_times) {
            std::vector<double> terms(cells.size());
            for (std::size_t c = 0; c < cells.size(); ++c) {
                const std::size_t idx = cells[c];
                const int n = target.n();
                const int i = static_cast<int>(idx % n), j = static_cast<int>((idx / n) % n),
                          k = static_cast<int>(idx / (static_cast<std::size_t>(n) * n));
                const Vec3 y = target.position(i, j, k);
                terms[c] = std::pow(std::abs(R * R * p2({R * y[0], R * y[1], R * y[2]}, R * R * s)), 1.5);
            }
            series.t.push_back(s);
            series.values.push_back(h3 * pairwise_sum(terms));
        }
        out.R.push_back(R);
        out.values.push_back(trapezoid(series, T, 0.0) / -T);
    }
    out.fitted_exponent = slope_and_order(out.R, out.values, out.decreasing);
    return out;
}

VanishingSeries harmonic_part_vanishing(const SpaceTimeSlab& slab, std::span<const double> Rs, double T, double a,
                                        const Grid& target, const ZoomOptions& options)
{
    check_vanishing_args(Rs, T, a);
    const auto harmonic = with_pressure(slab, ball_parts(slab, true));
    const Density p32 = [](const Snapshot& s) { return abs_power(s.pressure, 1.5); };

    VanishingSeries out;
    out.a = a;
    out.T = T;
    for (double R : Rs) {
        const auto zoomed = zoom(harmonic, ZoomParams{R, T}, target, options);
        out.R.push_back(R);
        out.values.push_back(window_average(zoomed, Ball{{0.0, 0.0, 0.0}, a}, T, 0.0, p32));
    }
    out.fitted_exponent = slope_and_order(out.R, out.values, out.decreasing);
    return out;
}

double synthetic_profile_l3_cubed(int k)
{
    const double kk = k;
    return 2.0 * std::numbers::pi * std::numbers::pi * kk * kk / ((3.0 * kk - 1.0) * (3.0 * kk - 2.0));
}

Vec3 synthetic_velocity(const SyntheticProfile& p, const Vec3& x, double t)
{
    const double u = p.T_sing - t;
    const double lambda = std::sqrt(u);
    const Vec3 y{x[0] / lambda, x[1] / lambda, x[2] / lambda};
    const double s = 1.0 - (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    if (s <= 0.0) return {0.0, 0.0, 0.0};
    const double c = -2.0 * p.k * std::pow(s, p.k - 1) * p.amplitude * std::pow(u, -p.alpha);
    return {c * y[1], -c * y[0], 0.0};
}

namespace {

void check_profile(const SyntheticProfile& profile)
{
    if (!(profile.alpha >= 0.0)) throw DomainError("synthetic profile: alpha must be non-negative");
    if (profile.k < 2) throw DomainError("synthetic profile: k must be at least 2");
    if (!(profile.amplitude >= 0.0)) throw DomainError("synthetic profile: amplitude must be non-negative");
}

} // namespace

Snapshot synthetic_snapshot(const SyntheticProfile& profile, const Grid& grid, double t)
{
    check_profile(profile);
    if (!(t < profile.T_sing))
        throw DomainError("synthetic profile: t = " + fmt(t) + " is not before T_sing = " + fmt(profile.T_sing));
    AnalyticField field;
    field.velocity = [&profile](const Vec3& x, double s) { return synthetic_velocity(profile, x, s); };
    auto s = sample_snapshot(field, grid, t);
    auto p = pressure_poisson(s.velocity, false);
    return Snapshot(t, std::move(s.velocity), std::move(p));
}

SpaceTimeSlab synthetic_profile(const SyntheticProfile& profile, const Grid& grid, std::span<const double> times)
{
    check_profile(profile);
    for (double t : times)
        if (!(t < profile.T_sing))
            throw DomainError("synthetic profile: t = " + fmt(t) + " is not before T_sing = " + fmt(profile.T_sing));
    std::vector<Snapshot> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(synthetic_snapshot(profile, grid, t));
    return SpaceTimeSlab(std::move(out));
}

} // namespace nsrl
