#include "nsrl/diagnostics.hpp"

#include "nsrl/error.hpp"
#include "nsrl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace nsrl {

namespace {

std::string fmt(double x)
{
    std::ostringstream s;
    s.precision(10);
    s << x;
    return s.str();
}

Vec3 node_position(const Grid& g, std::size_t c)
{
    const std::size_t n = static_cast<std::size_t>(g.n());
    return g.position(static_cast<int>(c % n), static_cast<int>((c / n) % n), static_cast<int>(c / (n * n)));
}

// Evaluates a slab functional only at the snapshots needed for [a, b].
TimeSeries evaluate_window(const SpaceTimeSlab& slab, double a, double b, const SnapshotFunctional& fn)
{
    TimeSeries out;
    for (std::size_t i = 0; i < slab.size(); ++i) {
        const double t = slab[i].time;
        const bool needed = (t >= a && t <= b) || (i + 1 < slab.size() && t < a && slab[i + 1].time > a) ||
                            (i > 0 && t > b && slab[i - 1].time < b);
        if (!needed) continue;
        out.t.push_back(t);
        out.values.push_back(fn(slab[i]));
    }
    return out;
}

double smoothstep(double u)
{
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double smoothstep_rate(double u)
{
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double w = u * (1.0 - u);
    return 30.0 * w * w;
}

} // namespace

TimeSeries g_profile(const SpaceTimeSlab& slab, const Ball& ball)
{
    require_fits(slab.grid(), ball);
    return evaluate(slab, [&](const Snapshot& s) { return integrate_ball(speed_power(s.velocity, 3.0), ball); });
}

std::optional<double> log_log_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) return std::nullopt;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = m * sxx - sx * sx;
    if (den == 0.0) return std::nullopt;
    return (m * sxy - sx * sy) / den;
}

// ---------------------------------------------------------------------------

CriterionProfile criterion_profile(const SpaceTimeSlab& slab, double T, const CriterionOptions& opt)
{
    if (!(opt.delta > 0.0)) throw DomainError("criterion: delta must be positive");
    if (opt.windows < 1) throw DomainError("criterion: need at least one window");
    if (T > slab.t_end()) throw WindowError("criterion: T = " + fmt(T) + " is after the slab end " + fmt(slab.t_end()));
    if (T - opt.delta < slab.t_start())
        throw WindowError("criterion: largest window starts at " + fmt(T - opt.delta) + ", before the slab start");
    if (opt.domain) require_fits(slab.grid(), *opt.domain);

    const double smallest = opt.delta * std::ldexp(1.0, -(opt.windows - 1));
    const auto times = slab.times();
    const auto in_window = std::count_if(times.begin(), times.end(), [&](double t) { return t >= T - smallest && t <= T; });
    if (in_window < 2)
        throw ResolutionError("criterion: smallest window of length " + fmt(smallest) + " holds " +
                              std::to_string(in_window) + " snapshot(s)");

    const auto series = evaluate_window(slab, T - opt.delta, T, [&](const Snapshot& s) {
        const auto d = speed_power(s.velocity, 3.0);
        return opt.domain ? integrate_ball(d, *opt.domain) : integrate_box(d);
    });

    CriterionProfile out;
    out.T = T;
    std::vector<double> lengths, averages;
    for (int j = 0; j < opt.windows; ++j) {
        const double len = opt.delta * std::ldexp(1.0, -j);
        const double a = trapezoid(series, T - len, T) / len;
        out.windows.push_back({T - len, a});
        lengths.push_back(len);
        averages.push_back(a);
    }
    const int tail = opt.windows / 2;
    out.m_proxy = out.windows[tail].average;
    out.M_proxy = out.windows[tail].average;
    for (int j = tail; j < opt.windows; ++j) {
        out.m_proxy = std::min(out.m_proxy, out.windows[j].average);
        out.M_proxy = std::max(out.M_proxy, out.windows[j].average);
    }
    out.fitted_exponent = log_log_slope(lengths, averages);
    return out;
}

// ---------------------------------------------------------------------------

GoodSlices good_slices(const TimeSeries& g, double t_k, double M, double t_final)
{
    if (!(M > 0.0)) throw DomainError("good slices: M must be positive");
    if (!(t_k < t_final)) throw WindowError("good slices: t_k must precede t_final");
    if (g.t.size() != g.values.size() || g.t.empty() || g.t.front() > t_k || g.t.back() < t_final)
        throw WindowError("good slices: g does not cover [" + fmt(t_k) + ", " + fmt(t_final) + "]");

    GoodSlices out;
    out.M = M;
    out.threshold = 10.0 * M;
    out.t_k = t_k;
    out.t_final = t_final;
    out.Ek_bound = (t_final - t_k) / 10.0;

    // Left-endpoint step function on the snapshot partition clipped to the window, so
    // the Chebyshev inequality holds exactly for the discrete measure and average.
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < g.t.size(); ++i) {
        const double lo = std::max(t_k, g.t[i]);
        const double hi = std::min(t_final, g.t[i + 1]);
        if (!(hi > lo)) continue;
        integral += g.values[i] * (hi - lo);
        if (g.values[i] > out.threshold) out.E_k_measure += hi - lo;
    }
    out.window_average = integral / (t_final - t_k);
    out.precondition_holds = out.window_average <= M;

    for (std::size_t i = g.t.size(); i-- > 0;) {
        if (g.t[i] > t_final || g.t[i] < t_k) continue;
        if (g.values[i] <= out.threshold) {
            out.s_k = g.t[i];
            out.g_at_sk = g.values[i];
            return out;
        }
    }
    throw SelectionError("good slices: no sample in [" + fmt(t_k) + ", " + fmt(t_final) + "] has g <= 10M = " +
                         fmt(out.threshold) + (out.precondition_holds ? "" : " (window average exceeds M)"));
}

FatouCheck fatou_final_slice(const TimeSeries& g, std::span<const double> t_ks, double M, double t_final, double tol)
{
    FatouCheck out;
    for (double t_k : t_ks) out.slices.push_back(good_slices(g, t_k, M, t_final));
    out.g_final = interpolate(g, t_final);
    out.bound = 10.0 * M;
    out.holds = out.g_final <= out.bound + tol;
    return out;
}

// ---------------------------------------------------------------------------

CknScanResult ckn_scan(const SpaceTimeSlab& slab, const Vec3& center, double t0, std::span<const double> radii,
                       const CknOptions& opt)
{
    if (radii.empty()) throw DomainError("ckn scan: no radii");
    if (!std::isfinite(opt.eps_threshold) || !(opt.eps_threshold > 0.0))
        throw DomainError("ckn scan: eps_threshold must be supplied and positive");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw DomainError("ckn scan: radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) throw DomainError("ckn scan: radii must be strictly decreasing");
    }
    const Grid& g = slab.grid();
    const double rmax = radii.front(), rmin = radii.back();
    require_fits(g, Ball{center, rmax});
    if (t0 > slab.t_end() || t0 - rmax * rmax < slab.t_start())
        throw GeometryError("ckn scan: cylinder Q(z0, " + fmt(rmax) + ") leaves the slab time range");
    if (rmin < opt.min_radius_cells * g.spacing())
        throw ResolutionError("ckn scan: radius " + fmt(rmin) + " is under " + std::to_string(opt.min_radius_cells) +
                              " grid cells");
    // The smallest cylinder must span at least two snapshot intervals.
    double widest = 0.0;
    for (std::size_t i = 0; i + 1 < slab.size(); ++i)
        if (slab[i + 1].time > t0 - rmin * rmin && slab[i].time < t0)
            widest = std::max(widest, slab[i + 1].time - slab[i].time);
    if (rmin * rmin < 2.0 * widest)
        throw ResolutionError("ckn scan: R^2 = " + fmt(rmin * rmin) + " is under two snapshot intervals");

    std::map<const Snapshot*, ScalarField> cache;
    const Density density = [&](const Snapshot& s) {
        auto it = cache.find(&s);
        if (it == cache.end()) it = cache.emplace(&s, ckn_density(s)).first;
        return it->second;
    };

    CknScanResult out;
    out.center = center;
    out.t0 = t0;
    out.eps_threshold = opt.eps_threshold;
    for (double r : radii) {
        const double v = space_time_integral(slab, ParabolicCylinder{Ball{center, r}, t0}, density) / (r * r);
        out.radii.push_back(r);
        out.values.push_back(v);
    }
    out.fitted_slope = log_log_slope(out.radii, out.values);
    out.flagged = *std::min_element(out.values.begin(), out.values.end()) >= opt.eps_threshold;
    return out;
}

// ---------------------------------------------------------------------------

double BumpTestFunction::value(const Vec3& d, double t) const
{
    const double s2 = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (rho * rho);
    if (s2 >= 1.0) return 0.0;
    return amplitude * std::pow(1.0 - s2, k) * smoothstep((t - t_on) / tau);
}

EnergyResidual energy_residual(const SpaceTimeSlab& slab, const BumpTestFunction& phi, double t)
{
    if (!(phi.amplitude >= 0.0)) throw DomainError("test function: negative amplitude makes phi negative");
    if (!(phi.rho > 0.0) || !(phi.tau > 0.0)) throw DomainError("test function: rho and tau must be positive");
    if (phi.k < 2) throw DomainError("test function: bump exponent must be at least 2");
    if (phi.t_on < slab.t_start()) throw DomainError("test function does not vanish at the slab start");
    if (t < slab.t_start() || t > slab.t_end()) throw WindowError("energy residual: t outside the slab");
    const Grid& g = slab.grid();
    const Ball support{phi.center, phi.rho};
    const auto cells = ball_cells(g, support);
    const double h3 = g.cell_volume();
    const double rho2 = phi.rho * phi.rho;
    const int k = phi.k;

    struct Parts {
        double mass, dissipation, flux;
    };
    const auto parts = [&](const Snapshot& s) {
        const double ramp = smoothstep((s.time - phi.t_on) / phi.tau);
        const double ramp_rate = smoothstep_rate((s.time - phi.t_on) / phi.tau) / phi.tau;
        if (ramp == 0.0 && ramp_rate == 0.0) return Parts{0.0, 0.0, 0.0};
        const std::array<VectorField, 3> grad{gradient(s.velocity[0]), gradient(s.velocity[1]), gradient(s.velocity[2])};
        std::vector<double> a(cells.size()), d(cells.size()), f(cells.size());
        parallel_for(cells.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t q = lo; q < hi; ++q) {
                const auto c = cells[q];
                const auto r = g.displacement(phi.center, node_position(g, c));
                const double s2 = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]) / rho2;
                const double w = 1.0 - s2;
                const double bump = phi.amplitude * std::pow(w, k);
                const double dfac = -2.0 * k * phi.amplitude * std::pow(w, k - 1) / rho2;  // grad B = dfac * r
                const double lap = -2.0 * k * phi.amplitude / rho2 * std::pow(w, k - 2) * (3.0 * w - 2.0 * (k - 1) * s2);
                const double ph = bump * ramp;
                const double ph_t = bump * ramp_rate;
                const double u0 = s.velocity[0][c], u1 = s.velocity[1][c], u2 = s.velocity[2][c];
                const double speed2 = u0 * u0 + u1 * u1 + u2 * u2;
                double grad2 = 0.0;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) grad2 += grad[i][j][c] * grad[i][j][c];
                const double udotgrad = dfac * ramp * (u0 * r[0] + u1 * r[1] + u2 * r[2]);
                a[q] = ph * speed2;
                d[q] = ph * grad2;
                f[q] = speed2 * (lap * ramp + ph_t) + udotgrad * (speed2 + 2.0 * s.pressure[c]);
            }
        });
        return Parts{h3 * pairwise_sum(a), h3 * pairwise_sum(d), h3 * pairwise_sum(f)};
    };

    TimeSeries mass, diss, flux;
    for (std::size_t i = 0; i < slab.size(); ++i) {
        const double ti = slab[i].time;
        if (ti > t && (i == 0 || slab[i - 1].time >= t)) break;
        const auto p = parts(slab[i]);
        mass.t.push_back(ti);
        diss.t.push_back(ti);
        flux.t.push_back(ti);
        mass.values.push_back(p.mass);
        diss.values.push_back(p.dissipation);
        flux.values.push_back(p.flux);
    }
    EnergyResidual out;
    out.test_function_id = phi.id;
    out.t = t;
    const double t0 = slab.t_start();
    const bool span = t > t0;
    out.lhs = interpolate(mass, t) + (span ? 2.0 * trapezoid(diss, t0, t) : 0.0);
    out.rhs = span ? trapezoid(flux, t0, t) : 0.0;
    out.residual = out.rhs - out.lhs;
    return out;
}

// ---------------------------------------------------------------------------

VorticityCheck vorticity_harmonic_check(const VectorField& u)
{
    auto omega = curl(u);
    const double wmax = omega.max_norm();
    const double lmax = laplacian(u).max_norm();
    return VorticityCheck{std::move(omega), wmax, lmax};
}

VectorField harmonic_generator(const Grid& grid, const Vec3& value)
{
    VectorField v(grid);
    for (int c = 0; c < 3; ++c)
        for (auto& x : v[c].values()) x = value[c];
    return v;
}

// ---------------------------------------------------------------------------

DecayScan decay_scan(const SpaceTimeSlab& slab, std::span<const Vec3> centers, double t0, double r)
{
    if (t0 > slab.t_end() || t0 - r * r < slab.t_start())
        throw GeometryError("decay scan: cylinder time range leaves the slab");
    std::map<const Snapshot*, ScalarField> cache;
    const Density density = [&](const Snapshot& s) {
        auto it = cache.find(&s);
        if (it == cache.end()) it = cache.emplace(&s, ckn_density(s)).first;
        return it->second;
    };
    DecayScan out;
    for (const auto& c : centers) {
        out.centers.push_back(c);
        out.values.push_back(space_time_integral(slab, ParabolicCylinder{Ball{c, r}, t0}, density));
    }
    out.decreasing = out.values.size() >= 2;
    for (std::size_t i = 1; i < out.values.size(); ++i)
        if (!(out.values[i] < out.values[i - 1])) out.decreasing = false;
    return out;
}

} // namespace nsrl
