#include "nsrl/solver.hpp"

#include "nsrl/error.hpp"
#include "nsrl/field_ops.hpp"
#include "nsrl/parallel.hpp"
#include "nsrl/spectral.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace nsrl {

namespace {

using SpecVec = std::array<Spectrum, 3>;

// Per-mode wavevectors shared by projection, pressure and the integrator.
struct ModeTable {
    std::vector<std::array<double, 3>> kd;  // derivative wavevector, Nyquist components zeroed
    std::vector<double> k2;                  // full |k|^2 for the viscous factor
    std::vector<char> keep;                  // 2/3-rule mask

    explicit ModeTable(const Grid& g)
    {
        const double k0 = 2.0 * std::numbers::pi / g.box_length();
        const int n = g.n();
        const std::size_t size = static_cast<std::size_t>(n) * n * (n / 2 + 1);
        kd.resize(size);
        k2.resize(size);
        keep.resize(size);
        const auto comp = [&](int m) { return 2 * std::abs(m) == n ? 0.0 : k0 * m; };
        for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz) {
            kd[idx] = {comp(mx), comp(my), comp(mz)};
            k2[idx] = k0 * k0 * static_cast<double>(mx * mx + my * my + mz * mz);
            keep[idx] = dealias_keep(mx, my, mz, n) ? 1 : 0;
        });
    }
};

void project_in_place(SpecVec& s, const ModeTable& modes)
{
    parallel_for(modes.kd.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto& k = modes.kd[i];
            const double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if (kk == 0.0) {
                // Mean flow survives; pure Nyquist content has no resolvable divergence.
                if (modes.k2[i] != 0.0) s[0][i] = s[1][i] = s[2][i] = 0.0;
                continue;
            }
            const Complex dot = (k[0] * s[0][i] + k[1] * s[1][i] + k[2] * s[2][i]) / kk;
            for (int c = 0; c < 3; ++c) s[c][i] -= k[c] * dot;
        }
    });
}

// Spectra of the six products v_i v_j, ordered xx, yy, zz, xy, xz, yz.
std::array<Spectrum, 6> product_spectra(const SpectralTransform& fft, const std::array<std::vector<double>, 3>& u)
{
    static constexpr int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
    std::array<Spectrum, 6> out;
    std::vector<double> prod(u[0].size());
    for (int q = 0; q < 6; ++q) {
        const auto& a = u[pairs[q][0]];
        const auto& b = u[pairs[q][1]];
        parallel_for(prod.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) prod[i] = a[i] * b[i];
        });
        out[q] = fft.forward(prod);
    }
    return out;
}

class Integrator {
public:
    Integrator(const Grid& g, StepOptions opt) : grid_(g), fft_(g), modes_(g), opt_(opt) {}

    SpecVec to_spectral(const VectorField& v) const
    {
        return {fft_.forward(v[0].values()), fft_.forward(v[1].values()), fft_.forward(v[2].values())};
    }

    std::array<std::vector<double>, 3> to_physical(const SpecVec& s) const
    {
        return {fft_.inverse(s[0]), fft_.inverse(s[1]), fft_.inverse(s[2])};
    }

    SpecVec nonlinear(const SpecVec& s) const { return nonlinear(to_physical(s)); }

    // -P div(u u) in spectral space.
    SpecVec nonlinear(const std::array<std::vector<double>, 3>& u) const
    {
        const auto f = product_spectra(fft_, u);
        SpecVec out;
        for (auto& c : out) c.resize(modes_.kd.size());
        const bool dealias = opt_.dealias;
        parallel_for(modes_.kd.size(), [&](std::size_t b, std::size_t e) {
            const Complex I(0.0, 1.0);
            for (std::size_t i = b; i < e; ++i) {
                if (dealias && !modes_.keep[i]) {
                    out[0][i] = out[1][i] = out[2][i] = 0.0;
                    continue;
                }
                const auto& k = modes_.kd[i];
                const Complex fxx = f[0][i], fyy = f[1][i], fzz = f[2][i], fxy = f[3][i], fxz = f[4][i], fyz = f[5][i];
                out[0][i] = -I * (k[0] * fxx + k[1] * fxy + k[2] * fxz);
                out[1][i] = -I * (k[0] * fxy + k[1] * fyy + k[2] * fyz);
                out[2][i] = -I * (k[0] * fxz + k[1] * fyz + k[2] * fzz);
            }
        });
        project_in_place(out, modes_);
        return out;
    }

    SpecVec advance(const SpecVec& v, double dt) const
    {
        const std::size_t m = modes_.kd.size();
        std::vector<double> e1(m), e2(m);
        for (std::size_t i = 0; i < m; ++i) {
            e1[i] = std::exp(-opt_.viscosity * modes_.k2[i] * dt * 0.5);
            e2[i] = e1[i] * e1[i];
        }
        const auto combine = [&](auto&& fn) {
            SpecVec out;
            for (auto& c : out) c.resize(m);
            parallel_for(m, [&](std::size_t b, std::size_t e) {
                for (int c = 0; c < 3; ++c)
                    for (std::size_t i = b; i < e; ++i) out[c][i] = fn(c, i);
            });
            return out;
        };
        const auto u = to_physical(v);
        check_cfl(u, dt);
        const auto a = nonlinear(u);
        const auto b = nonlinear(combine([&](int c, std::size_t i) { return e1[i] * (v[c][i] + 0.5 * dt * a[c][i]); }));
        const auto cc = nonlinear(combine([&](int c, std::size_t i) { return e1[i] * v[c][i] + 0.5 * dt * b[c][i]; }));
        const auto d = nonlinear(combine([&](int c, std::size_t i) { return e2[i] * v[c][i] + dt * e1[i] * cc[c][i]; }));
        return combine([&](int c, std::size_t i) {
            return e2[i] * v[c][i] + dt / 6.0 * (e2[i] * a[c][i] + 2.0 * e1[i] * (b[c][i] + cc[c][i]) + d[c][i]);
        });
    }

    ScalarField source(const std::array<std::vector<double>, 3>& u) const
    {
        const auto f = product_spectra(fft_, u);
        Spectrum q(modes_.kd.size());
        parallel_for(q.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto& k = modes_.kd[i];
                q[i] = k[0] * k[0] * f[0][i] + k[1] * k[1] * f[1][i] + k[2] * k[2] * f[2][i] +
                       2.0 * (k[0] * k[1] * f[3][i] + k[0] * k[2] * f[4][i] + k[1] * k[2] * f[5][i]);
            }
        });
        return ScalarField(grid_, fft_.inverse(q));
    }

    ScalarField pressure(const std::array<std::vector<double>, 3>& u) const
    {
        const auto f = product_spectra(fft_, u);
        Spectrum p(modes_.kd.size());
        const bool dealias = opt_.dealias;
        parallel_for(p.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto& k = modes_.kd[i];
                const double kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if (kk == 0.0 || (dealias && !modes_.keep[i])) {
                    p[i] = 0.0;
                    continue;
                }
                const Complex kfk = k[0] * k[0] * f[0][i] + k[1] * k[1] * f[1][i] + k[2] * k[2] * f[2][i] +
                                    2.0 * (k[0] * k[1] * f[3][i] + k[0] * k[2] * f[4][i] + k[1] * k[2] * f[5][i]);
                p[i] = -kfk / kk;
            }
        });
        return ScalarField(grid_, fft_.inverse(p));
    }

    Snapshot make_snapshot(double t, const SpecVec& s) const
    {
        auto u = to_physical(s);
        for (const auto& c : u)
            for (double x : c)
                if (!std::isfinite(x)) throw DivergenceError("non-finite velocity");
        auto p = pressure(u);
        VectorField v(ScalarField(grid_, std::move(u[0])), ScalarField(grid_, std::move(u[1])),
                      ScalarField(grid_, std::move(u[2])));
        return Snapshot(t, std::move(v), std::move(p));
    }

    void check_cfl(const std::array<std::vector<double>, 3>& u, double dt) const
    {
        double m = 0.0;
        for (std::size_t i = 0; i < u[0].size(); ++i) {
            const double s = std::sqrt(u[0][i] * u[0][i] + u[1][i] * u[1][i] + u[2][i] * u[2][i]);
            if (!std::isfinite(s)) throw DivergenceError("non-finite velocity");
            m = std::max(m, s);
        }
        const double courant = m * dt / grid_.spacing();
        if (courant > 1.0) {
            std::ostringstream msg;
            msg << "CFL number " << courant << " exceeds 1";
            throw StabilityError(msg.str());
        }
    }

    const Grid& grid() const { return grid_; }

private:
    Grid grid_;
    SpectralTransform fft_;
    ModeTable modes_;
    StepOptions opt_;
};

std::string at_time(double t)
{
    std::ostringstream s;
    s.precision(17);
    s << " at t = " << t;
    return s.str();
}

} // namespace

InitialCondition::Kind parse_initial_kind(const std::string& name)
{
    using K = InitialCondition::Kind;
    if (name == "zero") return K::zero;
    if (name == "taylor_green") return K::taylor_green;
    if (name == "beltrami") return K::beltrami;
    if (name == "random") return K::random;
    throw ConfigError("init", "unknown initial condition '" + name + "'");
}

std::string to_string(InitialCondition::Kind kind)
{
    switch (kind) {
    case InitialCondition::Kind::zero: return "zero";
    case InitialCondition::Kind::taylor_green: return "taylor_green";
    case InitialCondition::Kind::beltrami: return "beltrami";
    case InitialCondition::Kind::random: return "random";
    }
    return "unknown";
}

VectorField leray_project(const VectorField& v)
{
    Integrator it(v.grid(), {});
    ModeTable modes(v.grid());
    auto s = it.to_spectral(v);
    project_in_place(s, modes);
    auto u = it.to_physical(s);
    const Grid& g = v.grid();
    return VectorField(ScalarField(g, std::move(u[0])), ScalarField(g, std::move(u[1])), ScalarField(g, std::move(u[2])));
}

ScalarField pressure_poisson(const VectorField& v, bool dealias)
{
    Integrator it(v.grid(), StepOptions{dealias, 1.0});
    return it.pressure({std::vector<double>(v[0].values().begin(), v[0].values().end()),
                        std::vector<double>(v[1].values().begin(), v[1].values().end()),
                        std::vector<double>(v[2].values().begin(), v[2].values().end())});
}

ScalarField pressure_source(const VectorField& v)
{
    Integrator it(v.grid(), StepOptions{false, 1.0});
    return it.source({std::vector<double>(v[0].values().begin(), v[0].values().end()),
                      std::vector<double>(v[1].values().begin(), v[1].values().end()),
                      std::vector<double>(v[2].values().begin(), v[2].values().end())});
}

Snapshot step(const Snapshot& state, double dt, const StepOptions& options)
{
    Integrator it(state.grid(), options);
    return it.make_snapshot(state.time + dt, it.advance(it.to_spectral(state.velocity), dt));
}

long step_count(const SolverConfig& c)
{
    if (!(c.dt > 0.0)) throw ConfigError("dt", "must be positive");
    const double span = c.t_end - c.t_start;
    if (!(span > 0.0)) return 0;
    // Tolerate round-off in t_end / dt so that e.g. 0.1 / 1e-3 gives 100 steps.
    return static_cast<long>(std::ceil(span / c.dt * (1.0 - 1e-12)));
}

SpaceTimeSlab run(const SolverConfig& config)
{
    if (config.output_stride < 1) throw ConfigError("output_stride", "must be a positive integer");
    if (!(config.viscosity > 0.0)) throw ConfigError("viscosity", "must be positive");
    const long nsteps = step_count(config);
    if (nsteps == 0) throw WindowError("degenerate run: t_end must exceed t_start");

    const Grid& g = config.grid;
    Integrator it(g, StepOptions{config.dealias, config.viscosity});
    auto v0 = initial_velocity(g, config.initial, config.t_start);
    const double vmax = v0.max_norm();
    if (vmax * config.dt > config.cfl * g.spacing())
        throw ConfigError("dt", "violates the CFL bound dt <= cfl * h / max|v|");

    auto state = it.to_spectral(v0);
    std::vector<Snapshot> out;
    out.push_back(it.make_snapshot(config.t_start, state));
    double t = config.t_start;
    for (long s = 1; s <= nsteps; ++s) {
        const double t_next = s == nsteps ? config.t_end : config.t_start + static_cast<double>(s) * config.dt;
        try {
            const bool emit = s % config.output_stride == 0 || s == nsteps;
            state = it.advance(state, t_next - t);
            if (emit) out.push_back(it.make_snapshot(t_next, state));
        } catch (const StabilityError& e) {
            throw StabilityError(e.what() + at_time(t));
        } catch (const DivergenceError& e) {
            throw DivergenceError(e.what() + at_time(t));
        } catch (const DomainError& e) {
            throw DivergenceError(std::string("non-finite field: ") + e.what() + at_time(t));
        }
        t = t_next;
    }
    return SpaceTimeSlab(std::move(out));
}

VectorField taylor_green_velocity(const Grid& g, double t, double amplitude, double t0)
{
    const double k = 2.0 * std::numbers::pi / g.box_length();
    const double decay = amplitude * std::exp(-2.0 * k * k * (t - t0));
    VectorField v(g);
    const int n = g.n();
    for (int kk = 0; kk < n; ++kk)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const double x = k * g.coord(i), y = k * g.coord(j);
                const std::size_t idx = g.index(i, j, kk);
                v[0][idx] = decay * std::sin(x) * std::cos(y);
                v[1][idx] = -decay * std::cos(x) * std::sin(y);
            }
    return v;
}

ScalarField taylor_green_pressure(const Grid& g, double t, double amplitude, double t0)
{
    const double k = 2.0 * std::numbers::pi / g.box_length();
    const double decay = 0.25 * amplitude * amplitude * std::exp(-4.0 * k * k * (t - t0));
    ScalarField p(g);
    const int n = g.n();
    for (int kk = 0; kk < n; ++kk)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                p[g.index(i, j, kk)] = decay * (std::cos(2.0 * k * g.coord(i)) + std::cos(2.0 * k * g.coord(j)));
    return p;
}

VectorField initial_velocity(const Grid& g, const InitialCondition& ic, double t)
{
    using K = InitialCondition::Kind;
    switch (ic.kind) {
    case K::zero: return VectorField(g);
    case K::taylor_green: return taylor_green_velocity(g, t, ic.amplitude, t);
    case K::beltrami: {
        if (ic.wavenumber < 1 || 3 * ic.wavenumber >= g.n())
            throw ConfigError("wavenumber", "beltrami mode must satisfy 1 <= m < n/3");
        const double k = 2.0 * std::numbers::pi / g.box_length() * ic.wavenumber;
        VectorField v(g);
        const int n = g.n();
        for (int kk = 0; kk < n; ++kk)
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    const double z = k * g.coord(kk);
                    const std::size_t idx = g.index(i, j, kk);
                    v[0][idx] = ic.amplitude * std::sin(z);
                    v[1][idx] = ic.amplitude * std::cos(z);
                }
        return v;
    }
    case K::random: {
        if (ic.max_mode < 1 || 3 * ic.max_mode >= g.n())
            throw ConfigError("max_mode", "random modes must satisfy 1 <= m < n/3");
        std::mt19937_64 rng(ic.seed);
        // Portable uniform on [-1, 1): the top 53 bits of each draw.
        const auto uniform = [&] { return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0; };
        SpectralTransform fft(g);
        SpecVec s;
        for (auto& c : s) c.assign(fft.spectrum_size(), Complex{});
        for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz) {
            const int m = std::max({std::abs(mx), std::abs(my), std::abs(mz)});
            if (m < 1 || m > ic.max_mode) return;
            for (int c = 0; c < 3; ++c) {
                const double re = uniform();
                const double im = uniform();
                s[c][idx] = Complex(re, im);
            }
        });
        // The c2r round trip makes the kx = 0 plane Hermitian.
        std::array<std::vector<double>, 3> u{fft.inverse(s[0]), fft.inverse(s[1]), fft.inverse(s[2])};
        VectorField raw(ScalarField(g, std::move(u[0])), ScalarField(g, std::move(u[1])), ScalarField(g, std::move(u[2])));
        auto v = leray_project(raw);
        const double m = v.max_norm();
        if (m == 0.0) return v;
        const double scale = ic.amplitude / m;
        for (int c = 0; c < 3; ++c)
            for (auto& x : v[c].values()) x *= scale;
        return v;
    }
    }
    throw ConfigError("init", "unknown initial condition");
}

double kinetic_energy(const VectorField& v)
{
    return integrate_box(speed_power(v, 2.0));
}

double dissipation(const VectorField& v)
{
    ScalarField total(v.grid());
    for (int c = 0; c < 3; ++c) {
        const auto g = gradient(v[c]);
        for (int d = 0; d < 3; ++d) {
            const auto& gd = g[d];
            for (std::size_t i = 0; i < total.values().size(); ++i) total[i] += gd[i] * gd[i];
        }
    }
    return integrate_box(total);
}

} // namespace nsrl
