#include "nsrl/field_ops.hpp"

#include "nsrl/error.hpp"
#include "nsrl/parallel.hpp"
#include "nsrl/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nsrl {

namespace {

double power(double x, double p)
{
    if (p == 3.0) return x * x * x;
    if (p == 2.0) return x * x;
    if (p == 1.0) return x;
    return std::pow(x, p);
}

void check_exponent(double p)
{
    if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("lp norm: exponent must be >= 1");
}

double sum_over(std::span<const std::size_t> cells, const ScalarField& density)
{
    std::vector<double> terms(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) terms[i] = density[cells[i]];
    return pairwise_sum(terms);
}

double wavenumber(const Grid& g) { return 2.0 * std::numbers::pi / g.box_length(); }

// i * k_axis for a first derivative; zero on the Nyquist plane of that axis.
Complex derivative_factor(int m, int n, double k0)
{
    if (2 * std::abs(m) == n) return {0.0, 0.0};
    return {0.0, k0 * m};
}

int axis_mode(int axis, int mx, int my, int mz) { return axis == 0 ? mx : (axis == 1 ? my : mz); }

ScalarField differentiate(const SpectralTransform& fft, const Spectrum& spec, int axis)
{
    const Grid& g = fft.grid();
    const double k0 = wavenumber(g);
    Spectrum d(spec.size());
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz) {
        d[idx] = spec[idx] * derivative_factor(axis_mode(axis, mx, my, mz), g.n(), k0);
    });
    return ScalarField(g, fft.inverse(d));
}

} // namespace

// ---------------------------------------------------------------------------

double integrate_ball(const ScalarField& density, const Ball& ball)
{
    const auto cells = ball_cells(density.grid(), ball);
    return density.grid().cell_volume() * sum_over(cells, density);
}

double integrate_box(const ScalarField& density)
{
    return density.grid().cell_volume() * pairwise_sum(density.values());
}

double lp_norm_ball(const ScalarField& f, const Ball& ball, double p)
{
    check_exponent(p);
    const auto cells = ball_cells(f.grid(), ball);
    std::vector<double> terms(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) terms[i] = power(std::abs(f[cells[i]]), p);
    return std::pow(f.grid().cell_volume() * pairwise_sum(terms), 1.0 / p);
}

double lp_norm_ball(const VectorField& f, const Ball& ball, double p)
{
    check_exponent(p);
    const auto cells = ball_cells(f.grid(), ball);
    std::vector<double> terms(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) terms[i] = power(f.norm_at(cells[i]), p);
    return std::pow(f.grid().cell_volume() * pairwise_sum(terms), 1.0 / p);
}

double interpolate(const TimeSeries& s, double t)
{
    if (s.t.empty() || t < s.t.front() || t > s.t.back()) throw WindowError("time " + std::to_string(t) + " outside series");
    const auto it = std::upper_bound(s.t.begin(), s.t.end(), t);
    if (it == s.t.end()) return s.values.back();
    const std::size_t i = static_cast<std::size_t>(it - s.t.begin());
    if (i == 0) return s.values.front();
    const double w = (t - s.t[i - 1]) / (s.t[i] - s.t[i - 1]);
    return (1.0 - w) * s.values[i - 1] + w * s.values[i];
}

double trapezoid(const TimeSeries& s, double a, double b)
{
    if (s.t.size() != s.values.size() || s.t.size() < 2) throw WindowError("trapezoid: need at least two samples");
    if (!(a < b)) throw WindowError("trapezoid: empty time window");
    if (a < s.t.front() || b > s.t.back()) throw WindowError("trapezoid: window outside sampled range");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < s.t.size(); ++i) {
        const double lo = std::max(a, s.t[i]);
        const double hi = std::min(b, s.t[i + 1]);
        if (!(hi > lo)) continue;
        const double span = s.t[i + 1] - s.t[i];
        const auto at = [&](double t) {
            const double w = (t - s.t[i]) / span;
            return (1.0 - w) * s.values[i] + w * s.values[i + 1];
        };
        const double flo = lo == s.t[i] ? s.values[i] : at(lo);
        const double fhi = hi == s.t[i + 1] ? s.values[i + 1] : at(hi);
        total += 0.5 * (hi - lo) * (flo + fhi);
    }
    return total;
}

TimeSeries evaluate(const SpaceTimeSlab& slab, const SnapshotFunctional& functional)
{
    TimeSeries out;
    out.t.reserve(slab.size());
    out.values.reserve(slab.size());
    for (const auto& s : slab.snapshots()) {
        out.t.push_back(s.time);
        out.values.push_back(functional(s));
    }
    return out;
}

double space_time_integral(const SpaceTimeSlab& slab, const ParabolicCylinder& cyl, const Density& density)
{
    const double a = cyl.t_bottom();
    const double b = cyl.t_top;
    if (a < slab.t_start() || b > slab.t_end())
        throw WindowError("cylinder time interval [" + std::to_string(a) + ", " + std::to_string(b) + "] not inside slab");
    const auto cells = ball_cells(slab.grid(), cyl.ball);
    const double h3 = slab.grid().cell_volume();
    // Only snapshots bracketing the window are evaluated.
    TimeSeries series;
    for (std::size_t i = 0; i < slab.size(); ++i) {
        const double t = slab[i].time;
        const bool needed = (t >= a && t <= b) || (i + 1 < slab.size() && t < a && slab[i + 1].time > a) ||
                            (i > 0 && t > b && slab[i - 1].time < b);
        if (!needed) continue;
        series.t.push_back(t);
        series.values.push_back(h3 * sum_over(cells, density(slab[i])));
    }
    return trapezoid(series, a, b);
}

ScalarField speed_power(const VectorField& v, double p)
{
    ScalarField out(v.grid());
    auto vals = out.values();
    parallel_for(vals.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) vals[i] = power(v.norm_at(i), p);
    });
    return out;
}

ScalarField abs_power(const ScalarField& f, double p)
{
    ScalarField out(f.grid());
    auto vals = out.values();
    parallel_for(vals.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) vals[i] = power(std::abs(f[i]), p);
    });
    return out;
}

ScalarField ckn_density(const Snapshot& s)
{
    ScalarField out(s.grid());
    auto vals = out.values();
    parallel_for(vals.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double speed = s.velocity.norm_at(i);
            const double ap = std::abs(s.pressure[i]);
            vals[i] = speed * speed * speed + ap * std::sqrt(ap);
        }
    });
    return out;
}

// ---------------------------------------------------------------------------

ScalarField partial(const ScalarField& f, int axis)
{
    if (axis < 0 || axis > 2) throw DomainError("partial: axis must be 0, 1 or 2");
    SpectralTransform fft(f.grid());
    return differentiate(fft, fft.forward(f.values()), axis);
}

VectorField gradient(const ScalarField& f)
{
    SpectralTransform fft(f.grid());
    const auto spec = fft.forward(f.values());
    return VectorField(differentiate(fft, spec, 0), differentiate(fft, spec, 1), differentiate(fft, spec, 2));
}

ScalarField divergence(const VectorField& v)
{
    const Grid& g = v.grid();
    SpectralTransform fft(g);
    const double k0 = wavenumber(g);
    std::array<Spectrum, 3> s{fft.forward(v[0].values()), fft.forward(v[1].values()), fft.forward(v[2].values())};
    Spectrum d(fft.spectrum_size());
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz) {
        d[idx] = s[0][idx] * derivative_factor(mx, g.n(), k0) + s[1][idx] * derivative_factor(my, g.n(), k0) +
                 s[2][idx] * derivative_factor(mz, g.n(), k0);
    });
    return ScalarField(g, fft.inverse(d));
}

VectorField curl(const VectorField& v)
{
    const Grid& g = v.grid();
    SpectralTransform fft(g);
    const double k0 = wavenumber(g);
    std::array<Spectrum, 3> s{fft.forward(v[0].values()), fft.forward(v[1].values()), fft.forward(v[2].values())};
    std::array<Spectrum, 3> w;
    for (auto& c : w) c.resize(fft.spectrum_size());
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz) {
        const Complex dx = derivative_factor(mx, g.n(), k0);
        const Complex dy = derivative_factor(my, g.n(), k0);
        const Complex dz = derivative_factor(mz, g.n(), k0);
        w[0][idx] = dy * s[2][idx] - dz * s[1][idx];
        w[1][idx] = dz * s[0][idx] - dx * s[2][idx];
        w[2][idx] = dx * s[1][idx] - dy * s[0][idx];
    });
    return VectorField(ScalarField(g, fft.inverse(w[0])), ScalarField(g, fft.inverse(w[1])),
                       ScalarField(g, fft.inverse(w[2])));
}

ScalarField laplacian(const ScalarField& f)
{
    const Grid& g = f.grid();
    SpectralTransform fft(g);
    const double k0 = wavenumber(g);
    auto s = fft.forward(f.values());
    for_each_mode(g, [&](std::size_t idx, int mx, int my, int mz) {
        s[idx] *= -k0 * k0 * static_cast<double>(mx * mx + my * my + mz * mz);
    });
    return ScalarField(g, fft.inverse(s));
}

VectorField laplacian(const VectorField& v) { return VectorField(laplacian(v[0]), laplacian(v[1]), laplacian(v[2])); }

AnyField apply_operator(const AnyField& field, DiffOp op)
{
    if (const auto* s = std::get_if<ScalarField>(&field)) {
        switch (op) {
        case DiffOp::grad: return gradient(*s);
        case DiffOp::laplacian: return laplacian(*s);
        case DiffOp::div: throw DomainError("div needs a vector field");
        case DiffOp::curl: throw DomainError("curl needs a vector field");
        }
    }
    const auto& v = std::get<VectorField>(field);
    switch (op) {
    case DiffOp::div: return divergence(v);
    case DiffOp::curl: return curl(v);
    case DiffOp::laplacian: return laplacian(v);
    case DiffOp::grad: break;
    }
    throw DomainError("grad needs a scalar field");
}

double max_divergence(const VectorField& v) { return divergence(v).max_abs(); }

// ---------------------------------------------------------------------------

namespace {

struct AxisWeights {
    std::vector<int> i0;
    std::vector<double> w;
    std::vector<char> valid;
};

AxisWeights trilinear_axis(const Grid& g, std::span<const double> xs, bool zero_outside)
{
    const double half = 0.5 * g.box_length();
    const double h = g.spacing();
    AxisWeights a;
    a.i0.resize(xs.size());
    a.w.resize(xs.size());
    a.valid.assign(xs.size(), 1);
    for (std::size_t q = 0; q < xs.size(); ++q) {
        const double x = xs[q];
        if (zero_outside && (x < -half || x >= half)) {
            a.valid[q] = 0;
            continue;
        }
        const double s = (x + half) / h;
        const double fl = std::floor(s);
        a.i0[q] = g.wrap(static_cast<int>(fl));
        a.w[q] = s - fl;
    }
    return a;
}

// Per-axis factor table psi[m][q] for the half (x) or full (y, z) mode range.
std::vector<Complex> spectral_axis(const Grid& g, std::span<const double> xs, bool half_range)
{
    const int n = g.n();
    const int modes = half_range ? n / 2 + 1 : n;
    const double k0 = wavenumber(g);
    const double origin = -0.5 * g.box_length();
    std::vector<Complex> table(static_cast<std::size_t>(modes) * xs.size());
    for (int m = 0; m < modes; ++m) {
        const int mi = mode_index(m, n);
        for (std::size_t q = 0; q < xs.size(); ++q) {
            const double phase = k0 * mi * (xs[q] - origin);
            Complex v = 2 * std::abs(mi) == n ? Complex(std::cos(phase), 0.0) : std::polar(1.0, phase);
            // Half-spectrum storage: interior kx modes stand for their conjugate partner too.
            if (half_range && m != 0 && 2 * m != n) v *= 2.0;
            table[static_cast<std::size_t>(m) * xs.size() + q] = v;
        }
    }
    return table;
}

bool outside(const Grid& g, double x)
{
    const double half = 0.5 * g.box_length();
    return x < -half || x >= half;
}

} // namespace

std::vector<double> sample_lattice(const ScalarField& f, std::span<const double> xs, std::span<const double> ys,
                                   std::span<const double> zs, SampleMode mode, bool zero_outside)
{
    const Grid& g = f.grid();
    const std::size_t A = xs.size(), B = ys.size(), C = zs.size();
    std::vector<double> out(A * B * C, 0.0);
    if (out.empty()) return out;

    if (mode == SampleMode::trilinear) {
        const auto ax = trilinear_axis(g, xs, zero_outside);
        const auto ay = trilinear_axis(g, ys, zero_outside);
        const auto az = trilinear_axis(g, zs, zero_outside);
        parallel_for(C, [&](std::size_t cb, std::size_t ce) {
            for (std::size_t c = cb; c < ce; ++c) {
                if (!az.valid[c]) continue;
                const int k0 = az.i0[c], k1 = g.wrap(k0 + 1);
                const double wz = az.w[c];
                for (std::size_t b = 0; b < B; ++b) {
                    if (!ay.valid[b]) continue;
                    const int j0 = ay.i0[b], j1 = g.wrap(j0 + 1);
                    const double wy = ay.w[b];
                    for (std::size_t a = 0; a < A; ++a) {
                        if (!ax.valid[a]) continue;
                        const int i0 = ax.i0[a], i1 = g.wrap(i0 + 1);
                        const double wx = ax.w[a];
                        const double c00 = (1 - wx) * f.at(i0, j0, k0) + wx * f.at(i1, j0, k0);
                        const double c10 = (1 - wx) * f.at(i0, j1, k0) + wx * f.at(i1, j1, k0);
                        const double c01 = (1 - wx) * f.at(i0, j0, k1) + wx * f.at(i1, j0, k1);
                        const double c11 = (1 - wx) * f.at(i0, j1, k1) + wx * f.at(i1, j1, k1);
                        const double c0 = (1 - wy) * c00 + wy * c10;
                        const double c1 = (1 - wy) * c01 + wy * c11;
                        out[a + A * (b + B * c)] = (1 - wz) * c0 + wz * c1;
                    }
                }
            }
        });
        return out;
    }

    // Spectral: contract the half spectrum one axis at a time.
    const int n = g.n();
    const std::size_t nh = static_cast<std::size_t>(n / 2 + 1);
    const std::size_t nn = static_cast<std::size_t>(n);
    SpectralTransform fft(g);
    const auto spec = fft.forward(f.values());
    const auto px = spectral_axis(g, xs, true);
    const auto py = spectral_axis(g, ys, false);
    const auto pz = spectral_axis(g, zs, false);

    std::vector<Complex> g1(nn * nn * A);  // [kz][ky][a]
    parallel_for(nn * nn, [&](std::size_t rb, std::size_t re) {
        for (std::size_t row = rb; row < re; ++row) {
            const Complex* src = &spec[row * nh];
            for (std::size_t a = 0; a < A; ++a) {
                Complex acc{};
                for (std::size_t kx = 0; kx < nh; ++kx) acc += src[kx] * px[kx * A + a];
                g1[row * A + a] = acc;
            }
        }
    });
    std::vector<Complex> g2(nn * B * A);  // [kz][b][a]
    parallel_for(nn, [&](std::size_t zb, std::size_t ze) {
        for (std::size_t kz = zb; kz < ze; ++kz)
            for (std::size_t b = 0; b < B; ++b)
                for (std::size_t a = 0; a < A; ++a) {
                    Complex acc{};
                    for (std::size_t ky = 0; ky < nn; ++ky) acc += g1[(kz * nn + ky) * A + a] * py[ky * B + b];
                    g2[(kz * B + b) * A + a] = acc;
                }
    });
    const double scale = 1.0 / static_cast<double>(g.size());
    parallel_for(C, [&](std::size_t cb, std::size_t ce) {
        for (std::size_t c = cb; c < ce; ++c) {
            if (zero_outside && outside(g, zs[c])) continue;
            for (std::size_t b = 0; b < B; ++b) {
                if (zero_outside && outside(g, ys[b])) continue;
                for (std::size_t a = 0; a < A; ++a) {
                    if (zero_outside && outside(g, xs[a])) continue;
                    Complex acc{};
                    for (std::size_t kz = 0; kz < nn; ++kz) acc += g2[(kz * B + b) * A + a] * pz[kz * C + c];
                    out[a + A * (b + B * c)] = acc.real() * scale;
                }
            }
        }
    });
    return out;
}

double sample(const ScalarField& f, const Vec3& p, SampleMode mode)
{
    const double x[1]{p[0]}, y[1]{p[1]}, z[1]{p[2]};
    return sample_lattice(f, x, y, z, mode, false)[0];
}

Vec3 sample(const VectorField& f, const Vec3& p, SampleMode mode)
{
    return {sample(f[0], p, mode), sample(f[1], p, mode), sample(f[2], p, mode)};
}

} // namespace nsrl
