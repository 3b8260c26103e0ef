#include "nsrl/pressure_split.hpp"

#include "nsrl/error.hpp"
#include "nsrl/field_ops.hpp"
#include "nsrl/parallel.hpp"
#include "nsrl/solver.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nsrl {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> t(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) t[i] = a[i] * b[i];
    return pairwise_sum(t);
}

// -lap_h restricted to the ball's cells with zero Dirichlet data outside.
class DirichletLaplacian {
public:
    DirichletLaplacian(const Grid& g, const std::vector<std::size_t>& cells) : cells_(cells), neighbours_(cells.size())
    {
        std::vector<long> slot(g.size(), -1);
        for (std::size_t q = 0; q < cells.size(); ++q) slot[cells[q]] = static_cast<long>(q);
        const int n = g.n();
        for (std::size_t q = 0; q < cells.size(); ++q) {
            const auto c = cells[q];
            const int i = static_cast<int>(c % n), j = static_cast<int>((c / n) % n), k = static_cast<int>(c / (static_cast<std::size_t>(n) * n));
            const std::size_t nb[6] = {g.index(g.wrap(i - 1), j, k), g.index(g.wrap(i + 1), j, k),
                                       g.index(i, g.wrap(j - 1), k), g.index(i, g.wrap(j + 1), k),
                                       g.index(i, j, g.wrap(k - 1)), g.index(i, j, g.wrap(k + 1))};
            for (int d = 0; d < 6; ++d) neighbours_[q][d] = slot[nb[d]];
        }
        inv_h2_ = 1.0 / (g.spacing() * g.spacing());
    }

    void apply(const std::vector<double>& x, std::vector<double>& y) const
    {
        parallel_for(x.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t q = b; q < e; ++q) {
                double s = 6.0 * x[q];
                for (long nb : neighbours_[q])
                    if (nb >= 0) s -= x[static_cast<std::size_t>(nb)];
                y[q] = s * inv_h2_;
            }
        });
    }

private:
    const std::vector<std::size_t>& cells_;
    std::vector<std::array<long, 6>> neighbours_;
    double inv_h2_ = 0.0;
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double relative_residual = 0.0;
};

CgResult conjugate_gradient(const DirichletLaplacian& A, const std::vector<double>& b, double tol, int cap)
{
    CgResult out;
    out.x.assign(b.size(), 0.0);
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) return out;
    std::vector<double> r = b, p = b, ap(b.size());
    double rr = dot(r, r);
    for (int it = 1; it <= cap; ++it) {
        A.apply(p, ap);
        const double alpha = rr / dot(p, ap);
        for (std::size_t i = 0; i < r.size(); ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        const double rr_new = dot(r, r);
        out.iterations = it;
        out.relative_residual = std::sqrt(rr_new) / bnorm;
        if (out.relative_residual <= tol) return out;
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = r[i] + beta * p[i];
    }
    std::ostringstream msg;
    msg << "CG did not converge in " << cap << " iterations (relative residual " << out.relative_residual << ")";
    throw SolverError(msg.str());
}

double ratio_or_zero(double num, double den) { return den > 0.0 ? num / den : 0.0; }

PressureSplit split_periodic(const Snapshot& s)
{
    const Grid& g = s.grid();
    auto p1 = pressure_poisson(s.velocity, false);
    ScalarField p2(g);
    for (std::size_t i = 0; i < g.size(); ++i) p2[i] = s.pressure[i] - p1[i];
    const double residual = laplacian(p2).max_abs();
    const double cz = ratio_or_zero(integrate_box(abs_power(p1, 1.5)), integrate_box(speed_power(s.velocity, 3.0)));
    const double p2max = p2.max_abs();
    return PressureSplit{std::move(p1), std::move(p2), PeriodicDomain{}, cz, residual, p2max, 0, 0.0};
}

PressureSplit split_ball(const Snapshot& s, const Ball& ball, const SplitOptions& opt)
{
    const Grid& g = s.grid();
    require_fits(g, ball);
    if (ball.radius < 4.0 * g.spacing())
        throw ResolutionError("split ball radius " + std::to_string(ball.radius) + " is under four grid cells");
    const auto cells = ball_cells(g, ball);
    const auto source = pressure_source(s.velocity);

    // lap p1 = source  <=>  (-lap_h) p1 = -source
    std::vector<double> b(cells.size());
    for (std::size_t q = 0; q < cells.size(); ++q) b[q] = -source[cells[q]];
    DirichletLaplacian A(g, cells);
    const int cap = opt.max_iterations > 0 ? opt.max_iterations : 10 * g.n();
    const auto cg = conjugate_gradient(A, b, opt.cg_tol, cap);

    ScalarField p1(g), p2(g);
    for (std::size_t q = 0; q < cells.size(); ++q) {
        p1[cells[q]] = cg.x[q];
        p2[cells[q]] = s.pressure[cells[q]] - cg.x[q];
    }

    // lap p2 = lap p - lap_h p1: the first term spectrally, the second with the stencil
    // that defines p1, evaluated away from the boundary layer.
    const auto lap_p = laplacian(s.pressure);
    std::vector<double> ap(cells.size());
    A.apply(cg.x, ap);
    const double inner = ball.radius - 2.0 * g.spacing();
    double residual = 0.0;
    for (std::size_t q = 0; q < cells.size(); ++q) {
        const auto c = cells[q];
        const int n = g.n();
        const Vec3 x = g.position(static_cast<int>(c % n), static_cast<int>((c / n) % n), static_cast<int>(c / (static_cast<std::size_t>(n) * n)));
        const auto d = g.displacement(ball.center, x);
        if (std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) > inner) continue;
        residual = std::max(residual, std::abs(lap_p[c] + ap[q]));
    }

    const double cz = ratio_or_zero(integrate_ball(abs_power(p1, 1.5), ball), integrate_ball(speed_power(s.velocity, 3.0), ball));
    const double p2max = p2.max_abs();
    return PressureSplit{std::move(p1), std::move(p2), ball, cz, residual, p2max, cg.iterations, cg.relative_residual};
}

} // namespace

PressureSplit split_pressure(const Snapshot& snapshot, const SplitDomain& domain, const SplitOptions& options)
{
    if (const auto* ball = std::get_if<Ball>(&domain)) return split_ball(snapshot, *ball, options);
    return split_periodic(snapshot);
}

double harmonic_interior_ratio(const ScalarField& p2, const Ball& outer, const Ball& inner, double eps_den)
{
    const Grid& g = p2.grid();
    require_fits(g, outer);
    const auto off = g.displacement(outer.center, inner.center);
    const double offset = std::sqrt(off[0] * off[0] + off[1] * off[1] + off[2] * off[2]);
    if (!(inner.radius > 0.0) || !(offset + inner.radius < outer.radius))
        throw GeometryError("inner ball must lie strictly inside the outer ball");

    const double den = integrate_ball(abs_power(p2, 1.5), outer);
    if (!(den >= eps_den)) throw DegenerateFieldError("integral of |p2|^{3/2} over the outer ball vanishes");

    double sup = 0.0;
    for (auto c : ball_cells(g, inner)) sup = std::max(sup, std::abs(p2[c]));
    // Golden-spiral points plus the six axis points on the inner sphere.
    constexpr int count = 2000;
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> dirs{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (int i = 0; i < count; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / count;
        const double rho = std::sqrt(1.0 - z * z);
        dirs.push_back({rho * std::cos(golden * i), rho * std::sin(golden * i), z});
    }
    for (const auto& d : dirs) {
        const Vec3 x{inner.center[0] + inner.radius * d[0], inner.center[1] + inner.radius * d[1],
                     inner.center[2] + inner.radius * d[2]};
        sup = std::max(sup, std::abs(sample(p2, x, SampleMode::trilinear)));
    }
    return sup * std::sqrt(sup) / den;
}

} // namespace nsrl
