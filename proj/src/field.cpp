#include "nsrl/field.hpp"

#include "nsrl/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nsrl {

Grid::Grid(int n, double box_length) : n_(n), box_length_(box_length), spacing_(box_length / n)
{
    if (n < 4 || n % 2 != 0) throw DomainError("grid: n must be even and >= 4, got " + std::to_string(n));
    if (!(box_length > 0.0) || !std::isfinite(box_length)) throw DomainError("grid: box length must be positive");
}

Vec3 Grid::displacement(const Vec3& a, const Vec3& b) const noexcept
{
    Vec3 d{};
    for (int c = 0; c < 3; ++c) {
        double x = b[c] - a[c];
        x -= box_length_ * std::round(x / box_length_);
        d[c] = x;
    }
    return d;
}

ScalarField::ScalarField(const Grid& grid) : grid_(grid), values_(grid.size(), 0.0) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size()) throw DomainError("scalar field: value count does not match grid");
    for (double v : values_)
        if (!std::isfinite(v)) throw DomainError("scalar field: non-finite value");
}

double ScalarField::max_abs() const noexcept
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

VectorField::VectorField(const Grid& grid) : components_{ScalarField(grid), ScalarField(grid), ScalarField(grid)} {}

VectorField::VectorField(ScalarField x, ScalarField y, ScalarField z)
    : components_{std::move(x), std::move(y), std::move(z)}
{
    if (!(components_[0].grid() == components_[1].grid()) || !(components_[0].grid() == components_[2].grid()))
        throw DomainError("vector field: components on different grids");
}

double VectorField::norm_at(std::size_t i) const noexcept
{
    const double a = components_[0][i], b = components_[1][i], c = components_[2][i];
    return std::sqrt(a * a + b * b + c * c);
}

double VectorField::max_norm() const noexcept
{
    double m = 0.0;
    const std::size_t n = grid().size();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, norm_at(i));
    return m;
}

Snapshot::Snapshot(double t, VectorField v, ScalarField p) : time(t), velocity(std::move(v)), pressure(std::move(p))
{
    if (!std::isfinite(time)) throw DomainError("snapshot: non-finite time");
    if (!(velocity.grid() == pressure.grid())) throw DomainError("snapshot: velocity and pressure on different grids");
}

SpaceTimeSlab::SpaceTimeSlab(std::vector<Snapshot> snapshots) : snapshots_(std::move(snapshots))
{
    if (snapshots_.size() < 2) throw WindowError("slab: needs at least two snapshots");
    for (std::size_t i = 1; i < snapshots_.size(); ++i) {
        if (!(snapshots_[i].grid() == snapshots_[0].grid())) throw DomainError("slab: snapshots on different grids");
        if (!(snapshots_[i].time > snapshots_[i - 1].time)) throw WindowError("slab: times must be strictly increasing");
    }
}

std::vector<double> SpaceTimeSlab::times() const
{
    std::vector<double> t;
    t.reserve(snapshots_.size());
    for (const auto& s : snapshots_) t.push_back(s.time);
    return t;
}

void require_fits(const Grid& grid, const Ball& ball)
{
    if (!(ball.radius > 0.0)) throw GeometryError("ball radius must be positive");
    if (!(2.0 * ball.radius < grid.box_length()))
        throw GeometryError("ball of radius " + std::to_string(ball.radius) + " does not fit the box of length " +
                            std::to_string(grid.box_length()));
}

std::vector<std::size_t> ball_cells(const Grid& grid, const Ball& ball)
{
    require_fits(grid, ball);
    const double h = grid.spacing();
    const double r2 = ball.radius * ball.radius;
    const double half = 0.5 * grid.box_length();
    // Index range covering [c - r, c + r] in unwrapped node coordinates.
    std::array<int, 3> lo{}, hi{};
    for (int c = 0; c < 3; ++c) {
        lo[c] = static_cast<int>(std::floor((ball.center[c] - ball.radius + half) / h)) - 1;
        hi[c] = static_cast<int>(std::ceil((ball.center[c] + ball.radius + half) / h)) + 1;
    }
    const int n = grid.n();
    std::vector<std::size_t> cells;
    std::vector<char> seen(grid.size(), 0);
    for (int k = lo[2]; k <= hi[2]; ++k) {
        for (int j = lo[1]; j <= hi[1]; ++j) {
            for (int i = lo[0]; i <= hi[0]; ++i) {
                const Vec3 x{-half + i * h, -half + j * h, -half + k * h};
                const double dx = x[0] - ball.center[0], dy = x[1] - ball.center[1], dz = x[2] - ball.center[2];
                if (dx * dx + dy * dy + dz * dz > r2) continue;
                const std::size_t idx = grid.index(((i % n) + n) % n, ((j % n) + n) % n, ((k % n) + n) % n);
                if (seen[idx]) continue;
                seen[idx] = 1;
                cells.push_back(idx);
            }
        }
    }
    return cells;
}

} // namespace nsrl
