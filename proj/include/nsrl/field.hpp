#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace nsrl {

using Vec3 = std::array<double, 3>;

// Uniform periodic lattice on [-L/2, L/2)^3. Node i sits at -L/2 + i*h and is the
// centre of its quadrature cell.
class Grid {
public:
    Grid(int n, double box_length);

    int n() const noexcept { return n_; }
    double box_length() const noexcept { return box_length_; }
    double spacing() const noexcept { return spacing_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_ * n_; }
    double cell_volume() const noexcept { return spacing_ * spacing_ * spacing_; }

    double coord(int i) const noexcept { return -0.5 * box_length_ + i * spacing_; }
    Vec3 position(int i, int j, int k) const noexcept { return {coord(i), coord(j), coord(k)}; }

    // x-fastest linear index.
    std::size_t index(int i, int j, int k) const noexcept
    {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(n_) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(n_) * k);
    }
    int wrap(int i) const noexcept { return ((i % n_) + n_) % n_; }

    // Minimum-image displacement b - a on the periodic box.
    Vec3 displacement(const Vec3& a, const Vec3& b) const noexcept;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    int n_;
    double box_length_;
    double spacing_;
};

class ScalarField {
public:
    explicit ScalarField(const Grid& grid);
    // Throws DomainError on wrong size or non-finite entries.
    ScalarField(const Grid& grid, std::vector<double> values);

    const Grid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double at(int i, int j, int k) const noexcept { return values_[grid_.index(i, j, k)]; }

    double max_abs() const noexcept;

private:
    Grid grid_;
    std::vector<double> values_;
};

class VectorField {
public:
    explicit VectorField(const Grid& grid);
    // Throws DomainError when the components live on different grids.
    VectorField(ScalarField x, ScalarField y, ScalarField z);

    const Grid& grid() const noexcept { return components_[0].grid(); }
    const ScalarField& operator[](int c) const noexcept { return components_[c]; }
    ScalarField& operator[](int c) noexcept { return components_[c]; }

    double norm_at(std::size_t i) const noexcept;
    double max_norm() const noexcept;

private:
    std::array<ScalarField, 3> components_;
};

struct Snapshot {
    Snapshot(double time, VectorField velocity, ScalarField pressure);

    double time;
    VectorField velocity;
    ScalarField pressure;

    const Grid& grid() const noexcept { return velocity.grid(); }
};

// Time-ordered snapshot sequence on a common grid. At least two snapshots.
class SpaceTimeSlab {
public:
    explicit SpaceTimeSlab(std::vector<Snapshot> snapshots);

    const Grid& grid() const noexcept { return snapshots_.front().grid(); }
    std::span<const Snapshot> snapshots() const noexcept { return snapshots_; }
    const Snapshot& operator[](std::size_t i) const noexcept { return snapshots_[i]; }
    std::size_t size() const noexcept { return snapshots_.size(); }
    double t_start() const noexcept { return snapshots_.front().time; }
    double t_end() const noexcept { return snapshots_.back().time; }
    std::vector<double> times() const;

private:
    std::vector<Snapshot> snapshots_;
};

struct Ball {
    Vec3 center{0.0, 0.0, 0.0};
    double radius = 1.0;
};

// Q(z0, r) = B(x0, r) x ]t0 - r^2, t0[.
struct ParabolicCylinder {
    Ball ball;
    double t_top = 0.0;

    double radius() const noexcept { return ball.radius; }
    double t_bottom() const noexcept { return t_top - ball.radius * ball.radius; }
};

// Throws GeometryError unless 2r < L and r > 0.
void require_fits(const Grid& grid, const Ball& ball);

// Linear indices of the cells whose centres lie in the (periodic) ball, in a fixed order.
std::vector<std::size_t> ball_cells(const Grid& grid, const Ball& ball);

} // namespace nsrl
