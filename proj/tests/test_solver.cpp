#include "support.hpp"

#include "nsrl/error.hpp"
#include "nsrl/field_ops.hpp"
#include "nsrl/parallel.hpp"
#include "nsrl/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace nsrl;
using namespace testing_support;

namespace {

double zero(double, double, double) { return 0.0; }

bool bit_equal(const ScalarField& a, const ScalarField& b)
{
    return std::equal(a.values().begin(), a.values().end(), b.values().begin(), b.values().end());
}

bool bit_equal(const SpaceTimeSlab& a, const SpaceTimeSlab& b)
{
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].time != b[i].time || !bit_equal(a[i].pressure, b[i].pressure)) return false;
        for (int c = 0; c < 3; ++c)
            if (!bit_equal(a[i].velocity[c], b[i].velocity[c])) return false;
    }
    return true;
}

} // namespace

TEST_CASE("leray projection")
{
    Grid g(16, 2 * pi);
    const auto shear = vector(g, [](double, double y, double) { return std::sin(y); }, zero, zero);
    CHECK(max_diff(leray_project(shear), shear) < 1e-14);

    const auto grad = vector(g, [](double x, double, double) { return std::cos(x); }, zero, zero);
    CHECK(leray_project(grad).max_norm() < 1e-14);

    const auto mixed = vector(g, [](double x, double y, double) { return std::sin(y) + std::cos(x); }, zero, zero);
    CHECK(max_diff(leray_project(mixed), shear) < 1e-14);

    const auto rough = vector(g, [](double x, double y, double z) { return std::exp(std::sin(x + z)) * y; },
                              [](double x, double y, double) { return std::cos(3 * x * y); },
                              [](double, double y, double z) { return std::sin(y) * z * z; });
    const auto once = leray_project(rough);
    CHECK(max_divergence(once) < default_div_tol);
    CHECK(max_diff(leray_project(once), once) < 1e-12);
}

TEST_CASE("pressure of the Taylor-Green vortex")
{
    Grid g(32, 2 * pi);
    const auto v = taylor_green_velocity(g, 0.0);
    const auto p = pressure_poisson(v);
    // p = (cos 2x + cos 2y) / 4, checked pointwise against the closed form.
    const auto exact = scalar(g, [](double x, double y, double) { return 0.25 * (std::cos(2 * x) + std::cos(2 * y)); });
    CHECK(max_diff(p, exact) < 1e-14);
    // Shear flow has no pressure source.
    const auto shear = vector(g, [](double, double y, double) { return std::sin(y); }, zero, zero);
    CHECK(pressure_poisson(shear).max_abs() < 1e-15);
}

TEST_CASE("rest state and single steps")
{
    Grid g(16, 2 * pi);
    const Snapshot rest(0.0, VectorField(g), ScalarField(g));
    const auto next = step(rest, 0.01);
    CHECK(next.velocity.max_norm() == 0.0);
    CHECK(next.pressure.max_abs() == 0.0);
    CHECK(next.time == doctest::Approx(0.01));

    const double dt = 0.01;
    const Snapshot tg(0.0, taylor_green_velocity(g, 0.0), pressure_poisson(taylor_green_velocity(g, 0.0)));
    const auto s = step(tg, dt);
    CHECK(max_diff(s.velocity, taylor_green_velocity(g, dt)) < 1e-13);

    InitialCondition ic{InitialCondition::Kind::beltrami, 0.7, 0, 2, 2};
    const auto b0 = initial_velocity(g, ic);
    const auto b1 = step(Snapshot(0.0, b0, ScalarField(g)), dt).velocity;
    const double decay = std::exp(-4.0 * dt);
    for (std::size_t i = 0; i < g.size(); i += 37) CHECK(b1[0][i] == doctest::Approx(decay * b0[0][i]).epsilon(1e-12));
}

TEST_CASE("CFL and divergence errors")
{
    Grid g(16, 2 * pi);
    const Snapshot tg(0.0, taylor_green_velocity(g, 0.0, 10.0), ScalarField(g));
    CHECK_THROWS_AS(step(tg, 0.1), StabilityError);

    SolverConfig c;
    c.grid = g;
    c.dt = 0.5;
    c.t_end = 1.0;
    CHECK_THROWS_AS(run(c), ConfigError);
    c.dt = 1e-3;
    c.t_end = c.t_start;
    CHECK_THROWS_AS(run(c), WindowError);
    c.t_end = 0.01;
    c.output_stride = 0;
    CHECK_THROWS_AS(run(c), ConfigError);
}

TEST_CASE("Taylor-Green run matches the closed form")
{
    SolverConfig c;
    c.grid = Grid(32, 2 * pi);
    c.dt = 1e-3;
    c.t_end = 0.1;
    c.output_stride = 10;
    const auto slab = run(c);
    CHECK(slab.size() == 11);
    const auto& last = slab[slab.size() - 1];
    CHECK(last.time == 0.1);
    CHECK(max_diff(last.velocity, taylor_green_velocity(c.grid, 0.1)) <= 1e-6);
    const auto pe = taylor_green_pressure(c.grid, 0.1);
    CHECK(max_diff(last.pressure, pe) / pe.max_abs() <= 1e-8);
    for (const auto& s : slab.snapshots()) CHECK(max_divergence(s.velocity) <= default_div_tol);
}

TEST_CASE("output count and shortened final step")
{
    SolverConfig c;
    c.grid = Grid(8, 2 * pi);
    c.dt = 0.03;
    c.t_end = 0.1;  // 4 steps, the last one 0.01 long
    c.output_stride = 3;
    CHECK(step_count(c) == 4);
    const auto slab = run(c);
    REQUIRE(slab.size() == 3);
    CHECK(slab[1].time == doctest::Approx(0.09));
    CHECK(slab[2].time == 0.1);
    CHECK(max_diff(slab[2].velocity, taylor_green_velocity(c.grid, 0.1)) < 1e-6);
}

TEST_CASE("random initial data: solenoidal, energy decays and balances")
{
    Grid g(16, 2 * pi);
    InitialCondition ic{InitialCondition::Kind::random, 0.5, 42, 1, 2};
    const auto v0 = initial_velocity(g, ic);
    CHECK(max_divergence(v0) < default_div_tol);
    CHECK(v0.max_norm() == doctest::Approx(0.5));

    double imbalance[2];
    int idx = 0;
    for (double dt : {0.02, 0.01}) {
        SolverConfig c;
        c.grid = g;
        c.dt = dt;
        c.t_end = 0.4;
        c.initial = ic;
        const auto slab = run(c);
        TimeSeries e, d;
        for (const auto& s : slab.snapshots()) {
            e.t.push_back(s.time);
            e.values.push_back(kinetic_energy(s.velocity));
            d.t.push_back(s.time);
            d.values.push_back(dissipation(s.velocity));
        }
        for (std::size_t i = 1; i < e.values.size(); ++i) CHECK(e.values[i] <= e.values[i - 1]);
        imbalance[idx++] = std::abs(e.values.back() - e.values.front() + 2.0 * trapezoid(d, 0.0, 0.4)) / e.values.front();
    }
    // Trapezoid in time dominates: second order.
    CHECK(imbalance[0] < 1e-2);
    CHECK(imbalance[1] < imbalance[0] / 3.0);
}

TEST_CASE("runs are deterministic across repeats and thread counts")
{
    SolverConfig c;
    c.grid = Grid(16, 2 * pi);
    c.dt = 0.01;
    c.t_end = 0.05;
    c.initial = InitialCondition{InitialCondition::Kind::random, 1.0, 7, 1, 3};
    set_thread_count(1);
    const auto a = run(c);
    const auto b = run(c);
    set_thread_count(4);
    const auto d = run(c);
    set_thread_count(0);
    CHECK(bit_equal(a, b));
    CHECK(bit_equal(a, d));
}

TEST_CASE("initial condition names")
{
    for (auto k : {InitialCondition::Kind::zero, InitialCondition::Kind::taylor_green, InitialCondition::Kind::beltrami,
                   InitialCondition::Kind::random})
        CHECK(parse_initial_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_initial_kind("vortex_ring"), ConfigError);
}
