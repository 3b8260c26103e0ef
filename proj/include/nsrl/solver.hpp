#pragma once

#include "nsrl/field.hpp"

#include <cstdint>
#include <string>

namespace nsrl {

struct InitialCondition {
    enum class Kind { zero, taylor_green, beltrami, random };

    Kind kind = Kind::taylor_green;
    double amplitude = 1.0;
    std::uint64_t seed = 0;
    int wavenumber = 1;  // beltrami: integer mode along x3
    int max_mode = 2;    // random: modes with 1 <= |m|_inf <= max_mode
};

InitialCondition::Kind parse_initial_kind(const std::string& name);
std::string to_string(InitialCondition::Kind kind);

struct SolverConfig {
    Grid grid{32, 6.283185307179586};
    double dt = 1e-3;
    double t_start = 0.0;
    double t_end = 0.1;
    int output_stride = 1;
    InitialCondition initial;
    bool dealias = true;
    double cfl = 0.5;
    double viscosity = 1.0;
};

// Mode-wise removal of the gradient part. Nyquist planes are dropped along with the
// first-derivative convention of the operators.
VectorField leray_project(const VectorField& v);

// Zero-mean periodic solution of lap p = -d_i d_j (v_i v_j).
ScalarField pressure_poisson(const VectorField& v, bool dealias = true);

// -d_i d_j (v_i v_j), spectrally and without dealiasing.
ScalarField pressure_source(const VectorField& v);

struct StepOptions {
    bool dealias = true;
    double viscosity = 1.0;
};

// One integrating-factor RK4 step. Throws StabilityError when max|v| dt / h > 1 and
// DivergenceError on non-finite output.
Snapshot step(const Snapshot& state, double dt, const StepOptions& options = {});

// Integrates from t_start to t_end, emitting every output_stride-th state and the final one.
SpaceTimeSlab run(const SolverConfig& config);

// Number of steps run() takes; the last one is shortened to land on t_end.
long step_count(const SolverConfig& config);

VectorField initial_velocity(const Grid& grid, const InitialCondition& ic, double t = 0.0);

// Closed-form Taylor-Green vortex with wavenumber 2 pi / L, unit viscosity,
// amplitude given at t = t0.
VectorField taylor_green_velocity(const Grid& grid, double t, double amplitude = 1.0, double t0 = 0.0);
ScalarField taylor_green_pressure(const Grid& grid, double t, double amplitude = 1.0, double t0 = 0.0);

// int |v|^2 dx and int |grad v|^2 dx over the box.
double kinetic_energy(const VectorField& v);
double dissipation(const VectorField& v);

} // namespace nsrl
