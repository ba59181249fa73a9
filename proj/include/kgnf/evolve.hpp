#pragma once
// RK4 method of lines for the quasilinear flow and for the linearized flow
// along a stored background.

#include "kgnf/model.hpp"
#include "kgnf/spectral.hpp"

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgnf {

/// Raised when a step produces non-finite values or loses hyperbolicity.
struct BlowUp : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when dt exceeds the CFL bound and proceeding was not allowed.
struct CflViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Largest characteristic speed g01 +- sqrt(g01^2 + g11) over the grid.
double max_wave_speed(const State& st, const ModelSpec& model);
/// cfl_safety * dx / max speed.
double cfl_limit(const State& st, const ModelSpec& model, double cfl_safety = 0.5);

State step_rk4(const State& st, const ModelSpec& model, double dt);

using Observer = std::function<std::vector<double>(const State&)>;

struct EvolveOptions {
    int sample_every = 1;          ///< steps between stored samples
    bool store_states = true;
    double cfl_safety = 0.5;
    bool proceed_on_cfl = false;   ///< warn instead of throwing
    double blowup_sup = 1e3;       ///< sup|u| beyond which the run is stopped
    std::function<bool(const State&)> stop;  ///< checked at samples; true ends the run
};

struct Trajectory {
    std::vector<State> states;     ///< sampled states (empty if not stored)
    std::vector<double> times;     ///< sample times
    std::vector<std::vector<std::vector<double>>> records;  ///< [observer][sample]
    double dt = 0.0;
    int sample_every = 1;
    ModelSpec model;
    bool blow_up = false;
    double blow_up_time = 0.0;
    bool cfl_warning = false;
    bool stopped = false;          ///< ended early by the stop predicate
    std::string message;

    double sample_dt() const { return dt * sample_every; }
};

Trajectory evolve(const State& state0, const ModelSpec& model, double T, double dt,
                  const std::vector<Observer>& observers = {}, const EvolveOptions& opt = {});

/// Linearized flow along a stored background (states sampled uniformly).
/// Coefficients are interpolated linearly in time between samples.
Trajectory evolve_linearized(const Trajectory& background, const State& v0, double dt,
                             const std::vector<Observer>& observers = {}, int sample_every = 1);

}  // namespace kgnf
