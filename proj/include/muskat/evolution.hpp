#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>

#include "muskat/errors.hpp"
#include "muskat/slope_analysis.hpp"
#include "muskat/trajectory.hpp"

namespace muskat {

struct StepControl {
    double cfl = 0.25;
    double dt_min = 1e-7;
    double dt_max = 1e-2;
    // Reject and halve when ||f_x|| grows by more than this fraction in one step.
    double jump_tolerance = 0.10;
};

// Thrown when a trajectory cannot be continued; carries every frame recorded so far,
// the last one being the last valid state.
class EvolutionError : public Error {
public:
    EvolutionError(const std::string& what, Trajectory frames) : Error(what), frames_(std::move(frames)) {}
    const Trajectory& frames() const { return frames_; }

private:
    Trajectory frames_;
};

class StiffnessError : public EvolutionError {
public:
    using EvolutionError::EvolutionError;
};

class NonFiniteError : public EvolutionError {
public:
    using EvolutionError::EvolutionError;
};

// Step size before any rejection.
double nominal_dt(const GridSpec& grid, const StepControl& ctl);

// One Heun step; dt starts at min(nominal, dt_cap) and is halved on rejection.
TrajectoryFrame step(const TrajectoryFrame& frame, const StepControl& ctl, const DiagnosticsConfig& cfg,
                     double dt_cap = std::numeric_limits<double>::infinity());

// Frames from t = 0 to t = T, every record_every accepted steps plus the last.
Trajectory simulate(const SampledProfile& f0, double T, const StepControl& ctl, int record_every,
                    const DiagnosticsConfig& cfg);

// Simulates both data and fits ||(f_a - f_b)(t)|| <= ||(f_a - f_b)(0)|| e^{lambda t}.
// Identical data give lambda = 0 with a zero distance throughout.
BoundFit check_gronwall(const SampledProfile& f0_a, const SampledProfile& f0_b, double T, const StepControl& ctl,
                        int record_every, const DiagnosticsConfig& cfg, std::optional<double> reference = {});

// frame_%06d.csv shards plus trajectory.json.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj);

}  // namespace muskat
