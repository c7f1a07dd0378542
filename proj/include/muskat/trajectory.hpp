#pragma once

#include <optional>
#include <vector>

#include "muskat/grid.hpp"
#include "muskat/kernels.hpp"

namespace muskat {

struct FrameDiagnostics {
    double f_sup = 0.0;
    double fx_sup = 0.0;   // sup of |grad f|
    double fxx_sup = 0.0;  // sup over the second-derivative components
    std::optional<double> beta;  // one-dimensional profiles only
    double rhs_sup = 0.0;

    bool finite() const;
};

struct TrajectoryFrame {
    double t;
    SampledProfile f;
    SampledProfile fx;   // derivative along the first axis
    SampledProfile rhs;  // time derivative of f at this frame
    FrameDiagnostics diagnostics;
};

// Settings that the diagnostics are recomputed with.
struct DiagnosticsConfig {
    double sigma = 0.5;
    QuadratureConfig quad{};
};

TrajectoryFrame make_frame(double t, SampledProfile f, const DiagnosticsConfig& cfg);

using Trajectory = std::vector<TrajectoryFrame>;

}  // namespace muskat
