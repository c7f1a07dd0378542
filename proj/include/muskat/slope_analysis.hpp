#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "muskat/grid.hpp"
#include "muskat/trajectory.hpp"

namespace muskat {

struct BetaReport {
    double sigma;
    double value;
    double z_star;
    double x_star;
    double y_star;
    // Bound on the change of the value when the window center moves off the grid.
    double center_discretization;
};

BetaReport beta_sigma(const SampledProfile& g, double sigma);
// The windowed product at one center node, for re-evaluating witnesses.
double beta_window_product(const SampledProfile& g, double sigma, int center);

struct EnvelopeReport {
    std::vector<double> distances;
    std::vector<double> envelope;
};

EnvelopeReport modulus_envelope(const SampledProfile& g, double max_r);
double continuity_radius(const SampledProfile& g, double eps);
// Radius for a vector field given by its components, increments measured in the Euclidean norm.
double continuity_radius_field(std::span<const SampledProfile> field, double eps);

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict v);

struct BoundFit {
    std::string bound;
    std::string anchor;
    double constant = 0.0;  // smallest constant making the bound hold at every frame
    double residual = 0.0;  // largest slack of the fitted bound over the frames
    std::optional<double> reference;
    std::optional<double> horizon;
    // (1 + L) / rho0 with rho0 the continuity radius of the initial gradients at 2/(d+1).
    std::optional<double> rate_scale;
    Verdict verdict = Verdict::pass;
    std::vector<double> times;
    std::vector<double> observed;
};

// Relative slack used when a fitted bound is checked against a reference constant.
inline constexpr double kBoundSlack = 0.05;

// ||f_x(t)|| <= ||f_x(0)|| + C t / sigma.
BoundFit check_lipschitz_growth(const Trajectory& traj, double sigma, std::optional<double> reference = {});
// beta(t) <= beta(0) + C t^{1/2} / sigma.
BoundFit check_beta_growth(const Trajectory& traj, double sigma, std::optional<double> reference = {});
// beta(t) <= cap at every frame.
BoundFit check_beta_cap(const Trajectory& traj, double cap);
// sup_x |delta_a f_x(t, x)| <= C0 |a| / t for a = dx .. 32 dx and t >= t_min.
BoundFit check_smoothing(const Trajectory& traj, double t_min = 0.0, std::optional<double> reference = {});
// ||(f_a - f_b)(t)|| <= ||(f_a - f_b)(0)|| e^{lambda t}.
BoundFit gronwall_fit(const Trajectory& a, const Trajectory& b, std::optional<double> reference = {});

bool refinement_stable(double coarse, double fine, double tolerance = 0.2);

}  // namespace muskat
