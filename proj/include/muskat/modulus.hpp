#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "muskat/grid.hpp"
#include "muskat/slope_analysis.hpp"

namespace muskat {

// Two-regime concave modulus: z - (4/3) z^{3/2} up to delta, then
// omega' = gamma / (z (ln(z/delta) + 10)).
class Omega {
public:
    Omega(double delta, double gamma, bool concavity_check = true);

    double value(double z) const;
    double slope(double z) const;
    double curvature(double z) const;
    // Smallest z with value(z) = w; +inf when it exceeds the double range.
    double inverse(double w) const;
    // ln ln(inverse(w) / delta) for w above value(delta), finite even when inverse overflows.
    double log_log_inverse(double w) const;

    double delta() const { return delta_; }
    double gamma() const { return gamma_; }

    // The closed form of the small regime, valid for any z in [0, 1/4].
    static double small_regime(double z) { return z - 4.0 / 3.0 * z * std::sqrt(z); }
    // Largest gamma keeping omega'(delta+) <= omega'(delta-).
    static double splice_limit(double delta) { return 10.0 * delta * (1.0 - 2.0 * std::sqrt(delta)); }

private:
    double delta_;
    double gamma_;
    double value_at_delta_;
};

struct ModulusSpec {
    Omega omega;
    double c0;           // rescaling constant, +inf when unrepresentable
    double c0_floor;     // lower bound the inequality checks fall back to when c0 is +inf
    double c_tilde;      // exponential envelope rate 10 (1 + L) / sigma
    double lipschitz;
    double eps0;
    double sigma;
    double lambda = 1.0;

    // C0 used inside the inequalities; a smaller C0 makes them harder, so the floor is conservative.
    double c0_checked() const { return std::isfinite(c0) ? c0 : c0_floor; }
};

ModulusSpec make_modulus_spec(const Omega& omega, double lipschitz, double eps0, double sigma, double c0_floor);

// lambda omega(C0 x / t), times e^{C~ t} when the envelope is on.
double rho_from_omega(const ModulusSpec& spec, double x, double t, bool envelope = false);

struct RegimeCheck {
    Verdict verdict = Verdict::pass;
    double margin = 0.0;  // min over the grid of -LHS / |dominant negative term|
    double worst_z = 0.0;
    double worst_lhs = 0.0;
    int points = 0;
    double z_lo = 0.0;
    double z_hi = 0.0;
    // Quadrature values that exceeded the proof's closed bounds (should stay 0).
    int bound_violations = 0;
};

// Small regime on points log-spaced over [delta 10^-decades, delta].
RegimeCheck check_small_regime(const ModulusSpec& spec, int points = 200, double decades = 12.0);
// Large regime on points log-spaced over (delta, delta 10^decades].
RegimeCheck check_large_regime(const ModulusSpec& spec, int points = 200, double decades = 6.0);

// Margin the search demands in both regimes.
inline constexpr double kCertificateMargin = 0.10;

// First (delta, gamma) in a fixed descending order passing both regimes with kCertificateMargin.
ModulusSpec find_valid_parameters(double lipschitz, double eps0, double c0_floor = 1.0, double sigma = 0.5);

struct ScaledCheck {
    double lambda;
    RegimeCheck small;
    RegimeCheck large;
    Verdict verdict() const;
};

ScaledCheck scaled_family_check(const ModulusSpec& spec, double lambda, int points = 200);

// Both sides of the dissipation bound at a saturated pair of nodes of a slope profile.
struct DissipationSides {
    double lhs;
    double rhs;
    double residual() const { return rhs - lhs; }
};

using Modulus = std::function<double(double)>;

DissipationSides dissipation_sides(const SampledProfile& fx, int x, int y, const Modulus& rho_t);
// RHS - LHS of the dissipation bound with rho_t(r) = rho_from_omega(spec, r, t).
double dissipation_bound_check(const SampledProfile& fx, int x, int y, const ModulusSpec& spec, double t);

nlohmann::json certificate_json(const ModulusSpec& spec, const RegimeCheck& small, const RegimeCheck& large,
                                const std::vector<ScaledCheck>& lambda_grid);

}  // namespace muskat
