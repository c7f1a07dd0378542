#include "muskat/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "gauss.hpp"
#include "muskat/errors.hpp"

namespace muskat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Quadrature {
    double value = 0.0;
    bool converged = true;
};

template <class F>
double simpson_step(F& f, double a, double fa, double b, double fb, double m, double fm, double whole, double tol,
                    int depth, bool& ok)
{
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0 || !std::isfinite(delta)) {
        ok = false;
        return left + right;
    }
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1, ok) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1, ok);
}

// Adaptive Simpson on [a, b] split into unit panels first so smooth decaying integrands converge quickly.
template <class F>
Quadrature adaptive_simpson(F&& f, double a, double b, double rel_tol = 1e-11, int panels = 16)
{
    Quadrature q;
    const double h = (b - a) / panels;
    double coarse = 0.0;
    std::vector<double> fs(2 * panels + 1);
    for (int k = 0; k <= 2 * panels; ++k) fs[k] = f(a + 0.5 * h * k);
    for (int k = 0; k < panels; ++k) coarse += h / 6.0 * (fs[2 * k] + 4.0 * fs[2 * k + 1] + fs[2 * k + 2]);
    const double tol = rel_tol * std::max(std::fabs(coarse), 1e-300);
    for (int k = 0; k < panels; ++k) {
        const double pa = a + h * k, pb = pa + h, pm = pa + 0.5 * h;
        const double whole = h / 6.0 * (fs[2 * k] + 4.0 * fs[2 * k + 1] + fs[2 * k + 2]);
        q.value += simpson_step(f, pa, fs[2 * k], pb, fs[2 * k + 2], pm, fs[2 * k + 1], whole, tol / panels, 40,
                                q.converged);
    }
    return q;
}

template <class F>
double gauss_panels(F&& f, double a, double b, int panels)
{
    const double h = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (std::size_t k = 0; k < detail::kGaussX.size(); ++k)
            s += detail::kGaussW[k] * f(mid + 0.5 * h * detail::kGaussX[k]);
    }
    return 0.5 * h * s;
}

constexpr double kTailSpan = 60.0;

}  // namespace

Omega::Omega(double delta, double gamma, bool concavity_check) : delta_(delta), gamma_(gamma)
{
    if (!(delta > 0.0 && delta <= 1.0 / 16.0)) throw ConfigError(fmt::format("delta = {} must lie in (0, 1/16]", delta));
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
    if (concavity_check && gamma > splice_limit(delta))
        throw NonConcaveModulusError(fmt::format("gamma = {} exceeds the splice limit 10 delta (1 - 2 sqrt(delta)) = {}",
                                                 gamma, splice_limit(delta)));
    value_at_delta_ = small_regime(delta);
}

double Omega::value(double z) const
{
    if (z < 0.0) throw OutOfDomainError("omega is defined on [0, inf)");
    if (z <= delta_) return small_regime(z);
    return value_at_delta_ + gamma_ * std::log1p(std::log(z / delta_) / 10.0);
}

double Omega::slope(double z) const
{
    if (z < 0.0) throw OutOfDomainError("omega is defined on [0, inf)");
    if (z < delta_) return 1.0 - 2.0 * std::sqrt(z);
    return gamma_ / (z * (std::log(z / delta_) + 10.0));
}

double Omega::curvature(double z) const
{
    if (z < 0.0) throw OutOfDomainError("omega is defined on [0, inf)");
    if (z == 0.0) return -kInf;
    if (z < delta_) return -1.0 / std::sqrt(z);
    const double l = std::log(z / delta_) + 10.0;
    return -gamma_ * (l + 1.0) / (z * z * l * l);
}

double Omega::inverse(double w) const
{
    if (w < 0.0) throw OutOfDomainError("omega inverse needs w >= 0");
    if (w <= value_at_delta_) {
        double lo = 0.0, hi = delta_;
        for (int k = 0; k < 200 && hi - lo > 1e-300; ++k) {
            const double mid = 0.5 * (lo + hi);
            (small_regime(mid) < w ? lo : hi) = mid;
        }
        return hi;
    }
    const double log_ratio = 10.0 * std::expm1((w - value_at_delta_) / gamma_);
    return delta_ * std::exp(log_ratio);
}

double Omega::log_log_inverse(double w) const
{
    const double x = (w - value_at_delta_) / gamma_;
    if (!(x > 0.0)) throw OutOfDomainError("log_log_inverse needs w above omega(delta)");
    return std::log(10.0) + (x > 30.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x)));
}

ModulusSpec make_modulus_spec(const Omega& omega, double lipschitz, double eps0, double sigma, double c0_floor)
{
    if (!(lipschitz >= 0.0) || !std::isfinite(lipschitz)) throw ConfigError("lipschitz budget must be >= 0");
    if (!(eps0 >= 0.0 && eps0 <= 1.0)) throw ConfigError("eps0 must lie in [0, 1]");
    if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
    if (!(c0_floor > 0.0) || !std::isfinite(c0_floor)) throw ConfigError("c0_floor must be positive and finite");
    double c0 = c0_floor;
    if (lipschitz > 0.0) c0 = std::max(c0_floor, omega.inverse(2.0 * lipschitz) / (2.0 * lipschitz));
    return ModulusSpec{omega, c0, c0_floor, 10.0 * (1.0 + lipschitz) / sigma, lipschitz, eps0, sigma, 1.0};
}

double rho_from_omega(const ModulusSpec& spec, double x, double t, bool envelope)
{
    if (!(t > 0.0)) throw PreconditionError("rho_t needs t > 0");
    if (!std::isfinite(spec.c0)) throw ConfigError("rho needs a finite C0; the omega inverse is not representable");
    const double base = spec.lambda * spec.omega.value(spec.c0 * std::fabs(x) / t);
    return envelope ? base * std::exp(spec.c_tilde * t) : base;
}

namespace {

double ellipticity(const ModulusSpec& s)
{
    const double l2 = 1.0 + s.lipschitz * s.lipschitz;
    return s.eps0 / (4.0 * l2 * l2);
}

double relative_margin(double lhs, double negative)
{
    if (negative == 0.0) return lhs < 0.0 ? kInf : -kInf;
    return -lhs / std::fabs(negative);
}

void record(RegimeCheck& c, double z, double lhs, double margin, bool converged, bool& any_unconverged)
{
    if (margin < c.margin || c.points == 0) {
        c.margin = margin;
        c.worst_z = z;
        c.worst_lhs = lhs;
    }
    if (!(lhs < 0.0)) c.verdict = Verdict::fail;
    if (!converged) any_unconverged = true;
    ++c.points;
}

void finish(RegimeCheck& c, bool any_unconverged)
{
    if (c.verdict == Verdict::pass && any_unconverged) c.verdict = Verdict::inconclusive;
}

void require_points(int points)
{
    if (points < 200) throw ConfigError(fmt::format("regime checks need >= 200 grid points, got {}", points));
}

}  // namespace

RegimeCheck check_small_regime(const ModulusSpec& spec, int points, double decades)
{
    require_points(points);
    const Omega& w = spec.omega;
    const double delta = w.delta(), gamma = w.gamma(), lam = spec.lambda;
    const double a = 1.0 + spec.lipschitz;
    const double inv_c0 = 1.0 / spec.c0_checked();

    // int_delta^inf omega'(eta)/eta d eta = (gamma/delta) int_0^inf e^-u / (u + 10) du.
    const Quadrature tail = adaptive_simpson([](double u) { return std::exp(-u) / (u + 10.0); }, 0.0, kTailSpan);
    const double tail_integral = gamma / delta * (tail.value + std::exp(-kTailSpan) / (kTailSpan + 10.0));

    RegimeCheck c;
    c.z_lo = delta * std::pow(10.0, -decades);
    c.z_hi = delta;
    if (tail_integral > gamma / delta) ++c.bound_violations;
    bool unconverged = !tail.converged;
    for (int k = 0; k < points; ++k) {
        const double z = delta * std::pow(10.0, -decades * (1.0 - static_cast<double>(k) / (points - 1)));
        const double negative = ellipticity(spec) * z * lam * (-1.0 / std::sqrt(z));
        const double positive = 10.0 * a * z * (3.0 + inv_c0 + std::log(delta / z) + lam * tail_integral);
        const double lhs = positive + negative;
        record(c, z, lhs, relative_margin(lhs, negative), true, unconverged);
    }
    finish(c, unconverged);
    return c;
}

RegimeCheck check_large_regime(const ModulusSpec& spec, int points, double decades)
{
    require_points(points);
    const Omega& w = spec.omega;
    const double delta = w.delta(), gamma = w.gamma(), lam = spec.lambda;
    const double a = 1.0 + spec.lipschitz;
    const double inv_c0 = 1.0 / spec.c0_checked();

    RegimeCheck c;
    c.z_lo = delta * (1.0 + 1e-9);
    c.z_hi = delta * std::pow(10.0, decades);
    bool unconverged = false;
    for (int k = 0; k < points; ++k) {
        const double z = k == 0 ? c.z_lo : delta * std::pow(10.0, decades * static_cast<double>(k) / (points - 1));
        const double u0 = std::log(z / delta);
        // int_z^inf omega'(eta)/eta d eta = (gamma/z) int_0^inf e^-v / (v + u0 + 10) dv.
        const Quadrature qi =
            adaptive_simpson([&](double v) { return std::exp(-v) / (v + u0 + 10.0); }, 0.0, kTailSpan);
        const double tail_self = gamma / z * qi.value;
        // int_z^inf omega'(alpha + z)/alpha d alpha with alpha = z e^v.
        const Quadrature qj = adaptive_simpson([&](double v) { return w.slope(z * (1.0 + std::exp(v))); }, 0.0,
                                               kTailSpan);
        const double shifted = qj.value;
        if (tail_self > gamma / z || shifted > gamma / z) ++c.bound_violations;

        const double om = lam * w.value(z);
        const double dom = lam * w.slope(z);
        const double t1 = 4.0 * a * dom * (delta + om * (u0 + 2.0) + z * (inv_c0 + lam * tail_self));
        const double negative = -ellipticity(spec) * om / z;
        const double t3 = 4.0 * a * lam * ((w.value(2.0 * z) - w.value(z)) / z + shifted);
        const double lhs = t1 + negative + t3;
        record(c, z, lhs, relative_margin(lhs, negative), qi.converged && qj.converged, unconverged);
    }
    finish(c, unconverged);
    return c;
}

ModulusSpec find_valid_parameters(double lipschitz, double eps0, double c0_floor, double sigma)
{
    if (!(lipschitz >= 0.0)) throw ConfigError("find_valid_parameters needs L >= 0");
    if (!(eps0 >= 0.0 && eps0 < 1.0 + 1e-15)) throw ConfigError("find_valid_parameters needs eps0 in [0, 1]");
    double best = -kInf;
    // delta = 10^{-k/4} descending, gamma = splice limit * 10^{-j/2} descending.
    for (int k = 5; k <= 64; ++k) {
        const double delta = std::pow(10.0, -k / 4.0);
        for (int j = 0; j <= 32; ++j) {
            const double gamma = Omega::splice_limit(delta) * std::pow(10.0, -j / 2.0);
            const ModulusSpec spec = make_modulus_spec(Omega(delta, gamma), lipschitz, eps0, sigma, c0_floor);
            const RegimeCheck small = check_small_regime(spec);
            best = std::max(best, std::min(small.margin, 0.0));
            if (small.verdict != Verdict::pass || small.margin < kCertificateMargin) continue;
            const RegimeCheck large = check_large_regime(spec);
            best = std::max(best, std::min(small.margin, large.margin));
            if (large.verdict == Verdict::pass && large.margin >= kCertificateMargin) return spec;
        }
    }
    throw NoCertificateError(
        fmt::format("no (delta, gamma) passes both regimes with margin {} for L = {}, eps0 = {}; best margin {}",
                    kCertificateMargin, lipschitz, eps0, best),
        best);
}

Verdict ScaledCheck::verdict() const
{
    if (small.verdict == Verdict::fail || large.verdict == Verdict::fail) return Verdict::fail;
    if (small.verdict == Verdict::inconclusive || large.verdict == Verdict::inconclusive) return Verdict::inconclusive;
    return Verdict::pass;
}

ScaledCheck scaled_family_check(const ModulusSpec& spec, double lambda, int points)
{
    if (!(lambda >= 1.0 && lambda <= 2.0)) throw ConfigError(fmt::format("lambda = {} must lie in [1, 2]", lambda));
    ModulusSpec scaled = spec;
    scaled.lambda = lambda;
    return {lambda, check_small_regime(scaled, points), check_large_regime(scaled, points)};
}

DissipationSides dissipation_sides(const SampledProfile& fx, int x, int y, const Modulus& rho_t)
{
    if (fx.grid.dimension() != 1) throw UnsupportedDimensionError("dissipation bound is one-dimensional");
    const int n = fx.grid.nodes();
    if (x <= y || y < 0 || x >= n) throw PreconditionError("dissipation bound needs node indices y < x on the grid");
    const double dx = fx.grid.dx();
    const double z = (x - y) * dx;
    const double rz = rho_t(z);
    const double scale = std::max(1.0, std::fabs(rz));
    if (std::fabs(fx[x] - fx[y] - rz) > 1e-6 * scale)
        throw PreconditionError(
            fmt::format("pair is not saturated: f_x(x) - f_x(y) = {} but rho_t(z) = {}", fx[x] - fx[y], rz));
    // The modulus hypothesis f_x(a) - f_x(b) <= rho_t(a - b) for a > b, on every grid pair.
    std::vector<double> rho_grid(n);
    for (int j = 1; j < n; ++j) rho_grid[j] = rho_t(j * dx);
    for (int b = 0; b < n; ++b)
        for (int a2 = b + 1; a2 < n; ++a2)
            if (fx[a2] - fx[b] > rho_grid[a2 - b] + 1e-9 * scale)
                throw PreconditionError(fmt::format("modulus hypothesis fails at nodes ({}, {})", a2, b));

    // LHS: trapezoid over alpha = j dx with the second-order origin limit; beyond reach the
    // clamped data make the numerator the constant f_x(y) - f_x(x).
    const SampledProfile fxx = differentiate(fx);
    const SampledProfile fxxx = differentiate(fxx);
    const int reach = n;
    double acc = 0.0;
    for (int j = 1; j <= reach; ++j) {
        const double a = j * dx;
        const double plus = fx[y] - fx.clamped(y - j) - fx[x] + fx.clamped(x - j);
        const double minus = fx[y] - fx.clamped(y + j) - fx[x] + fx.clamped(x + j);
        const double w = j == reach ? 0.5 : 1.0;
        acc += w * (plus + minus) / (a * a);
    }
    acc *= dx;
    acc += dx * 0.5 * (fxxx[x] - fxxx[y]);
    acc += 2.0 * (fx[y] - fx[x]) / (reach * dx);

    // RHS: Gauss panels in log offset on (0, z), log-substituted tail on (z, inf).
    const double near = gauss_panels(
        [&](double u) {
            const double a = z * std::exp(u);
            return (2.0 * rz - rho_t(z - a) - rho_t(z + a)) / a;
        },
        std::log(1e-8), 0.0, 256);
    const double far = gauss_panels(
        [&](double v) {
            const double a = z * std::exp(v);
            return (rho_t(a + z) - rho_t(a) - rz) / a;
        },
        0.0, kTailSpan, 480);
    const double far_rest = -rz * std::exp(-kTailSpan) / z;
    return {acc, -2.0 * near + 2.0 * (far + far_rest)};
}

double dissipation_bound_check(const SampledProfile& fx, int x, int y, const ModulusSpec& spec, double t)
{
    return dissipation_sides(fx, x, y, [&](double r) { return rho_from_omega(spec, r, t); }).residual();
}

namespace {

nlohmann::json regime_json(const RegimeCheck& c)
{
    return {{"verdict", to_string(c.verdict)}, {"margin", c.margin},   {"worst_z", c.worst_z},
            {"worst_lhs", c.worst_lhs},        {"points", c.points},   {"range", {c.z_lo, c.z_hi}},
            {"bound_violations", c.bound_violations}};
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json certificate_json(const ModulusSpec& spec, const RegimeCheck& small, const RegimeCheck& large,
                                const std::vector<ScaledCheck>& lambda_grid)
{
    nlohmann::json lambdas = nlohmann::json::array();
    for (const auto& s : lambda_grid)
        lambdas.push_back({{"lambda", s.lambda},
                           {"verdict", to_string(s.verdict())},
                           {"small", s.small.margin},
                           {"large", s.large.margin}});
    nlohmann::json j{{"delta", spec.omega.delta()},
                     {"gamma", spec.omega.gamma()},
                     {"C0", finite_or_null(spec.c0)},
                     {"C0_checked", spec.c0_checked()},
                     {"C_tilde", spec.c_tilde},
                     {"L", spec.lipschitz},
                     {"eps0", spec.eps0},
                     {"sigma", spec.sigma},
                     {"margins", {{"small", small.margin}, {"large", large.margin}, {"lambda_grid", lambdas}}},
                     {"grids",
                      {{"small", {{"count", small.points}, {"range", {small.z_lo, small.z_hi}}}},
                       {"large", {{"count", large.points}, {"range", {large.z_lo, large.z_hi}}}}}},
                     {"checks", {{"small", regime_json(small)}, {"large", regime_json(large)}}}};
    if (spec.lipschitz > 0.0 && 2.0 * spec.lipschitz > spec.omega.value(spec.omega.delta()))
        j["C0_required_log_log"] = spec.omega.log_log_inverse(2.0 * spec.lipschitz);
    return j;
}

}  // namespace muskat
