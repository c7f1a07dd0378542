#include "muskat/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "muskat/errors.hpp"
#include "muskat/slope_analysis.hpp"

namespace muskat {

namespace {

double smoothstep5(double t)
{
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

// C^2 profile through (x_m, v_m), held constant outside the knots.
class KnotProfile {
public:
    void push(double x, double v)
    {
        if (!knots_.empty()) {
            const auto [lx, lv] = knots_.back();
            if (x == lx && v == lv) return;
            if (!(x > lx))
                throw ConstraintError(fmt::format("interval layout does not fit: knot at {} follows {}", x, lx));
        }
        knots_.emplace_back(x, v);
    }
    double last_x() const { return knots_.back().first; }

    double operator()(double x) const
    {
        if (x <= knots_.front().first) return knots_.front().second;
        if (x >= knots_.back().first) return knots_.back().second;
        const auto hi = std::upper_bound(knots_.begin(), knots_.end(), x,
                                         [](double value, const auto& k) { return value < k.first; });
        const auto lo = hi - 1;
        const double t = (x - lo->first) / (hi->first - lo->first);
        return lo->second + (hi->second - lo->second) * smoothstep5(t);
    }

private:
    std::vector<std::pair<double, double>> knots_;
};

void validate(const IntervalSlopeSpec& spec, const GridSpec& grid)
{
    const auto& a = spec.breakpoints;
    if (a.size() < 2 || spec.envelopes.size() + 1 != a.size())
        throw ConfigError("interval slope spec needs K+1 breakpoints and K envelopes, K >= 1");
    for (std::size_t k = 0; k + 1 < a.size(); ++k)
        if (!(a[k + 1] > a[k])) throw ConfigError("breakpoints must be strictly increasing");
    if (!(a.front() > -grid.half_width() && a.back() < grid.half_width()))
        throw ConfigError(fmt::format("breakpoints must lie inside (-{0}, {0})", grid.half_width()));
    if (!(spec.eps0 > 0.0 && spec.eps0 < 1.0)) throw ConfigError("eps0 must lie in (0, 1)");
    if (!(spec.junction_band > 0.0) || !(spec.transition > 0.0))
        throw ConfigError("junction_band and transition must be positive");
    for (std::size_t k = 0; k < spec.envelopes.size(); ++k) {
        const auto [lo, hi] = spec.envelopes[k];
        if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
            throw ConfigError(fmt::format("envelope {} must be finite with lo <= hi", k));
        const double product = std::max(hi, 0.0) * std::max(-lo, 0.0);
        if (product > 1.0 - spec.eps0)
            throw ConstraintError(fmt::format("envelope {} = [{}, {}] has sign product {} > 1 - eps0 = {}", k, lo,
                                              hi, product, 1.0 - spec.eps0));
    }
}

}  // namespace

IntervalSlopeData gen_interval_slope(const IntervalSlopeSpec& spec, const GridSpec& grid)
{
    validate(spec, grid);
    const auto& a = spec.breakpoints;
    const auto& env = spec.envelopes;
    const std::size_t count = env.size();
    const double mu = spec.junction_band;
    const double ramp = spec.transition;
    // A 4 sigma window cannot reach across a zero band of width 2 mu.
    const double sigma = 0.4 * mu;
    if (sigma < 2.0 * grid.dx())
        throw UnresolvableError(fmt::format("junction band {} gives sigma = {} below 2 dx", mu, sigma));

    std::vector<double> rest(count);
    for (std::size_t k = 0; k < count; ++k) rest[k] = std::clamp(0.0, env[k].lo, env[k].hi);
    auto zero_band = [&](std::size_t k) {  // junction at a_k between intervals k-1 and k
        const bool pos = env[k - 1].hi > 0.0 || env[k].hi > 0.0;
        const bool neg = env[k - 1].lo < 0.0 || env[k].lo < 0.0;
        return pos && neg;
    };

    KnotProfile shape;
    for (std::size_t k = 0; k < count; ++k) {
        const double r = rest[k];
        if (k == 0) {
            shape.push(a[0], r);
        } else if (zero_band(k)) {
            shape.push(a[k] + mu, 0.0);
            shape.push(a[k] + mu + ramp, r);
        } else {
            shape.push(a[k] + mu, r);
        }
        const bool last = k + 1 == count;
        const bool right_band = !last && zero_band(k + 1);
        const double core_lo = shape.last_x();
        const double core_hi = last ? a[k + 1] : a[k + 1] - mu - (right_band ? ramp : 0.0);

        std::vector<double> targets;
        if (env[k].hi != r) targets.push_back(env[k].hi);
        if (env[k].lo != r) targets.push_back(env[k].lo);
        if (targets.size() == 1) {
            shape.push(core_lo + ramp, targets[0]);
            shape.push(core_hi - ramp, targets[0]);
            shape.push(core_hi, r);
        } else if (targets.size() == 2) {
            // Opposite plateaus meet within one sigma so a single window sees both.
            const double plateau = (core_hi - core_lo - 2.0 * ramp - sigma) / 2.0;
            if (!(plateau > 0.0)) throw ConstraintError(fmt::format("interval {} is too short for its envelope", k));
            shape.push(core_lo + ramp, targets[0]);
            shape.push(core_lo + ramp + plateau, targets[0]);
            shape.push(core_lo + ramp + plateau + sigma, targets[1]);
            shape.push(core_hi - ramp, targets[1]);
            shape.push(core_hi, r);
        } else {
            shape.push(core_hi, r);
        }
        if (right_band) {
            shape.push(a[k + 1] - mu, 0.0);
        } else if (!last) {
            shape.push(a[k + 1] - mu, r);
        }
    }

    const double reach = std::max(std::fabs(a.front()), std::fabs(a.back()));
    IntervalSlopeData out{sample_1d(grid, reach, shape), sigma, 0.0, 0.0};

    out.beta = beta_sigma(out.slope, sigma).value;
    if (out.beta > 1.0 - spec.eps0 / 2.0)
        throw ConstraintError(fmt::format("generated slope has beta_sigma = {} > 1 - eps0/2", out.beta));

    const SampledProfile smooth = mollify(out.slope, 4.0 * grid.dx());
    for (std::size_t k = 1; k < count; ++k)
        for (int i = 0; i < grid.nodes(); ++i)
            if (std::fabs(grid.coord(i) - a[k]) <= mu + ramp)
                out.junction_oscillation = std::max(out.junction_oscillation, std::fabs(out.slope[i] - smooth[i]));
    if (out.junction_oscillation > 1.0 - spec.eps0)
        throw ConstraintError(
            fmt::format("junction oscillation {} exceeds 1 - eps0; lengthen the transition", out.junction_oscillation));
    return out;
}

SampledProfile gen_sinx2(const GridSpec& grid, double window)
{
    if (grid.dimension() != 1) throw UnsupportedDimensionError("gen_sinx2 is one-dimensional");
    if (!(window > 0.0 && window <= grid.half_width()))
        throw ConfigError(fmt::format("window {} must lie in (0, X = {}]", window, grid.half_width()));
    return sample_1d(grid, window, [&](double x) { return std::sin(x * x) * chi(2.0 * x / window); });
}

SampledProfile gen_compact_approximant(const SampledProfile& slope, double eps)
{
    if (slope.grid.dimension() != 1) throw UnsupportedDimensionError("gen_compact_approximant is one-dimensional");
    if (!(eps > 0.0)) throw ConfigError("approximant scale must be positive");
    SampledProfile cut = slope;
    for (int i = 0; i < cut.grid.nodes(); ++i) cut.values[i] *= chi(eps * cut.grid.coord(i));
    cut.support_radius = std::min(slope.support_radius, 2.0 / eps);
    return mollify(cut, eps);
}

double gradient_deviation(const SampledProfile& f, double eta)
{
    const GridSpec& grid = f.grid;
    const int d = grid.dimension();
    const int n = grid.nodes();
    const int margin = static_cast<int>(std::ceil(eta / grid.dx())) + 3;
    if (2 * margin >= n) throw UnresolvableError("mollifier scale leaves no interior nodes");
    double dev = 0.0;
    if (d == 1) {
        const auto g = differentiate(f);
        const auto gm = mollify(g, eta);
        for (int i = margin; i < n - margin; ++i) dev = std::max(dev, std::fabs(g[i] - gm[i]));
        return dev;
    }
    if (d != 2) throw UnsupportedDimensionError("gradient_deviation supports d = 1, 2");
    const auto g1 = differentiate(f, 0), g2 = differentiate(f, 1);
    const auto m1 = mollify(g1, eta), m2 = mollify(g2, eta);
    for (int i = margin; i < n - margin; ++i)
        for (int j = margin; j < n - margin; ++j) {
            const std::size_t k = static_cast<std::size_t>(i) * n + j;
            dev = std::max(dev, std::hypot(g1[k] - m1[k], g2[k] - m2[k]));
        }
    return dev;
}

NdData gen_nd_small_deviation(const NdDataSpec& spec, const GridSpec& grid)
{
    const int d = spec.dim;
    if (d != grid.dimension()) throw ConfigError("nd data dimension differs from the grid dimension");
    if (d < 1 || d > 2) throw UnsupportedDimensionError("gen_nd_small_deviation supports d = 1, 2");
    std::vector<double> p = spec.plane_gradient;
    if (p.empty()) p.assign(d, 0.0);
    if (static_cast<int>(p.size()) != d) throw ConfigError("plane_gradient needs one entry per dimension");
    const double c_max = 1.0 / (4.0 * (d + 1));
    if (!(spec.c_d > 0.0 && spec.c_d < c_max))
        throw ConstraintError(fmt::format("c_d = {} must lie in (0, 1/(4(d+1)) = {})", spec.c_d, c_max));
    if (!(spec.ripple_amplitude >= 0.0 && spec.ripple_amplitude <= spec.c_d))
        throw ConstraintError(fmt::format("ripple amplitude {} must lie in [0, c_d]", spec.ripple_amplitude));
    const double k = spec.ripple_wavenumber;
    if (spec.ripple_amplitude > 0.0 && !(2.0 * std::numbers::pi / k >= 8.0 * grid.dx()))
        throw UnresolvableError(fmt::format("ripple wavelength {} is below 8 dx", 2.0 * std::numbers::pi / k));
    if (!(spec.bump_width > 0.0)) throw ConfigError("bump_width must be positive");

    const double w2 = spec.bump_width * spec.bump_width;
    const double ripple = spec.ripple_amplitude > 0.0 ? spec.ripple_amplitude / k : 0.0;
    auto sample = [&]() {
        if (d == 1)
            return sample_1d(grid, grid.half_width(), [&](double x) {
                return p[0] * x + spec.bump_amplitude * std::exp(-x * x / w2) + ripple * std::sin(k * x);
            });
        const double u = std::numbers::sqrt2 / 2.0;
        return sample_2d(grid, grid.half_width(), [&](double x, double y) {
            return p[0] * x + p[1] * y + spec.bump_amplitude * std::exp(-(x * x + y * y) / w2) +
                   ripple * std::sin(k * u * (x + y));
        });
    };
    NdData out{sample(), 0.0, spec.eta};
    out.deviation = gradient_deviation(out.f, spec.eta);
    if (out.deviation > 1.25 * spec.c_d)
        throw ConstraintError(fmt::format("measured deviation {} exceeds 5/4 c_d = {}", out.deviation, 1.25 * spec.c_d));
    return out;
}

}  // namespace muskat
