#include "muskat/slope_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "muskat/errors.hpp"

namespace muskat {

namespace {

void require_1d(const SampledProfile& g, const char* what)
{
    if (g.grid.dimension() != 1) throw UnsupportedDimensionError(fmt::format("{} is one-dimensional", what));
}

struct WindowSups {
    double pos = 0.0;
    double neg = 0.0;
    int pos_at;
    int neg_at;
};

// Both inner sups over the window at one center; nodes with chi = 0 give the 0 candidates.
WindowSups window_sups(const SampledProfile& g, double sigma, int center)
{
    const double dx = g.grid.dx();
    const int half = static_cast<int>(std::ceil(2.0 * sigma / dx));
    const double z = g.grid.coord(center);
    WindowSups w{0.0, 0.0, center - half, center - half};
    const int lo = std::max(0, center - half);
    const int hi = std::min(g.grid.nodes() - 1, center + half);
    for (int i = lo; i <= hi; ++i) {
        const double v = chi((g.grid.coord(i) - z) / sigma) * g[i];
        if (v > w.pos) {
            w.pos = v;
            w.pos_at = i;
        }
        if (-v > w.neg) {
            w.neg = -v;
            w.neg_at = i;
        }
    }
    return w;
}

}  // namespace

BetaReport beta_sigma(const SampledProfile& g, double sigma)
{
    require_1d(g, "beta_sigma");
    const double dx = g.grid.dx();
    const double X = g.grid.half_width();
    if (!(sigma >= 2.0 * dx - 1e-12 && sigma <= X / 4.0 + 1e-12))
        throw ConfigError(fmt::format("sigma = {} outside [2 dx, X/4] = [{}, {}]", sigma, 2.0 * dx, X / 4.0));
    const int n = g.grid.nodes();
    BetaReport best{sigma, 0.0, 0.0, 0.0, 0.0, 0.0};
    bool first = true;
    double gmax = 0.0;
    for (int c = 0; c < n; ++c) {
        const double z = g.grid.coord(c);
        if (z - 2.0 * sigma < -X || z + 2.0 * sigma > X) continue;
        const WindowSups w = window_sups(g, sigma, c);
        const double p = w.pos * w.neg;
        if (first || p > best.value) {
            best.value = p;
            best.z_star = z;
            best.x_star = g.grid.coord(std::clamp(w.pos_at, 0, n - 1));
            best.y_star = g.grid.coord(std::clamp(w.neg_at, 0, n - 1));
            first = false;
        }
    }
    for (double v : g.values) gmax = std::max(gmax, std::fabs(v));
    // Moving z by dx/2 changes each weight by at most (2/sigma)(dx/2).
    best.center_discretization = 2.0 * (dx / sigma) * gmax * gmax;
    return best;
}

double beta_window_product(const SampledProfile& g, double sigma, int center)
{
    require_1d(g, "beta_window_product");
    const WindowSups w = window_sups(g, sigma, center);
    return w.pos * w.neg;
}

EnvelopeReport modulus_envelope(const SampledProfile& g, double max_r)
{
    require_1d(g, "modulus_envelope");
    const double X = g.grid.half_width();
    if (max_r > 2.0 * X + 1e-12) throw ConfigError("modulus_envelope: max_r exceeds 2X");
    const double dx = g.grid.dx();
    const int n = g.grid.nodes();
    const int jmax = std::min(n - 1, static_cast<int>(std::floor(max_r / dx + 1e-9)));
    EnvelopeReport rep;
    rep.distances.reserve(jmax);
    rep.envelope.reserve(jmax);
    for (int j = 1; j <= jmax; ++j) {
        double w = 0.0;
        for (int i = 0; i + j < n; ++i) w = std::max(w, std::fabs(g[i + j] - g[i]));
        rep.distances.push_back(j * dx);
        rep.envelope.push_back(w);
    }
    return rep;
}

double continuity_radius_field(std::span<const SampledProfile> field, double eps)
{
    if (!(eps > 0.0)) throw ConfigError("continuity_radius: eps must be positive");
    if (field.empty()) throw InputError("continuity_radius: empty field");
    const GridSpec& grid = field.front().grid;
    const double dx = grid.dx();
    const int n = grid.nodes();
    auto increment = [&](std::size_t p, std::size_t q) {
        double s = 0.0;
        for (const auto& c : field) s += (c[p] - c[q]) * (c[p] - c[q]);
        return std::sqrt(s);
    };
    if (grid.dimension() == 1) {
        for (int j = 1; j < n; ++j) {
            double w = 0.0;
            for (int i = 0; i + j < n; ++i) w = std::max(w, increment(i + j, i));
            if (w > eps) return (j - 1) * dx;
        }
        return 2.0 * grid.half_width();
    }
    if (grid.dimension() == 2) {
        struct Offset {
            int a, b;
            double r;
        };
        std::vector<Offset> offsets;
        for (int a = -(n - 1); a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (b > 0 || a > 0) offsets.push_back({a, b, std::hypot(a, b) * dx});
        std::stable_sort(offsets.begin(), offsets.end(), [](const Offset& l, const Offset& r) { return l.r < r.r; });
        // Offsets are visited by length; every length below the current one has passed.
        double below = 0.0, current = 0.0;
        for (const auto& o : offsets) {
            if (o.r > current) {
                below = current;
                current = o.r;
            }
            double w = 0.0;
            const auto row = static_cast<std::size_t>(n);
            for (int i = std::max(0, -o.a); i < std::min(n, n - o.a); ++i)
                for (int j = 0; j + o.b < n; ++j)
                    w = std::max(w, increment((i + o.a) * row + (j + o.b), i * row + j));
            if (w > eps) return below;
        }
        return 2.0 * grid.half_width();
    }
    throw UnsupportedDimensionError("continuity_radius supports d = 1, 2");
}

double continuity_radius(const SampledProfile& g, double eps)
{
    return continuity_radius_field(std::span<const SampledProfile>(&g, 1), eps);
}

const char* to_string(Verdict v)
{
    switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

bool refinement_stable(double coarse, double fine, double tolerance)
{
    if (!std::isfinite(coarse) || !std::isfinite(fine)) return false;
    const double scale = std::max(std::fabs(coarse), std::fabs(fine));
    return std::fabs(coarse - fine) <= tolerance * scale;
}

namespace {

void require_frames(const Trajectory& traj, std::size_t count, const char* what)
{
    if (traj.size() < count)
        throw InsufficientDataError(fmt::format("{} needs at least {} frames, got {}", what, count, traj.size()));
}

double frame_beta(const TrajectoryFrame& fr)
{
    if (!fr.diagnostics.beta) throw UnsupportedDimensionError("beta_sigma is only recorded for 1-D frames");
    return *fr.diagnostics.beta;
}

// Fits the smallest C with observed(t) <= base + C * shape(t) over frames with shape > 0,
// then checks a reference constant with relative slack if one is given.
void fit_one_sided(BoundFit& fit, double base, auto&& shape)
{
    double c = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t k = 0; k < fit.times.size(); ++k) {
        const double s = shape(fit.times[k]);
        if (!(s > 0.0)) continue;
        c = std::max(c, (fit.observed[k] - base) / s);
        any = true;
    }
    if (!any) throw InsufficientDataError(fit.bound + ": no frame with t > 0");
    fit.constant = c;
    double slack = 0.0;
    for (std::size_t k = 0; k < fit.times.size(); ++k) {
        const double s = shape(fit.times[k]);
        if (s > 0.0) slack = std::max(slack, base + c * s - fit.observed[k]);
    }
    fit.residual = slack;
    if (!std::isfinite(c)) {
        fit.verdict = Verdict::fail;
        return;
    }
    fit.verdict = Verdict::pass;
    if (fit.reference) {
        for (std::size_t k = 0; k < fit.times.size(); ++k) {
            const double bound = base + *fit.reference * shape(fit.times[k]);
            if (fit.observed[k] > bound + kBoundSlack * std::fabs(bound)) fit.verdict = Verdict::fail;
        }
    }
}

}  // namespace

BoundFit check_lipschitz_growth(const Trajectory& traj, double sigma, std::optional<double> reference)
{
    require_frames(traj, 5, "check_lipschitz_growth");
    BoundFit fit;
    fit.bound = "lipschitz_growth";
    fit.anchor = "Lemma 2.1: ||f_x(t)|| <= ||f_0'|| + C_1 (1+L)^2 sigma^-1 t";
    fit.reference = reference;
    const double base = traj.front().diagnostics.fx_sup;
    for (const auto& fr : traj) {
        fit.times.push_back(fr.t);
        fit.observed.push_back(fr.diagnostics.fx_sup);
        if (!fit.horizon && fr.diagnostics.fx_sup > 2.0 * base) fit.horizon = fr.t;
    }
    fit_one_sided(fit, base, [&](double t) { return t / sigma; });
    return fit;
}

BoundFit check_beta_growth(const Trajectory& traj, double sigma, std::optional<double> reference)
{
    require_frames(traj, 5, "check_beta_growth");
    BoundFit fit;
    fit.bound = "beta_growth";
    fit.anchor = "Lemma 2.2: beta_sigma(t) <= beta_sigma(0) + C sigma^-1 t^(1/2)";
    fit.reference = reference;
    const double base = frame_beta(traj.front());
    for (const auto& fr : traj) {
        fit.times.push_back(fr.t);
        fit.observed.push_back(frame_beta(fr));
        if (!fit.horizon && frame_beta(fr) >= 1.0) fit.horizon = fr.t;
    }
    fit_one_sided(fit, base, [&](double t) { return std::sqrt(std::max(t, 0.0)) / sigma; });
    return fit;
}

BoundFit check_beta_cap(const Trajectory& traj, double cap)
{
    require_frames(traj, 1, "check_beta_cap");
    BoundFit fit;
    fit.bound = "beta_cap";
    fit.anchor = "Lemma 2.2: beta_sigma(t) <= 1 - 3 eps0 / 4";
    fit.reference = cap;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& fr : traj) {
        fit.times.push_back(fr.t);
        fit.observed.push_back(frame_beta(fr));
        worst = std::max(worst, frame_beta(fr));
        if (!fit.horizon && frame_beta(fr) > cap) fit.horizon = fr.t;
    }
    fit.constant = worst;
    fit.residual = cap - worst;
    fit.verdict = worst <= cap ? Verdict::pass : Verdict::fail;
    return fit;
}

BoundFit check_smoothing(const Trajectory& traj, double t_min, std::optional<double> reference)
{
    BoundFit fit;
    fit.bound = "smoothing";
    fit.anchor = "Theorem 1.1: sup_x |delta_alpha f_x(t,x)| <= C_0 t^-1 |alpha|";
    fit.reference = reference;
    bool any = false;
    for (const auto& fr : traj) {
        if (!(fr.t > 0.0) || fr.t < t_min) continue;
        require_1d(fr.fx, "check_smoothing");
        const auto env = modulus_envelope(fr.fx, std::min(32.0 * fr.fx.grid.dx(), 2.0 * fr.fx.grid.half_width()));
        double ratio = 0.0;
        for (std::size_t j = 0; j < env.distances.size(); ++j)
            ratio = std::max(ratio, env.envelope[j] / env.distances[j]);
        fit.times.push_back(fr.t);
        fit.observed.push_back(fr.t * ratio);
        any = true;
    }
    if (!any) throw InsufficientDataError("check_smoothing: no frame with t > 0 and t >= t_min");
    // observed is t * sup|delta f_x|/|alpha|, so the bound is observed <= C0.
    fit.constant = *std::max_element(fit.observed.begin(), fit.observed.end());
    fit.residual = fit.constant - *std::min_element(fit.observed.begin(), fit.observed.end());
    fit.verdict = std::isfinite(fit.constant) ? Verdict::pass : Verdict::fail;
    if (fit.reference && fit.constant > *fit.reference * (1.0 + kBoundSlack)) fit.verdict = Verdict::fail;
    return fit;
}

BoundFit gronwall_fit(const Trajectory& a, const Trajectory& b, std::optional<double> reference)
{
    if (a.size() != b.size()) throw InputError("gronwall_fit: trajectories have different frame counts");
    require_frames(a, 2, "gronwall_fit");
    BoundFit fit;
    fit.bound = "gronwall";
    fit.anchor = "uniqueness: ||f_1 - f_2||(t) <= ||f_1 - f_2||(0) exp(lambda t)";
    fit.reference = reference;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k].t != b[k].t) throw InputError("gronwall_fit: frame times differ");
        fit.times.push_back(a[k].t);
        fit.observed.push_back(sup_norm_diff(a[k].f.values, b[k].f.values));
    }
    const double d0 = fit.observed.front();
    if (d0 == 0.0) {
        // Identical data: the distance must stay zero.
        const double worst = *std::max_element(fit.observed.begin(), fit.observed.end());
        fit.constant = 0.0;
        fit.residual = worst;
        fit.verdict = worst == 0.0 ? Verdict::pass : Verdict::fail;
        return fit;
    }
    double lambda = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < fit.times.size(); ++k) {
        if (!(fit.times[k] > 0.0)) continue;
        lambda = std::max(lambda, std::log(fit.observed[k] / d0) / fit.times[k]);
    }
    fit.constant = lambda;
    double slack = 0.0;
    for (std::size_t k = 0; k < fit.times.size(); ++k)
        slack = std::max(slack, d0 * std::exp(lambda * fit.times[k]) - fit.observed[k]);
    fit.residual = slack;
    fit.verdict = std::isfinite(lambda) ? Verdict::pass : Verdict::fail;
    if (fit.reference) {
        for (std::size_t k = 0; k < fit.times.size(); ++k) {
            const double bound = d0 * std::exp(*fit.reference * fit.times[k]);
            if (fit.observed[k] > bound * (1.0 + kBoundSlack)) fit.verdict = Verdict::fail;
        }
    }
    return fit;
}

}  // namespace muskat
