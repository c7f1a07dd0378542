#include "muskat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "muskat/errors.hpp"

namespace muskat {

GridSpec::GridSpec(int dimension, double half_width, int points_per_axis)
    : dim_(dimension), half_width_(half_width), n_(points_per_axis)
{
    if (dim_ < 1) throw ConfigError("grid.dimension must be >= 1");
    if (!(half_width_ >= 1.0)) throw ConfigError("grid.half_width must be >= 1");
    if (n_ < 16 || n_ % 2 != 0) throw ConfigError("grid.points must be even and >= 16");
}

std::size_t GridSpec::size() const
{
    std::size_t s = 1;
    for (int k = 0; k < dim_; ++k) s *= static_cast<std::size_t>(n_ + 1);
    return s;
}

SampledProfile::SampledProfile(GridSpec g, std::vector<double> v, double radius)
    : grid(g), values(std::move(v)), support_radius(radius)
{
    if (values.size() != grid.size()) throw InputError("profile size does not match grid");
}

double SampledProfile::clamped(long i) const
{
    const long last = grid.nodes() - 1;
    return values[static_cast<std::size_t>(std::clamp(i, 0L, last))];
}

double chi(double s)
{
    const double a = std::fabs(s);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    const double u = a - 1.0;
    return u <= 0.5 ? 1.0 - 2.0 * u * u : 2.0 * (1.0 - u) * (1.0 - u);
}

double chi_prime(double s)
{
    const double a = std::fabs(s);
    if (a <= 1.0 || a >= 2.0) return 0.0;
    const double u = a - 1.0;
    const double d = u <= 0.5 ? -4.0 * u : -4.0 * (1.0 - u);
    return s < 0 ? -d : d;
}

double chi_second(double s)
{
    const double a = std::fabs(s);
    if (a <= 1.0 || a >= 2.0) return 0.0;
    return a - 1.0 <= 0.5 ? -4.0 : 4.0;
}

double bump(double r)
{
    const double r2 = r * r;
    return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
}

namespace {

std::size_t flat(int n, int i, int j) { return static_cast<std::size_t>(i) * n + j; }

SampledProfile mollify_1d(const SampledProfile& g, double eps)
{
    const GridSpec& grid = g.grid;
    const double dx = grid.dx();
    const int w = static_cast<int>(std::floor(eps / dx));
    std::vector<double> weights(2 * w + 1);
    double mass = 0.0;
    for (int k = -w; k <= w; ++k) mass += weights[k + w] = bump(k * dx / eps);
    for (double& x : weights) x /= mass;

    std::vector<double> out(g.size());
    for (int i = 0; i < grid.nodes(); ++i) {
        double acc = 0.0;
        for (int k = -w; k <= w; ++k) acc += weights[k + w] * g.clamped(i - k);
        out[i] = acc;
    }
    return {grid, std::move(out), std::min(g.support_radius + eps, grid.half_width())};
}

SampledProfile mollify_2d(const SampledProfile& g, double eps)
{
    const GridSpec& grid = g.grid;
    const int n = grid.nodes();
    const double dx = grid.dx();
    const int w = static_cast<int>(std::floor(eps / dx));
    const int span = 2 * w + 1;
    std::vector<double> weights(static_cast<std::size_t>(span) * span);
    double mass = 0.0;
    for (int a = -w; a <= w; ++a)
        for (int b = -w; b <= w; ++b)
            mass += weights[flat(span, a + w, b + w)] = bump(std::hypot(a * dx, b * dx) / eps);
    for (double& x : weights) x /= mass;

    std::vector<double> out(g.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int a = -w; a <= w; ++a) {
                const int ii = std::clamp(i - a, 0, n - 1);
                for (int b = -w; b <= w; ++b) {
                    const int jj = std::clamp(j - b, 0, n - 1);
                    acc += weights[flat(span, a + w, b + w)] * g.values[flat(n, ii, jj)];
                }
            }
            out[flat(n, i, j)] = acc;
        }
    return {grid, std::move(out), std::min(g.support_radius + eps, grid.half_width())};
}

// Fourth-order first derivative along a strided line of n samples.
void diff_line(const double* in, double* out, int n, std::size_t stride, double dx)
{
    auto v = [&](int k) { return in[k * stride]; };
    const double c = 1.0 / (12.0 * dx);
    for (int i = 2; i < n - 2; ++i)
        out[i * stride] = c * (v(i - 2) - 8.0 * v(i - 1) + 8.0 * v(i + 1) - v(i + 2));
    out[0] = c * (-25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4));
    out[stride] = c * (-3.0 * v(0) - 10.0 * v(1) + 18.0 * v(2) - 6.0 * v(3) + v(4));
    const int m = n - 1;
    out[m * stride] = -c * (-25.0 * v(m) + 48.0 * v(m - 1) - 36.0 * v(m - 2) + 16.0 * v(m - 3) - 3.0 * v(m - 4));
    out[(m - 1) * stride] = -c * (-3.0 * v(m) - 10.0 * v(m - 1) + 18.0 * v(m - 2) - 6.0 * v(m - 3) + v(m - 4));
}

}  // namespace

SampledProfile mollify(const SampledProfile& g, double eps)
{
    if (!(eps >= 2.0 * g.grid.dx()))
        throw UnresolvableError(fmt::format("mollifier scale {} below 2*dx = {}", eps, 2.0 * g.grid.dx()));
    switch (g.grid.dimension()) {
    case 1: return mollify_1d(g, eps);
    case 2: return mollify_2d(g, eps);
    default: throw UnsupportedDimensionError("mollify supports d = 1, 2");
    }
}

SampledProfile differentiate(const SampledProfile& f, int axis)
{
    const GridSpec& grid = f.grid;
    const int n = grid.nodes();
    if (axis < 0 || axis >= grid.dimension()) throw ConfigError("differentiation axis out of range");
    std::vector<double> out(f.size());
    if (grid.dimension() == 1) {
        diff_line(f.values.data(), out.data(), n, 1, grid.dx());
    } else if (grid.dimension() == 2) {
        for (int k = 0; k < n; ++k) {
            if (axis == 0)
                diff_line(f.values.data() + k, out.data() + k, n, static_cast<std::size_t>(n), grid.dx());
            else
                diff_line(f.values.data() + flat(n, k, 0), out.data() + flat(n, k, 0), n, 1, grid.dx());
        }
    } else {
        throw UnsupportedDimensionError("differentiate supports d = 1, 2");
    }
    return {grid, std::move(out), f.support_radius};
}

SampledProfile cutoff_window(const CutoffSpec& c, const SampledProfile& g)
{
    const GridSpec& grid = g.grid;
    if (grid.dimension() != 1) throw UnsupportedDimensionError("cutoff_window is one-dimensional");
    const double lo = grid.coord(0);
    const double hi = grid.coord(grid.nodes() - 1);
    if (c.center - 2.0 * c.sigma < lo || c.center + 2.0 * c.sigma > hi)
        throw OutOfDomainError(fmt::format("window [{}, {}] leaves the grid", c.center - 2.0 * c.sigma,
                                           c.center + 2.0 * c.sigma));
    std::vector<double> out(g.size());
    for (int i = 0; i < grid.nodes(); ++i) out[i] = chi_window(c, grid.coord(i)) * g.values[i];
    return {grid, std::move(out), std::min(g.support_radius, std::fabs(c.center) + 2.0 * c.sigma)};
}

double sup_norm(std::span<const double> v)
{
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double sup_norm_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::fabs(a[k] - b[k]));
    return m;
}

double telescoped_height(const SampledProfile& slope)
{
    double s = 0.0;
    for (double v : slope.values) s += v;
    return s * slope.grid.dx();
}

SampledProfile integrate_slope(const SampledProfile& slope, double base)
{
    if (slope.grid.dimension() != 1) throw UnsupportedDimensionError("integrate_slope is one-dimensional");
    const int n = slope.grid.nodes();
    const double dx = slope.grid.dx();
    const SampledProfile curvature = differentiate(slope);
    std::vector<double> f(slope.size());
    f[0] = base;
    // Trapezoid with the Euler-Maclaurin endpoint correction.
    for (int i = 0; i + 1 < n; ++i)
        f[i + 1] = f[i] + 0.5 * dx * (slope[i] + slope[i + 1]) - dx * dx / 12.0 * (curvature[i + 1] - curvature[i]);
    return {slope.grid, std::move(f), slope.support_radius};
}

void write_profile_csv(const std::filesystem::path& path, const SampledProfile& p)
{
    std::FILE* out = std::fopen(path.string().c_str(), "w");
    if (!out) throw Error("cannot open " + path.string());
    const GridSpec& g = p.grid;
    std::fprintf(out, "# %d, %.17g, %d, %.17g\n", g.dimension(), g.half_width(), g.points(), p.support_radius);
    const int n = g.nodes();
    if (g.dimension() == 1) {
        for (int i = 0; i < n; ++i) std::fprintf(out, "%.17g,%.17g\n", g.coord(i), p[i]);
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                std::fprintf(out, "%.17g,%.17g,%.17g\n", g.coord(i), g.coord(j), p.at(i, j));
    }
    std::fclose(out);
}

SampledProfile read_profile_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    int d = 0, n = 0;
    double x = 0.0, radius = 0.0;
    if (std::sscanf(line.c_str(), "# %d, %lf, %d, %lf", &d, &x, &n, &radius) != 4)
        throw InputError("bad profile header in " + path.string());
    GridSpec grid(d, x, n);
    std::vector<double> values;
    values.reserve(grid.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    return {grid, std::move(values), radius};
}

}  // namespace muskat
