#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "gauss.hpp"
#include "muskat/errors.hpp"
#include "muskat/kernels.hpp"
#include "muskat/parallel.hpp"

namespace muskat {

namespace {

void require_finite(const SampledProfile& f)
{
    for (double v : f.values)
        if (!std::isfinite(v)) throw InputError("non-finite value in profile");
}

double outer_radius(const SampledProfile& f, const QuadratureConfig& quad)
{
    if (!(quad.outer_radius_factor >= 4.0))
        throw ConfigError(
            fmt::format("quadrature.outer_radius_factor = {} must be >= 4", quad.outer_radius_factor));
    return quad.outer_radius_factor * f.grid.half_width();
}

}  // namespace

SampledProfile muskat_rhs_1d(const SampledProfile& f, const QuadratureConfig& quad)
{
    if (f.grid.dimension() != 1) throw UnsupportedDimensionError("muskat_rhs_1d needs a 1-D profile");
    require_finite(f);
    const double dx = f.grid.dx();
    const long n = f.grid.nodes();
    const long reach = std::lround(outer_radius(f, quad) / dx);
    const double a_out = reach * dx;

    const SampledProfile fx = differentiate(f);
    const SampledProfile fxx = differentiate(fx);

    // Data padded with the far-field constants so the offset loop needs no clamping.
    std::vector<double> padded(static_cast<std::size_t>(n + 2 * reach));
    for (long k = 0; k < static_cast<long>(padded.size()); ++k) padded[k] = f.clamped(k - reach);
    const double c_left = f[0];
    const double c_right = f[n - 1];
    const bool patch = quad.origin_patch == OriginPatch::limit;

    std::vector<double> out(f.size());
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t node) {
        const long i = static_cast<long>(node);
        const double fi = f[i];
        const double g = fx[i];
        const double* left = padded.data() + reach + i;
        const double* right = left;
        double acc = 0.0;
        for (long j = 1; j <= reach; ++j) {
            const double a = j * dx;
            const double dl = fi - left[-j];
            const double dr = fi - right[j];
            const double term = (a * g - dl) / (a * a + dl * dl) + (-a * g - dr) / (a * a + dr * dr);
            acc += j == reach ? 0.5 * term : term;
        }
        acc *= dx;
        if (patch) acc += dx * fxx[i] / (2.0 * (1.0 + g * g));
        const double dl = fi - c_left;
        const double dr = fi - c_right;
        const double a2 = a_out * a_out;
        acc += 0.5 * g * std::log((a2 + dr * dr) / (a2 + dl * dl)) - std::atan(dl / a_out) - std::atan(dr / a_out);
        out[node] = acc;
    });
    return {f.grid, std::move(out), f.support_radius};
}

namespace {

struct Quadrant {
    double a;
    double b;
};

// int over the exterior of the box of -D / (|alpha|^2 + D^2)^{3/2}, split into the
// four quadrants around the node.
double exterior_increment_part(double diff, const std::array<Quadrant, 4>& quads)
{
    double s = 0.0;
    for (const auto& q : quads) {
        const double r = std::sqrt(q.a * q.a + q.b * q.b + diff * diff);
        s -= std::atan(diff * r / (q.a * q.b));
    }
    return s;
}

// Corner antiderivative of alpha_1 / (|alpha|^2 + D^2)^{3/2} over both variables.
double corner_primitive(double along, double across, double diff)
{
    return -std::asinh(across / std::sqrt(along * along + diff * diff));
}

double rectangle_moment(double lo1, double hi1, double lo2, double hi2, double diff)
{
    return corner_primitive(hi1, hi2, diff) - corner_primitive(lo1, hi2, diff) - corner_primitive(hi1, lo2, diff) +
           corner_primitive(lo1, lo2, diff);
}

SampledProfile muskat_rhs_2d(const SampledProfile& f, const QuadratureConfig& quad)
{
    require_finite(f);
    outer_radius(f, quad);
    const GridSpec& grid = f.grid;
    const int n = grid.nodes();
    const double dx = grid.dx();
    const double cell = dx * dx;
    const int block = quad.origin_block;
    const bool patch = quad.origin_patch == OriginPatch::limit;
    if (block < 0 || block >= grid.points() / 2) throw ConfigError("quadrature.origin_block out of range");

    const SampledProfile g1 = differentiate(f, 0);
    const SampledProfile g2 = differentiate(f, 1);
    const SampledProfile h11 = differentiate(g1, 0);
    const SampledProfile h22 = differentiate(g2, 1);
    const SampledProfile h12 = differentiate(g1, 1);

    double ring = 0.0;
    for (int k = 0; k < n - 1; ++k) ring += f.at(0, k) + f.at(k + 1, 0) + f.at(n - 1, k + 1) + f.at(k, n - 1);
    const double c_far = ring / (4.0 * (n - 1));

    // |alpha|^2 for every offset pair, offsets shifted by n - 1.
    const int span = 2 * n - 1;
    std::vector<double> r2(static_cast<std::size_t>(span) * span);
    for (int a = 0; a < span; ++a)
        for (int b = 0; b < span; ++b) {
            const double u = (a - (n - 1)) * dx;
            const double v = (b - (n - 1)) * dx;
            r2[static_cast<std::size_t>(a) * span + b] = u * u + v * v;
        }

    // Angular nodes for the polar block integral: 8 octants, Gauss in each.
    std::vector<double> theta, theta_w;
    for (int o = 0; o < 8; ++o)
        for (std::size_t k = 0; k < detail::kGaussX.size(); ++k) {
            const double lo = o * std::numbers::pi / 4.0;
            theta.push_back(lo + (detail::kGaussX[k] + 1.0) * std::numbers::pi / 8.0);
            theta_w.push_back(detail::kGaussW[k] * std::numbers::pi / 8.0);
        }
    const double block_half = (2 * block + 1) * dx / 2.0;
    const double box_lo = grid.coord(0) - dx / 2.0;
    const double box_hi = grid.coord(n - 1) + dx / 2.0;

    std::vector<double> out(f.size());
    parallel_for(f.size(), [&](std::size_t node) {
        const int i0 = static_cast<int>(node / n);
        const int j0 = static_cast<int>(node % n);
        const double fp = f[node];
        const double p1 = g1[node];
        const double p2 = g2[node];
        std::vector<double> row_store(static_cast<std::size_t>(n));
        double* __restrict row = row_store.data();
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double a1 = (i0 - i) * dx;
            const double base = a1 * p1 + j0 * dx * p2;
            const double step = dx * p2;
            // |alpha|^2 is even in each offset, so rr[j] covers alpha_2 = (j0 - j) dx.
            const double* __restrict rr = r2.data() + static_cast<std::size_t>(i0 - i + n - 1) * span + (n - 1 - j0);
            const double* __restrict fr = f.values.data() + static_cast<std::size_t>(i) * n;
            for (int j = 0; j < n; ++j) {
                const double d = fp - fr[j];
                const double s = rr[j] + d * d;
                row[j] = (base - j * step - d) / (s * std::sqrt(s));
            }
            if (i == i0) row[j0] = 0.0;
            std::array<double, 4> part{};
            int j = 0;
            for (; j + 4 <= n; j += 4)
                for (int m = 0; m < 4; ++m) part[m] += row[j + m];
            for (; j < n; ++j) part[0] += row[j];
            acc += (part[0] + part[1]) + (part[2] + part[3]);
        }
        acc *= cell;

        if (patch) {
            const double q11 = 0.5 * h11[node], q22 = 0.5 * h22[node], q12 = h12[node];
            auto angular = [&](double c, double s) {
                const double slope = c * p1 + s * p2;
                const double b2 = 1.0 + slope * slope;
                return (q11 * c * c + q12 * c * s + q22 * s * s) / (b2 * std::sqrt(b2));
            };
            double subtract = 0.0;
            for (int a = -block; a <= block; ++a)
                for (int b = -block; b <= block; ++b) {
                    const int i = i0 - a, j = j0 - b;
                    if ((a == 0 && b == 0) || i < 0 || j < 0 || i >= n || j >= n) continue;
                    const double r = std::hypot(a * dx, b * dx);
                    subtract += angular(a * dx / r, b * dx / r) / r;
                }
            double polar = 0.0;
            for (std::size_t k = 0; k < theta.size(); ++k) {
                const double c = std::cos(theta[k]), s = std::sin(theta[k]);
                polar += theta_w[k] * angular(c, s) * block_half / std::max(std::fabs(c), std::fabs(s));
            }
            acc += polar - cell * subtract;
        }

        // Exterior of the cell-union box: data held at c_far.
        const double x1 = grid.coord(i0), x2 = grid.coord(j0);
        const double lo1 = x1 - box_hi, hi1 = x1 - box_lo;
        const double lo2 = x2 - box_hi, hi2 = x2 - box_lo;
        const double diff = fp - c_far;
        const std::array<Quadrant, 4> quads{{{hi1, hi2}, {-lo1, hi2}, {hi1, -lo2}, {-lo1, -lo2}}};
        acc += exterior_increment_part(diff, quads);
        acc -= p1 * rectangle_moment(lo1, hi1, lo2, hi2, diff) + p2 * rectangle_moment(lo2, hi2, lo1, hi1, diff);
        out[node] = acc;
    });
    return {grid, std::move(out), f.support_radius};
}

}  // namespace

SampledProfile muskat_rhs_nd(const SampledProfile& f, const QuadratureConfig& quad)
{
    switch (f.grid.dimension()) {
    case 1: return muskat_rhs_1d(f, quad);
    case 2: return muskat_rhs_2d(f, quad);
    default:
        throw UnsupportedDimensionError(
            fmt::format("muskat_rhs_nd: dimension {} is not supported (d = 1, 2)", f.grid.dimension()));
    }
}

}  // namespace muskat
