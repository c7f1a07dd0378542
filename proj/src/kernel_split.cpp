#include <algorithm>
#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "gauss.hpp"
#include "muskat/errors.hpp"
#include "muskat/kernels.hpp"
#include "muskat/parallel.hpp"

namespace muskat {

NodeInterpolant::NodeInterpolant(const SampledProfile& f, int node) : f_(&f)
{
    if (f.grid.dimension() != 1) throw UnsupportedDimensionError("kernel evaluation is one-dimensional");
    dx_ = f.grid.dx();
    x0_ = f.grid.coord(node);
    auto v = [&](int k) { return f.clamped(node + k); };
    f0_ = v(0);
    d1_ = (v(-2) - 8.0 * v(-1) + 8.0 * v(1) - v(2)) / (12.0 * dx_);
    d2_ = (-v(2) + 16.0 * v(1) - 30.0 * v(0) + 16.0 * v(-1) - v(-2)) / (12.0 * dx_ * dx_);
    d3_ = (-v(3) + 8.0 * v(2) - 13.0 * v(1) + 13.0 * v(-1) - 8.0 * v(-2) + v(-3)) / (8.0 * dx_ * dx_ * dx_);
    c_left_ = f[0];
    c_right_ = f[f.size() - 1];
    left_reach_ = x0_ - f.grid.coord(0);
    right_reach_ = f.grid.coord(f.grid.nodes() - 1) - x0_;
}

double NodeInterpolant::value_at_offset(double h) const
{
    const double u = (x0_ - h - f_->grid.coord(0)) / dx_;
    const double last = f_->grid.nodes() - 1;
    if (u <= 0.0) return c_left_;
    if (u >= last) return c_right_;
    const long b = static_cast<long>(std::floor(u));
    const double t = u - b;
    if (t == 0.0) return (*f_)[static_cast<std::size_t>(b)];
    // Six-point Lagrange stencil on nodes b-2 .. b+3.
    double acc = 0.0;
    for (int m = -2; m <= 3; ++m) {
        double w = 1.0;
        for (int q = -2; q <= 3; ++q)
            if (q != m) w *= (t - q) / static_cast<double>(m - q);
        acc += w * f_->clamped(b + m);
    }
    return acc;
}

double NodeInterpolant::quotient(double h) const
{
    if (std::fabs(h) < dx_) return d1_ - 0.5 * h * d2_ + h * h * d3_ / 6.0;
    return (f0_ - value_at_offset(h)) / h;
}

double kernel_k(const SampledProfile& f, int node, double h)
{
    if (h == 0.0) throw UndefinedOffsetError("kernel_k: offset h = 0");
    const NodeInterpolant local(f, node);
    return slope_kernel(local.fx(), local.quotient(h));
}

double kernel_far_tail(double fx, double diff, double h0)
{
    const double u = diff / h0;
    if (std::fabs(u) < 1e-2) {
        const double u2 = u * u;
        // Series of the closed form below, divided through by D^2.
        return (1.0 + fx * (2.0 / 3.0) * u - u2 - fx * 0.8 * u2 * u + u2 * u2) / (h0 * h0);
    }
    const double b = 1.0 + u * u;
    return (fx * (std::atan(u) - u / b) + u * u / b) / (diff * diff);
}

namespace {

// int_A^inf of kernel_far_tail(fx, D, a) da.
double far_tail_integral(double fx, double diff, double a_out)
{
    const double u = diff / a_out;
    if (std::fabs(u) < 1e-2) {
        const double u2 = u * u;
        return (1.0 + fx * u / 3.0 - u2 / 3.0 - fx * 0.2 * u2 * u) / a_out;
    }
    const double at = std::atan(u);
    return (fx * (1.0 - at / u) + at) / diff;
}

// int_A^inf (D/a - fx) k(D/a) da / a^2 for one side held at constant data.
double quotient_far_tail(double fx, double diff, double a_out)
{
    const double u = diff / a_out;
    if (std::fabs(u) < 1e-2) {
        const double q = 1.0 / a_out;
        return 2.0 * (-fx * q + (1.0 - fx * fx) * diff * q * q / 2.0 + fx * diff * diff * q * q * q +
                      (fx * fx - 1.0) * diff * diff * diff * q * q * q * q / 2.0);
    }
    const double b = 1.0 + u * u;
    const double at = std::atan(u);
    const double i0 = 0.5 * (u / b + at);
    const double i1 = 0.5 * u * u / b;
    const double i2 = 0.5 * (at - u / b);
    return 2.0 * (fx * i2 + (1.0 - fx * fx) * i1 - fx * i0) / diff;
}

long outer_reach(const SampledProfile& f, const QuadratureConfig& quad)
{
    if (!(quad.outer_radius_factor >= 4.0))
        throw ConfigError(
            fmt::format("quadrature.outer_radius_factor = {} must be >= 4", quad.outer_radius_factor));
    return std::lround(quad.outer_radius_factor * f.grid.half_width() / f.grid.dx());
}

void require_split_radius(const SampledProfile& f, double sigma)
{
    if (!(sigma > 2.0 * f.grid.dx()))
        throw UnresolvableError(fmt::format("split radius {} must exceed 2*dx = {}", sigma, 2.0 * f.grid.dx()));
}

}  // namespace

KernelSplit::KernelSplit(const SampledProfile& f, int node, double sigma, const QuadratureConfig& quad)
    : local_(f, node), sigma_(sigma), s_min_(f.grid.dx() / 16.0)
{
    require_split_radius(f, sigma);
    if (quad.k_integral_points < 8) throw ConfigError("quadrature.k_integral_points must be >= 8");
    plus_.sign = 1;
    minus_.sign = -1;
    build(plus_, local_.left_reach(), quad.k_integral_points);
    build(minus_, local_.right_reach(), quad.k_integral_points);
}

double KernelSplit::kernel_on(const Side& side, double s) const
{
    return slope_kernel(local_.fx(), local_.quotient(side.sign > 0 ? s : -s));
}

double KernelSplit::segment(const Side& side, double a, double b) const
{
    if (b <= a) return 0.0;
    const double la = std::log(a), lb = std::log(b);
    const int pieces = std::max(1, static_cast<int>(std::ceil((lb - la) / 0.1)));
    const double w = (lb - la) / pieces;
    double acc = 0.0;
    for (int p = 0; p < pieces; ++p) {
        const double mid = la + (p + 0.5) * w;
        for (std::size_t k = 0; k < detail::kGaussX.size(); ++k) {
            const double s = std::exp(mid + 0.5 * w * detail::kGaussX[k]);
            acc += detail::kGaussW[k] * kernel_on(side, s) / (s * s);
        }
    }
    return 0.5 * w * acc;
}

double KernelSplit::far_tail(const Side& side, double s0) const
{
    const double diff = side.sign > 0 ? local_.center_value() - local_.left_far()
                                      : local_.right_far() - local_.center_value();
    return kernel_far_tail(local_.fx(), diff, s0);
}

void KernelSplit::build(Side& side, double reach, int count)
{
    side.breaks.clear();
    side.cumulative.clear();
    if (reach <= 2.0 * s_min_) return;
    const double la = std::log(s_min_), lb = std::log(reach);
    for (int m = 0; m < count; ++m) side.breaks.push_back(std::exp(la + (lb - la) * m / (count - 1)));
    side.breaks.back() = reach;
    side.cumulative.assign(side.breaks.size(), 0.0);
    side.cumulative.back() = far_tail(side, reach);
    for (int m = count - 2; m >= 0; --m)
        side.cumulative[m] = side.cumulative[m + 1] + segment(side, side.breaks[m], side.breaks[m + 1]);
}

double KernelSplit::tail_from(const Side& side, double a) const
{
    if (side.breaks.empty() || a >= side.breaks.back()) return far_tail(side, a);
    if (a <= side.breaks.front()) return side.cumulative.front() + segment(side, a, side.breaks.front());
    const auto it = std::upper_bound(side.breaks.begin(), side.breaks.end(), a);
    const auto m = static_cast<std::size_t>(it - side.breaks.begin());
    return side.cumulative[m] + segment(side, a, side.breaks[m]);
}

KernelPair KernelSplit::split(double alpha) const
{
    if (alpha == 0.0) throw UndefinedOffsetError("kernel split at alpha = 0");
    const Side& side = alpha > 0 ? plus_ : minus_;
    const double a = std::fabs(alpha);
    if (a >= sigma_) return {0.0, tail_from(side, a)};
    const double outer = tail_from(side, sigma_);
    return {tail_from(side, a) - outer, outer};
}

double KernelSplit::full(double alpha) const
{
    if (alpha == 0.0) throw UndefinedOffsetError("kernel split at alpha = 0");
    return tail_from(alpha > 0 ? plus_ : minus_, std::fabs(alpha));
}

KernelPair kernel_K1_K2(const SampledProfile& f, int node, double alpha, double sigma, const QuadratureConfig& quad)
{
    if (alpha == 0.0) throw UndefinedOffsetError("kernel_K1_K2: alpha = 0");
    return KernelSplit(f, node, sigma, quad).split(alpha);
}

KernelBracket kernel_bracket(double alpha, double sigma, double lipschitz, double eps0)
{
    const double a = std::fabs(alpha);
    const double l2 = 1.0 + lipschitz * lipschitz;
    const double lower = a <= sigma ? eps0 * (1.0 / (a * a) - 1.0 / (sigma * sigma)) / (2.0 * l2 * l2) : 0.0;
    const double big = std::max(a, sigma);
    return {lower, (1.0 + lipschitz) / (a * a), 2.0 * (1.0 + lipschitz) / (big * big)};
}

namespace {

// Slope at node k; the data are constant beyond the grid.
double far_slope(const SampledProfile& fx, long k)
{
    return k < 0 || k >= static_cast<long>(fx.size()) ? 0.0 : fx[static_cast<std::size_t>(k)];
}

struct SlopeTerms {
    double drift;      // f_xx PV int <D>^-2 da/a
    double diffusion;  // -int delta f_x K da
};

SlopeTerms slope_terms(const SampledProfile& f, const SampledProfile& fx, int node, double sigma,
                       const QuadratureConfig& quad)
{
    const KernelSplit split(f, node, sigma, quad);
    const NodeInterpolant& loc = split.local();
    const long reach = outer_reach(f, quad);
    const double dx = f.grid.dx();
    const double a_out = reach * dx;
    const double f0 = loc.center_value();
    const double g = fx[static_cast<std::size_t>(node)];
    const double gxx = loc.fxx();
    const SampledProfile& fxv = fx;

    double drift = 0.0, diffusion = 0.0;
    for (long j = 1; j <= reach; ++j) {
        const double a = j * dx;
        const double wj = j == reach ? 0.5 : 1.0;
        const double qp = (f0 - f.clamped(node - j)) / a;
        const double qm = (f.clamped(node + j) - f0) / a;
        drift += wj * (1.0 / (1.0 + qp * qp) - 1.0 / (1.0 + qm * qm)) / a;
        const double dp = g - far_slope(fxv, node - j);
        const double dm = g - far_slope(fxv, node + j);
        diffusion += wj * (dp * split.full(a) + dm * split.full(-a));
    }
    const double b = 1.0 + g * g;
    const double k0 = 2.0 / b;
    const double k1 = 3.0 * g * gxx / (b * b);
    drift += 0.5 * (2.0 * g * gxx / (b * b));
    diffusion += 0.5 * (2.0 * gxx * k1 - loc.fxxx() * k0 / 2.0);
    drift *= dx;
    diffusion *= dx;

    const double dl = f0 - loc.left_far();
    const double dr = f0 - loc.right_far();
    drift += 0.5 * std::log((a_out * a_out + dr * dr) / (a_out * a_out + dl * dl));
    diffusion += g * (far_tail_integral(g, dl, a_out) + far_tail_integral(g, -dr, a_out));
    return {gxx * drift, -diffusion};
}

}  // namespace

double fx_rhs_at(const SampledProfile& f, int node, double sigma, const QuadratureConfig& quad)
{
    require_split_radius(f, sigma);
    const SampledProfile fx = differentiate(f);
    const SlopeTerms t = slope_terms(f, fx, node, sigma, quad);
    return t.drift + t.diffusion;
}

SampledProfile fx_rhs(const SampledProfile& f, double sigma, const QuadratureConfig& quad)
{
    if (f.grid.dimension() != 1) throw UnsupportedDimensionError("fx_rhs is one-dimensional");
    require_split_radius(f, sigma);
    const SampledProfile fx = differentiate(f);
    std::vector<double> out(f.size());
    parallel_for(f.size(), [&](std::size_t k) {
        const SlopeTerms t = slope_terms(f, fx, static_cast<int>(k), sigma, quad);
        out[k] = t.drift + t.diffusion;
    });
    return {f.grid, std::move(out), f.support_radius};
}

IdentitySides pv_identity_sides(const SampledProfile& f, int node, double sigma, const QuadratureConfig& quad)
{
    require_split_radius(f, sigma);
    const SampledProfile fx = differentiate(f);
    const SlopeTerms t = slope_terms(f, fx, node, sigma, quad);

    const long reach = outer_reach(f, quad);
    const double dx = f.grid.dx();
    const double a_out = reach * dx;
    const NodeInterpolant loc(f, node);
    const double f0 = loc.center_value();
    const double g = fx[static_cast<std::size_t>(node)];
    double lhs = 0.0;
    for (long j = 1; j <= reach; ++j) {
        const double a = j * dx;
        const double wj = j == reach ? 0.5 : 1.0;
        const double qp = (f0 - f.clamped(node - j)) / a;
        const double qm = (f.clamped(node + j) - f0) / a;
        lhs += wj * ((qp - g) * slope_kernel(g, qp) + (qm - g) * slope_kernel(g, qm)) / (a * a);
    }
    const double b = 1.0 + g * g;
    const double k0 = 2.0 / b;
    const double k1 = 3.0 * g * loc.fxx() / (b * b);
    lhs += 0.5 * (loc.fxxx() * k0 / 3.0 - loc.fxx() * k1);
    lhs *= dx;
    lhs += quotient_far_tail(g, f0 - loc.left_far(), a_out) + quotient_far_tail(g, loc.right_far() - f0, a_out);
    return {lhs, t.diffusion};
}

double pv_identity_residual(const SampledProfile& f, int node, double sigma, const QuadratureConfig& quad)
{
    return pv_identity_sides(f, node, sigma, quad).residual();
}

}  // namespace muskat
