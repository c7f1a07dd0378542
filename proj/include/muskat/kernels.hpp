#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "muskat/grid.hpp"

namespace muskat {

enum class OriginPatch { limit, skip };

struct QuadratureConfig {
    double outer_radius_factor = 8.0;
    int k_integral_points = 200;
    OriginPatch origin_patch = OriginPatch::limit;
    // Half-width in cells of the 2-D block around alpha = 0 where the leading
    // singular term is subtracted and integrated in polar form.
    int origin_block = 4;
};

inline double bracket(double a) { return std::sqrt(a * a + 1.0); }

// Time derivative of the height for the graph equation with unit constants.
SampledProfile muskat_rhs_1d(const SampledProfile& f, const QuadratureConfig& quad = {});
// Dimension-dispatching variant; d = 1 forwards to muskat_rhs_1d.
SampledProfile muskat_rhs_nd(const SampledProfile& f, const QuadratureConfig& quad = {});

// Pointwise slope-equation kernel 2(f_x D + 1)/<D>^4 as a function of the slope quotient D.
inline double slope_kernel(double fx, double quotient)
{
    const double b2 = 1.0 + quotient * quotient;
    return 2.0 * (fx * quotient + 1.0) / (b2 * b2);
}

// Off-grid evaluation of a 1-D height profile around one node: f(x - h) and the
// signed quotient (f(x) - f(x - h))/h for arbitrary h. Beyond the grid the edge
// values are held constant.
class NodeInterpolant {
public:
    NodeInterpolant(const SampledProfile& f, int node);

    double value_at_offset(double h) const;
    double quotient(double h) const;
    double fx() const { return d1_; }
    double fxx() const { return d2_; }
    double fxxx() const { return d3_; }
    double center_value() const { return f0_; }
    double left_far() const { return c_left_; }
    double right_far() const { return c_right_; }
    // Distance from the node to the left/right edge of the data.
    double left_reach() const { return left_reach_; }
    double right_reach() const { return right_reach_; }

private:
    const SampledProfile* f_;
    double dx_, x0_;
    double f0_, d1_, d2_, d3_;
    double c_left_, c_right_;
    double left_reach_, right_reach_;
};

double kernel_k(const SampledProfile& f, int node, double h);

struct KernelPair {
    double k1;
    double k2;
    double total() const { return k1 + k2; }
};

// Cumulative tables of int_a^inf k(x, +-s)/s^3 ds for one node, built once and
// queried for arbitrary offsets.
class KernelSplit {
public:
    KernelSplit(const SampledProfile& f, int node, double sigma, const QuadratureConfig& quad = {});

    KernelPair split(double alpha) const;
    double full(double alpha) const;
    double sigma() const { return sigma_; }
    const NodeInterpolant& local() const { return local_; }

private:
    struct Side {
        std::vector<double> breaks;     // ascending, breaks.back() is the data edge
        std::vector<double> cumulative; // int_{breaks[m]}^inf
        int sign;
    };

    double kernel_on(const Side& side, double s) const;
    double segment(const Side& side, double a, double b) const;
    double tail_from(const Side& side, double a) const;
    double far_tail(const Side& side, double s0) const;
    void build(Side& side, double reach, int count);

    NodeInterpolant local_;
    double sigma_;
    double s_min_;
    Side plus_, minus_;
};

KernelPair kernel_K1_K2(const SampledProfile& f, int node, double alpha, double sigma,
                        const QuadratureConfig& quad = {});

// int_{h0}^inf k/h^3 dh for constant far data at height difference D from the node.
double kernel_far_tail(double fx, double diff, double h0);

// Right-hand side of the slope equation, evaluated through the kernel split.
SampledProfile fx_rhs(const SampledProfile& f, double sigma, const QuadratureConfig& quad = {});
// The same at a single node.
double fx_rhs_at(const SampledProfile& f, int node, double sigma, const QuadratureConfig& quad = {});

struct IdentitySides {
    double lhs;
    double rhs;
    double residual() const { return std::fabs(lhs - rhs); }
};

IdentitySides pv_identity_sides(const SampledProfile& f, int node, double sigma, const QuadratureConfig& quad = {});
double pv_identity_residual(const SampledProfile& f, int node, double sigma, const QuadratureConfig& quad = {});

struct KernelBracket {
    double lower;     // eps0 (a^-2 - sigma^-2) / (2 (1 + L^2)^2) inside the window
    double upper;     // (1 + L) / a^2
    double k2_limit;  // 2 (1 + L) / max(a, sigma)^2
};

KernelBracket kernel_bracket(double alpha, double sigma, double lipschitz, double eps0);

}  // namespace muskat
