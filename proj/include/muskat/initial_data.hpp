#pragma once

#include <vector>

#include "muskat/grid.hpp"

namespace muskat {

struct SlopeEnvelope {
    double lo;
    double hi;
};

// Slope data on intervals I_k = (a_k, a_{k+1}) with one envelope per interval.
struct IntervalSlopeSpec {
    std::vector<double> breakpoints;
    std::vector<SlopeEnvelope> envelopes;
    double junction_band = 0.25;  // half-width mu_1 of the zero band at a sign-changing junction
    double eps0 = 0.25;
    double transition = 0.5;      // length of a ramp between rest and plateau values
};

struct IntervalSlopeData {
    SampledProfile slope;
    double sigma;                 // window scale the beta bound is certified at
    double beta;                  // measured beta_sigma of the slope
    double junction_oscillation;  // max over junction bands of |g - g * phi| at 4 dx
};

IntervalSlopeData gen_interval_slope(const IntervalSlopeSpec& spec, const GridSpec& grid);

// sin(x^2) times a smooth cutoff equal to 1 on |x| <= window/2 and 0 beyond window.
SampledProfile gen_sinx2(const GridSpec& grid, double window);

// Slope (g chi(eps x)) * phi_eps of a compactly supported approximant.
SampledProfile gen_compact_approximant(const SampledProfile& slope, double eps);

// Smooth base (plane plus Gaussian bump) with a plane-wave ripple whose gradient amplitude is ripple_amplitude.
struct NdDataSpec {
    int dim = 2;
    std::vector<double> plane_gradient;
    double bump_amplitude = 0.0;
    double bump_width = 1.0;
    double c_d = 0.08;
    double ripple_amplitude = 0.0;
    double ripple_wavenumber = 16.0;
    double eta = 0.5;
};

struct NdData {
    SampledProfile f;
    double deviation;  // interior sup of |grad f - (grad f) * phi_eta|
    double eta;
};

NdData gen_nd_small_deviation(const NdDataSpec& spec, const GridSpec& grid);

// Interior sup of |grad f - (grad f) * phi_eta|, skipping nodes within the mollifier reach of the edges.
double gradient_deviation(const SampledProfile& f, double eta);

}  // namespace muskat
