#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace muskat {

// Uniform tensor grid on [-X, X]^d: N intervals per axis, nodes x_i = -X + i*dx for i = 0..N.
class GridSpec {
public:
    GridSpec(int dimension, double half_width, int points_per_axis);

    int dimension() const { return dim_; }
    double half_width() const { return half_width_; }
    int points() const { return n_; }
    int nodes() const { return n_ + 1; }
    double dx() const { return 2.0 * half_width_ / n_; }
    std::size_t size() const;
    double coord(int i) const { return -half_width_ + i * dx(); }
    int center_index() const { return n_ / 2; }

    bool operator==(const GridSpec&) const = default;

private:
    int dim_;
    double half_width_;
    int n_;
};

// Node values on a grid. In 2-D the layout is row-major with index i*N + j,
// i running along x1.
struct SampledProfile {
    GridSpec grid;
    std::vector<double> values;
    double support_radius;

    SampledProfile(GridSpec g, std::vector<double> v, double radius);

    double operator[](std::size_t k) const { return values[k]; }
    double& operator[](std::size_t k) { return values[k]; }
    std::size_t size() const { return values.size(); }
    std::span<const double> view() const { return values; }

    // 1-D access with indices clamped to the edge nodes.
    double clamped(long i) const;
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.nodes() + j]; }
};

SampledProfile sample_1d(const GridSpec& grid, double support_radius, auto&& fn)
{
    std::vector<double> v(grid.size());
    for (int i = 0; i < grid.nodes(); ++i) v[i] = fn(grid.coord(i));
    return SampledProfile{grid, std::move(v), support_radius};
}

SampledProfile sample_2d(const GridSpec& grid, double support_radius, auto&& fn)
{
    const int n = grid.nodes();
    std::vector<double> v(grid.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(i) * n + j] = fn(grid.coord(i), grid.coord(j));
    return SampledProfile{grid, std::move(v), support_radius};
}

// Standard cutoff: chi = 1 on [-1,1], 0 outside [-2,2].
struct CutoffSpec {
    double sigma;
    double center;
};

double chi(double s);
double chi_prime(double s);
double chi_second(double s);
inline double chi_window(const CutoffSpec& c, double x) { return chi((x - c.center) / c.sigma); }

// Unnormalized bump exp(-1/(1-r^2)) on r < 1.
double bump(double r);

SampledProfile mollify(const SampledProfile& g, double eps);
SampledProfile differentiate(const SampledProfile& f, int axis = 0);
SampledProfile cutoff_window(const CutoffSpec& c, const SampledProfile& g);

double sup_norm(std::span<const double> v);
double sup_norm_diff(std::span<const double> a, std::span<const double> b);

// Sum of slope*dx over the grid, i.e. the height change implied by a slope profile.
double telescoped_height(const SampledProfile& slope);
// Height profile with f(x_0) = base whose centered differences reproduce the slope.
SampledProfile integrate_slope(const SampledProfile& slope, double base = 0.0);

void write_profile_csv(const std::filesystem::path& path, const SampledProfile& p);
SampledProfile read_profile_csv(const std::filesystem::path& path);

}  // namespace muskat
