#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "muskat/errors.hpp"
#include "muskat/evolution.hpp"
#include "muskat/grid.hpp"

using namespace muskat;

namespace {

constexpr double kPi = std::numbers::pi;

SampledProfile gaussian(const GridSpec& grid, double amp, double width, double shift = 0.0)
{
    return sample_1d(grid, grid.half_width(),
                     [=](double x) { return amp * std::exp(-(x - shift) * (x - shift) / (width * width)); });
}

// Coarse values against every other node of the fine profile.
double coarse_fine_gap(const SampledProfile& coarse, const SampledProfile& fine)
{
    double gap = 0.0;
    for (int i = 0; i < coarse.grid.nodes(); ++i) gap = std::max(gap, std::fabs(coarse[i] - fine[2 * i]));
    return gap;
}

}  // namespace

TEST_CASE("zero data give an identical frame one step later")
{
    const GridSpec grid(1, 8.0, 128);
    const StepControl ctl;
    const DiagnosticsConfig cfg;
    const auto zero = make_frame(0.0, sample_1d(grid, 8.0, [](double) { return 0.0; }), cfg);
    const auto next = step(zero, ctl, cfg);
    CHECK(next.t == nominal_dt(grid, ctl));
    CHECK(next.f.values == zero.f.values);
}

TEST_CASE("odd linear data keep the center value to 1e-12")
{
    // Held edge values make the line a ramp, so only the symmetric center is stationary.
    const GridSpec grid(1, 8.0, 256);
    const DiagnosticsConfig cfg;
    auto frame = make_frame(0.0, sample_1d(grid, 8.0, [](double x) { return 0.4 * x; }), cfg);
    for (int k = 0; k < 4; ++k) frame = step(frame, StepControl{}, cfg);
    CHECK(std::fabs(frame.f[grid.center_index()]) <= 1e-12);
}

TEST_CASE("small cosine decays like the linearized flow")
{
    const double k = 1.0, eps = 1e-4;
    const GridSpec grid(1, 16.0 * kPi, 2048);
    const auto f0 = sample_1d(grid, grid.half_width(), [&](double x) { return eps * std::cos(k * x); });
    const double tau = 0.1 / (kPi * k);
    const auto traj = simulate(f0, tau, StepControl{}, 1000, DiagnosticsConfig{});
    REQUIRE(traj.back().t == doctest::Approx(tau).epsilon(1e-12));
    const double amplitude = traj.back().f[grid.center_index()];
    CHECK(amplitude == doctest::Approx(eps * std::exp(-kPi * k * tau)).epsilon(0.02));
}

TEST_CASE("sup norm decreases along bump trajectories")
{
    const GridSpec grid(1, 8.0, 256);
    const SampledProfile bumps[] = {
        gaussian(grid, 1.0, 1.0),
        gaussian(grid, 0.5, 0.5, 1.0),
        sample_1d(grid, 8.0, [](double x) { return 2.0 * bump(x / 3.0); }),
    };
    for (const auto& f0 : bumps) {
        const auto traj = simulate(f0, 0.2, StepControl{}, 2, DiagnosticsConfig{});
        REQUIRE(traj.size() >= 5);
        for (std::size_t k = 1; k < traj.size(); ++k) {
            CHECK(traj[k].t > traj[k - 1].t);
            CHECK(traj[k].diagnostics.f_sup < traj[k - 1].diagnostics.f_sup);
            CHECK(traj[k].diagnostics.finite());
        }
    }
}

TEST_CASE("simulation is bit-for-bit deterministic")
{
    const GridSpec grid(1, 8.0, 256);
    const auto f0 = gaussian(grid, 1.0, 0.7);
    const auto a = simulate(f0, 0.1, StepControl{}, 3, DiagnosticsConfig{});
    const auto b = simulate(f0, 0.1, StepControl{}, 3, DiagnosticsConfig{});
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a[k].t == b[k].t);
        CHECK(a[k].f.values == b[k].f.values);
    }
}

TEST_CASE("self-convergence of order at least one")
{
    const double T = 0.05;
    auto run = [&](auto&& profile, int n) {
        const GridSpec grid(1, 8.0, n);
        return simulate(profile(grid), T, StepControl{}, 1000, DiagnosticsConfig{}).back().f;
    };
    const auto data = {
        +[](const GridSpec& g) { return gaussian(g, 1.0, 1.0); },
        +[](const GridSpec& g) { return gaussian(g, 0.8, 0.6, 0.5); },
        +[](const GridSpec& g) { return sample_1d(g, 8.0, [](double x) { return std::sin(x) * bump(x / 4.0); }); },
    };
    for (auto profile : data) {
        const auto f1 = run(profile, 512), f2 = run(profile, 1024), f4 = run(profile, 2048);
        const double e1 = coarse_fine_gap(f1, f2);
        const double e2 = coarse_fine_gap(f2, f4);
        CHECK(e2 < e1);
        CHECK(std::log2(e1 / e2) >= 1.0);
    }
}

TEST_CASE("simulate edge cases")
{
    const GridSpec grid(1, 8.0, 128);
    const auto f0 = gaussian(grid, 1.0, 1.0);
    const auto single = simulate(f0, 0.0, StepControl{}, 1, DiagnosticsConfig{});
    REQUIRE(single.size() == 1);
    CHECK(single.front().f.values == f0.values);
    CHECK_THROWS_AS(simulate(f0, -1.0, StepControl{}, 1, DiagnosticsConfig{}), ConfigError);
    CHECK_THROWS_AS(simulate(f0, 1.0, StepControl{}, 0, DiagnosticsConfig{}), ConfigError);
    StepControl bad;
    bad.dt_min = 1.0;
    CHECK_THROWS_AS(simulate(f0, 1.0, bad, 1, DiagnosticsConfig{}), ConfigError);

    const auto traj = simulate(f0, 0.1, StepControl{}, 3, DiagnosticsConfig{});
    const double dt = nominal_dt(grid, StepControl{});
    CHECK(traj.back().t == 0.1);
    CHECK(traj.back().t - traj[traj.size() - 2].t <= 3 * dt + 1e-15);
}

TEST_CASE("an unstable step size collapses into a stiffness error with the last frame")
{
    const GridSpec grid(1, 8.0, 256);
    StepControl ctl;
    ctl.cfl = 50.0;
    ctl.dt_max = 10.0;
    ctl.dt_min = grid.dx();
    try {
        simulate(gaussian(grid, 1.0, 1.0), 1.0, ctl, 1, DiagnosticsConfig{});
        FAIL("expected a stiffness error");
    } catch (const StiffnessError& e) {
        REQUIRE_FALSE(e.frames().empty());
        CHECK(e.frames().back().t < 1.0);
        CHECK(e.frames().back().diagnostics.finite());
        CHECK(std::isfinite(e.frames().back().f[0]));
    }
}

TEST_CASE("gronwall check: identical, perturbed and translated data")
{
    const GridSpec grid(1, 8.0, 512);
    const DiagnosticsConfig cfg;
    const auto fa = gaussian(grid, 0.3, 1.0);
    const BoundFit same = check_gronwall(fa, fa, 0.1, StepControl{}, 4, cfg);
    CHECK(same.constant == 0.0);
    for (double d : same.observed) CHECK(d == 0.0);

    auto fb = fa;
    for (int i = 0; i < grid.nodes(); ++i) fb.values[i] += 1e-3 * bump(grid.coord(i) / 2.0) / bump(0.0);
    const BoundFit pert = check_gronwall(fa, fb, 0.1, StepControl{}, 4, cfg);
    CHECK(std::isfinite(pert.constant));
    CHECK(pert.verdict == Verdict::pass);
    for (std::size_t k = 0; k < pert.times.size(); ++k)
        CHECK(pert.observed[k] <= 1e-3 * std::exp(pert.constant * pert.times[k]) * (1.0 + 1e-12));
    REQUIRE(pert.rate_scale);
    CHECK(*pert.rate_scale > 0.0);

    // Translated data stay translated: f_b(t, x) = f_a(t, x - dx) up to quadrature error.
    const auto shifted = gaussian(grid, 0.3, 1.0, grid.dx());
    const auto ta = simulate(fa, 0.1, StepControl{}, 4, cfg);
    const auto tb = simulate(shifted, 0.1, StepControl{}, 4, cfg);
    REQUIRE(ta.size() == tb.size());
    for (std::size_t k = 0; k < ta.size(); ++k) {
        double gap = 0.0;
        for (int i = 1; i < grid.nodes(); ++i) gap = std::max(gap, std::fabs(tb[k].f[i] - ta[k].f[i - 1]));
        CHECK(gap <= 1e-4);
    }

    auto far = fa;
    far.values[10] += 0.1;
    CHECK_THROWS_AS(check_gronwall(fa, far, 0.1, StepControl{}, 4, cfg), PreconditionError);
}

TEST_CASE("trajectory output: csv shards and index")
{
    const GridSpec grid(1, 8.0, 64);
    const auto traj = simulate(gaussian(grid, 1.0, 1.0), 0.1, StepControl{}, 2, DiagnosticsConfig{});
    const auto dir = std::filesystem::temp_directory_path() / "muskat_traj_test";
    std::filesystem::remove_all(dir);
    write_trajectory(dir, traj);
    std::ifstream in(dir / "trajectory.json");
    const auto index = nlohmann::json::parse(in);
    REQUIRE(index.size() == traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        CHECK(index[k]["t"].get<double>() == traj[k].t);
        const auto back = read_profile_csv(dir / index[k]["file"].get<std::string>());
        CHECK(back.values == traj[k].f.values);
        CHECK(index[k]["diagnostics"]["fx_sup"].get<double>() == traj[k].diagnostics.fx_sup);
    }
    std::filesystem::remove_all(dir);
}
