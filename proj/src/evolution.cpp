#include "muskat/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>

#include <fmt/format.h>
#include <json.hpp>

#include "muskat/slope_analysis.hpp"

namespace muskat {

bool FrameDiagnostics::finite() const
{
    return std::isfinite(f_sup) && std::isfinite(fx_sup) && std::isfinite(fxx_sup) && std::isfinite(rhs_sup) &&
           (!beta || std::isfinite(*beta));
}

namespace {

double gradient_sup(const SampledProfile& f, const SampledProfile& f1)
{
    if (f.grid.dimension() == 1) return sup_norm(f1.values);
    const SampledProfile f2 = differentiate(f, 1);
    double m = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) m = std::max(m, std::hypot(f1[k], f2[k]));
    return m;
}

double hessian_sup(const SampledProfile& f, const SampledProfile& f1)
{
    double m = sup_norm(differentiate(f1, 0).values);
    if (f.grid.dimension() == 2) {
        const SampledProfile f2 = differentiate(f, 1);
        m = std::max({m, sup_norm(differentiate(f1, 1).values), sup_norm(differentiate(f2, 1).values)});
    }
    return m;
}

bool all_finite(const SampledProfile& f)
{
    return std::all_of(f.values.begin(), f.values.end(), [](double v) { return std::isfinite(v); });
}

SampledProfile axpy(const SampledProfile& f, double a, const SampledProfile& x)
{
    SampledProfile out = f;
    for (std::size_t k = 0; k < out.size(); ++k) out.values[k] += a * x[k];
    return out;
}

}  // namespace

TrajectoryFrame make_frame(double t, SampledProfile f, const DiagnosticsConfig& cfg)
{
    SampledProfile fx = differentiate(f, 0);
    SampledProfile rhs = muskat_rhs_nd(f, cfg.quad);
    TrajectoryFrame fr{t, std::move(f), std::move(fx), std::move(rhs), {}};
    auto& d = fr.diagnostics;
    d.f_sup = sup_norm(fr.f.values);
    d.fx_sup = gradient_sup(fr.f, fr.fx);
    d.fxx_sup = hessian_sup(fr.f, fr.fx);
    d.rhs_sup = sup_norm(fr.rhs.values);
    if (fr.f.grid.dimension() == 1 && cfg.sigma > 0.0) d.beta = beta_sigma(fr.fx, cfg.sigma).value;
    return fr;
}

double nominal_dt(const GridSpec& grid, const StepControl& ctl)
{
    if (!(ctl.cfl > 0.0) || !(ctl.dt_min > 0.0) || !(ctl.dt_max >= ctl.dt_min) || !(ctl.jump_tolerance > 0.0))
        throw ConfigError("step control needs cfl > 0, 0 < dt_min <= dt_max and jump_tolerance > 0");
    const double dt = std::min(ctl.cfl * grid.dx(), ctl.dt_max);
    if (dt < ctl.dt_min)
        throw ConfigError(fmt::format("cfl * dx = {} is below dt_min = {}", ctl.cfl * grid.dx(), ctl.dt_min));
    return dt;
}

TrajectoryFrame step(const TrajectoryFrame& frame, const StepControl& ctl, const DiagnosticsConfig& cfg,
                     double dt_cap)
{
    if (!frame.diagnostics.finite() || !all_finite(frame.f))
        throw PreconditionError(fmt::format("frame at t = {} has non-finite diagnostics", frame.t));
    // A cap below dt_min only shortens the final step onto T.
    double dt = std::min(nominal_dt(frame.f.grid, ctl), dt_cap);
    const double floor = std::min(ctl.dt_min, dt);
    const double slope0 = frame.diagnostics.fx_sup;
    for (;;) {
        const SampledProfile predictor = axpy(frame.f, dt, frame.rhs);
        if (all_finite(predictor)) {
            const SampledProfile k2 = muskat_rhs_nd(predictor, cfg.quad);
            SampledProfile next = axpy(frame.f, 0.5 * dt, frame.rhs);
            for (std::size_t k = 0; k < next.size(); ++k) next.values[k] += 0.5 * dt * k2[k];
            if (all_finite(next)) {
                const double slope = gradient_sup(next, differentiate(next, 0));
                if (slope <= (1.0 + ctl.jump_tolerance) * slope0 + 1e-12)
                    return make_frame(frame.t + dt, std::move(next), cfg);
            }
        }
        if (dt * 0.5 < floor)
            throw StiffnessError(fmt::format("step size fell below dt_min = {} at t = {}", ctl.dt_min, frame.t),
                                 Trajectory{frame});
        dt *= 0.5;
    }
}

Trajectory simulate(const SampledProfile& f0, double T, const StepControl& ctl, int record_every,
                    const DiagnosticsConfig& cfg)
{
    if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError(fmt::format("final time T = {} must be >= 0", T));
    if (record_every < 1) throw ConfigError("record_every must be >= 1");
    nominal_dt(f0.grid, ctl);
    if (!all_finite(f0)) throw InputError("initial data are not finite");

    Trajectory traj{make_frame(0.0, f0, cfg)};
    TrajectoryFrame current = traj.front();
    long steps = 0;
    while (current.t < T) {
        std::optional<TrajectoryFrame> stepped;
        try {
            stepped = step(current, ctl, cfg, T - current.t);
        } catch (const EvolutionError& e) {
            if (traj.back().t != current.t) traj.push_back(current);
            throw StiffnessError(e.what(), std::move(traj));
        }
        TrajectoryFrame& next = *stepped;
        if (!next.diagnostics.finite()) {
            if (traj.back().t != current.t) traj.push_back(current);
            throw NonFiniteError(fmt::format("non-finite diagnostics at t = {}", next.t), std::move(traj));
        }
        // Snap onto T when the remainder is below rounding.
        if (T - next.t <= 1e-12 * std::max(1.0, T)) next.t = T;
        current = std::move(next);
        if (++steps % record_every == 0 || current.t >= T) traj.push_back(current);
    }
    return traj;
}

BoundFit check_gronwall(const SampledProfile& f0_a, const SampledProfile& f0_b, double T, const StepControl& ctl,
                        int record_every, const DiagnosticsConfig& cfg, std::optional<double> reference)
{
    if (!(f0_a.grid == f0_b.grid)) throw InputError("check_gronwall: data live on different grids");
    const double d0 = sup_norm_diff(f0_a.values, f0_b.values);
    if (d0 > 1e-2) throw PreconditionError(fmt::format("check_gronwall: initial distance {} exceeds 1e-2", d0));
    const Trajectory a = simulate(f0_a, T, ctl, record_every, cfg);
    const Trajectory b = d0 == 0.0 ? a : simulate(f0_b, T, ctl, record_every, cfg);
    BoundFit fit = gronwall_fit(a, b, reference);

    const int d = f0_a.grid.dimension();
    double lipschitz = 0.0, rho0 = std::numeric_limits<double>::infinity();
    for (const SampledProfile* f : {&f0_a, &f0_b}) {
        std::vector<SampledProfile> grad;
        for (int axis = 0; axis < d; ++axis) grad.push_back(differentiate(*f, axis));
        lipschitz = std::max(lipschitz, gradient_sup(*f, grad.front()));
        rho0 = std::min(rho0, continuity_radius_field(grad, 2.0 / (d + 1)));
    }
    if (rho0 > 0.0) fit.rate_scale = (1.0 + lipschitz) / rho0;
    return fit;
}

void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj)
{
    std::filesystem::create_directories(dir);
    nlohmann::json index = nlohmann::json::array();
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const auto& fr = traj[k];
        const std::string file = fmt::format("frame_{:06d}.csv", k);
        write_profile_csv(dir / file, fr.f);
        const auto& d = fr.diagnostics;
        nlohmann::json diag{{"f_sup", d.f_sup},
                            {"fx_sup", d.fx_sup},
                            {"fxx_sup", d.fxx_sup},
                            {"rhs_sup", d.rhs_sup},
                            {"beta_sigma", d.beta ? nlohmann::json(*d.beta) : nlohmann::json(nullptr)}};
        index.push_back({{"t", fr.t}, {"file", file}, {"diagnostics", diag}});
    }
    std::ofstream out(dir / "trajectory.json");
    if (!out) throw InputError(fmt::format("cannot write {}", (dir / "trajectory.json").string()));
    out << index.dump(2) << '\n';
}

}  // namespace muskat
