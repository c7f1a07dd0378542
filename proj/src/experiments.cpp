#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "muskat/errors.hpp"
#include "muskat/experiments.hpp"
#include "muskat/modulus.hpp"

namespace muskat {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct Materialized {
    SampledProfile height;
    SampledProfile slope;
    std::optional<double> certified_sigma;
    std::optional<double> eps0;
    json info = json::object();
};

SampledProfile radial(const GridSpec& grid, auto&& fn)
{
    if (grid.dimension() == 1) return sample_1d(grid, grid.half_width(), [&](double x) { return fn(x * x); });
    if (grid.dimension() == 2)
        return sample_2d(grid, grid.half_width(), [&](double x, double y) { return fn(x * x + y * y); });
    throw UnsupportedDimensionError(fmt::format("dimension {} is not supported (d = 1, 2)", grid.dimension()));
}

SampledProfile along_first_axis(const GridSpec& grid, auto&& fn)
{
    if (grid.dimension() == 1) return sample_1d(grid, grid.half_width(), fn);
    if (grid.dimension() == 2)
        return sample_2d(grid, grid.half_width(), [&](double x, double) { return fn(x); });
    throw UnsupportedDimensionError(fmt::format("dimension {} is not supported (d = 1, 2)", grid.dimension()));
}

void require_line(const GridSpec& grid, const char* what)
{
    if (grid.dimension() != 1) throw UnsupportedDimensionError(fmt::format("{} data are one-dimensional", what));
}

Materialized from_slope(SampledProfile slope)
{
    SampledProfile height = integrate_slope(slope);
    return {std::move(height), std::move(slope), std::nullopt, std::nullopt};
}

Materialized from_height(SampledProfile height)
{
    SampledProfile slope = differentiate(height);
    return {std::move(height), std::move(slope), std::nullopt, std::nullopt};
}

Materialized materialize(const InitialData& data, const GridSpec& grid)
{
    struct Visitor {
        const GridSpec& grid;

        Materialized operator()(const ZeroData&) const { return from_height(radial(grid, [](double) { return 0.0; })); }
        Materialized operator()(const GaussianData& d) const
        {
            if (!(d.width > 0.0)) throw ConfigError("$.initial_data.width: must be positive");
            const double c = d.center;
            if (grid.dimension() == 1)
                return from_height(sample_1d(grid, grid.half_width(), [&](double x) {
                    return d.amplitude * std::exp(-((x - c) / d.width) * ((x - c) / d.width));
                }));
            return from_height(radial(grid, [&](double r2) { return d.amplitude * std::exp(-r2 / (d.width * d.width)); }));
        }
        Materialized operator()(const CosineData& d) const
        {
            return from_height(along_first_axis(grid, [&](double x) { return d.amplitude * std::cos(d.wavenumber * x); }));
        }
        Materialized operator()(const IntervalData& d) const
        {
            require_line(grid, "interval_slope");
            IntervalSlopeData gen = gen_interval_slope(d.spec, grid);
            Materialized m = from_slope(std::move(gen.slope));
            m.certified_sigma = gen.sigma;
            m.eps0 = d.spec.eps0;
            m.info = {{"sigma", gen.sigma}, {"beta", gen.beta}, {"junction_oscillation", gen.junction_oscillation}};
            return m;
        }
        Materialized operator()(const SinX2Data& d) const
        {
            require_line(grid, "sinx2");
            return from_slope(gen_sinx2(grid, d.window));
        }
        Materialized operator()(const ApproximantData& d) const
        {
            require_line(grid, "compact_approximant");
            IntervalSlopeData gen = gen_interval_slope(d.spec, grid);
            Materialized m = from_slope(gen_compact_approximant(gen.slope, d.eps));
            m.certified_sigma = gen.sigma / 2.0;
            m.eps0 = d.spec.eps0;
            m.info = {{"base_sigma", gen.sigma}, {"base_beta", gen.beta}, {"eps", d.eps}};
            return m;
        }
        Materialized operator()(const NdSmallDeviationData& d) const
        {
            NdDataSpec spec = d.spec;
            spec.dim = grid.dimension();
            NdData gen = gen_nd_small_deviation(spec, grid);
            Materialized m = from_height(std::move(gen.f));
            m.info = {{"deviation", gen.deviation}, {"eta", gen.eta}, {"c_d", spec.c_d}};
            return m;
        }
        Materialized operator()(const CsvData& d) const
        {
            SampledProfile p = read_profile_csv(d.path);
            if (!(p.grid == grid))
                throw ConfigError(fmt::format("$.initial_data.path: {} is not on the configured grid", d.path));
            return d.slope ? from_slope(std::move(p)) : from_height(std::move(p));
        }
    };
    return std::visit(Visitor{grid}, data);
}

json fit_json(const BoundFit& f)
{
    json j{{"constant", f.constant}, {"residual", f.residual}, {"times", f.times}, {"observed", f.observed}};
    if (f.reference) j["reference"] = *f.reference;
    if (f.rate_scale) j["rate_scale"] = *f.rate_scale;
    return j;
}

VerdictEntry from_fit(const BoundFit& f, bool informational = false)
{
    return {f.bound, f.anchor, f.verdict, informational, fit_json(f)};
}

VerdictEntry refinement_entry(const std::string& name, const std::string& anchor, double coarse, double fine,
                              double tolerance)
{
    const bool ok = refinement_stable(coarse, fine, tolerance);
    return {name, anchor, ok ? Verdict::pass : Verdict::fail, false,
            {{"coarse", coarse}, {"fine", fine}, {"tolerance", tolerance}}};
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
    out << text;
}

struct Context {
    const RunConfig& cfg;
    Report& report;
    std::optional<SampledProfile> final_height;

    std::filesystem::path out(const std::string& name) const { return cfg.output_dir / name; }

    DiagnosticsConfig diagnostics(const Materialized& m) const
    {
        DiagnosticsConfig d;
        d.quad = cfg.quadrature;
        d.sigma = cfg.analysis.sigma > 0.0 ? cfg.analysis.sigma : m.certified_sigma.value_or(0.5);
        return d;
    }

    GridSpec refined_grid() const { return {cfg.grid.dim, cfg.grid.half_width, 2 * cfg.grid.points}; }
    double tolerance(double fallback) const { return cfg.analysis.tolerance > 0.0 ? cfg.analysis.tolerance : fallback; }
};

json frame_summary(const Trajectory& traj)
{
    json frames = json::array();
    for (const auto& fr : traj) {
        const auto& d = fr.diagnostics;
        frames.push_back({{"t", fr.t},
                          {"f_sup", d.f_sup},
                          {"fx_sup", d.fx_sup},
                          {"beta_sigma", d.beta ? json(*d.beta) : json(nullptr)}});
    }
    return frames;
}

void run_simulate(Context& ctx)
{
    const GridSpec grid = ctx.cfg.grid.spec();
    const Materialized m = materialize(ctx.cfg.initial_data, grid);
    const DiagnosticsConfig diag = ctx.diagnostics(m);
    const std::string anchor = "Theorem 1.1: there exists T_0 > 0 and a unique classical solution";
    Trajectory traj;
    try {
        traj = simulate(m.height, ctx.cfg.time.horizon, ctx.cfg.step, ctx.cfg.time.record_every, diag);
    } catch (const EvolutionError& e) {
        write_trajectory(ctx.out("trajectory"), e.frames());
        ctx.report.verdicts.push_back({"evolution", anchor, Verdict::fail, false,
                                       {{"error", e.what()}, {"t_reached", e.frames().back().t}}});
        ctx.report.data["frames"] = frame_summary(e.frames());
        return;
    }
    write_trajectory(ctx.out("trajectory"), traj);
    double change = 0.0;
    for (const auto& fr : traj) change = std::max(change, sup_norm_diff(fr.f.values, traj.front().f.values));
    ctx.report.verdicts.push_back(
        {"evolution", anchor, Verdict::pass, false, {{"t_final", traj.back().t}, {"frames", traj.size()}}});
    ctx.report.data["initial_data"] = m.info;
    ctx.report.data["sigma"] = diag.sigma;
    ctx.report.data["max_change_from_initial"] = change;
    ctx.report.data["frames"] = frame_summary(traj);
    ctx.final_height = traj.back().f;
}

void run_beta(Context& ctx)
{
    const GridSpec grid = ctx.cfg.grid.spec();
    const Materialized m = materialize(ctx.cfg.initial_data, grid);
    require_line(grid, "beta");
    std::string csv = "sigma,beta,z_star,x_star,y_star\n";
    json rows = json::array();
    double worst = 0.0, best = std::numeric_limits<double>::infinity();
    for (double sigma : ctx.cfg.analysis.sigmas) {
        const BetaReport b = beta_sigma(m.slope, sigma);
        worst = std::max(worst, b.value);
        best = std::min(best, b.value);
        csv += fmt::format("{},{},{},{},{}\n", sigma, b.value, b.z_star, b.x_star, b.y_star);
        rows.push_back({{"sigma", sigma},
                        {"beta", b.value},
                        {"z_star", b.z_star},
                        {"x_star", b.x_star},
                        {"y_star", b.y_star},
                        {"center_discretization", b.center_discretization}});
    }
    write_text(ctx.out("beta.csv"), csv);

    const double max_r = std::min(2.0, grid.half_width());
    const EnvelopeReport env = modulus_envelope(m.slope, max_r);
    std::string table = "distance,envelope\n";
    for (std::size_t k = 0; k < env.distances.size(); ++k)
        table += fmt::format("{},{}\n", env.distances[k], env.envelope[k]);
    write_text(ctx.out("envelope.csv"), table);

    // The condition asks for beta_sigma <= 1 - eps0 at some sigma, so the smallest value decides.
    const double eps0 = m.eps0.value_or(ctx.cfg.modulus.eps0);
    const bool holds = best <= 1.0 - eps0;
    ctx.report.verdicts.push_back({"slope_condition",
                                   "(inibe): beta_sigma(f_0') <= 1 - eps0 for some sigma, eps0 > 0",
                                   holds ? Verdict::pass : Verdict::fail,
                                   true,
                                   {{"status", holds ? "condition (1.2) holds" : "condition (1.2) violated"},
                                    {"eps0", eps0},
                                    {"min_beta", best},
                                    {"max_beta", worst}}});
    ctx.report.data["beta"] = rows;
    ctx.report.data["initial_data"] = m.info;
}

void run_modulus_certify(Context& ctx)
{
    const ModulusConfig& mc = ctx.cfg.modulus;
    const std::string anchor = "Lemma 2.3: there exists a function rho such that (con2) propagates";
    ModulusSpec spec = [&] {
        try {
            return find_valid_parameters(mc.lipschitz, mc.eps0, mc.c0_floor, mc.sigma);
        } catch (const NoCertificateError& e) {
            ctx.report.verdicts.push_back(
                {"certificate", anchor, Verdict::fail, false, {{"error", e.what()}, {"best_margin", e.best_margin()}}});
            throw;
        }
    }();
    const RegimeCheck small = check_small_regime(spec);
    const RegimeCheck large = check_large_regime(spec);
    std::vector<ScaledCheck> lambdas;
    Verdict lambda_verdict = Verdict::pass;
    for (double lam : {1.0, 1.25, 1.5, 1.75, 2.0}) {
        lambdas.push_back(scaled_family_check(spec, lam));
        const Verdict v = lambdas.back().verdict();
        if (v == Verdict::fail || (v == Verdict::inconclusive && lambda_verdict == Verdict::pass)) lambda_verdict = v;
    }
    const json cert = certificate_json(spec, small, large, lambdas);
    write_text(ctx.out("certificate.json"), cert.dump(2) + "\n");

    auto regime = [](const RegimeCheck& c) {
        return json{{"margin", c.margin}, {"worst_z", c.worst_z}, {"points", c.points}};
    };
    ctx.report.verdicts.push_back({"certificate", anchor, Verdict::pass, false,
                                   {{"delta", spec.omega.delta()}, {"gamma", spec.omega.gamma()}}});
    ctx.report.verdicts.push_back({"small_regime",
                                   "(smal): 10(1+L) z (3 + C_0^-1 + ln(delta/z) + int omega'/eta) + eps0 z omega''/"
                                   "(4(1+L^2)^2) < 0",
                                   small.verdict, false, regime(small)});
    ctx.report.verdicts.push_back({"large_regime",
                                   "(lar): 4(1+L) omega'(...) - eps0 omega/(4(1+L^2)^2 z) + 4(1+L)(...) < 0",
                                   large.verdict, false, regime(large)});
    ctx.report.verdicts.push_back({"lambda_grid", "Remark 2.4: replace rho by lambda rho for any lambda in [1,2]",
                                   lambda_verdict, false, cert["margins"]["lambda_grid"]});
    ctx.report.data["certificate"] = cert;
}

struct BoundsRun {
    BoundFit cap, lipschitz, smoothing, growth;
};

BoundsRun bounds_on(const GridSpec& grid, Context& ctx, json& info)
{
    const Materialized m = materialize(ctx.cfg.initial_data, grid);
    const DiagnosticsConfig diag = ctx.diagnostics(m);
    const double eps0 = m.eps0.value_or(ctx.cfg.modulus.eps0);
    const Trajectory traj = simulate(m.height, ctx.cfg.time.horizon, ctx.cfg.step, ctx.cfg.time.record_every, diag);
    info = {{"points", grid.points()}, {"sigma", diag.sigma}, {"eps0", eps0}, {"initial_data", m.info},
            {"frames", frame_summary(traj)}};
    return {check_beta_cap(traj, 1.0 - 0.75 * eps0), check_lipschitz_growth(traj, diag.sigma), check_smoothing(traj),
            check_beta_growth(traj, diag.sigma)};
}

void run_verify_bounds(Context& ctx)
{
    json coarse_info;
    const BoundsRun coarse = bounds_on(ctx.cfg.grid.spec(), ctx, coarse_info);
    ctx.report.verdicts.push_back(from_fit(coarse.cap));
    ctx.report.verdicts.push_back(from_fit(coarse.lipschitz));
    ctx.report.verdicts.push_back(from_fit(coarse.smoothing));
    ctx.report.verdicts.push_back(from_fit(coarse.growth, true));
    ctx.report.data["coarse"] = coarse_info;
    if (!ctx.cfg.analysis.refine) return;

    json fine_info;
    const BoundsRun fine = bounds_on(ctx.refined_grid(), ctx, fine_info);
    const double tol = ctx.cfg.analysis.refinement_tolerance;
    ctx.report.verdicts.push_back(from_fit(fine.cap));
    ctx.report.verdicts.back().name += "_fine";
    ctx.report.verdicts.push_back(refinement_entry("lipschitz_growth_refinement", coarse.lipschitz.anchor,
                                                   coarse.lipschitz.constant, fine.lipschitz.constant, tol));
    ctx.report.verdicts.push_back(refinement_entry("smoothing_refinement", coarse.smoothing.anchor,
                                                   coarse.smoothing.constant, fine.smoothing.constant, tol));
    ctx.report.data["fine"] = fine_info;
}

SampledProfile perturbed(const SampledProfile& f, double amplitude)
{
    SampledProfile g = f;
    const GridSpec& grid = f.grid;
    const SampledProfile bumpy = radial(grid, [&](double r2) { return amplitude * std::exp(-r2); });
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += bumpy[k];
    return g;
}

BoundFit gronwall_on(const GridSpec& grid, Context& ctx, bool identical)
{
    const Materialized m = materialize(ctx.cfg.initial_data, grid);
    const SampledProfile other = identical ? m.height : perturbed(m.height, ctx.cfg.analysis.perturbation);
    return check_gronwall(m.height, other, ctx.cfg.time.horizon, ctx.cfg.step, ctx.cfg.time.record_every,
                          ctx.diagnostics(m));
}

void run_gronwall(Context& ctx)
{
    const GridSpec grid = ctx.cfg.grid.spec();
    const BoundFit pair = gronwall_on(grid, ctx, false);
    VerdictEntry e = from_fit(pair);
    e.anchor = "uniqueness: ||f_1 - f_2||(t) <= ||f_1 - f_2||(0) exp((C_d (1+L) rho_0^-1) t) via Gronwall";
    ctx.report.verdicts.push_back(e);
    BoundFit same = gronwall_on(grid, ctx, true);
    VerdictEntry s = from_fit(same);
    s.name = "identical_data";
    s.anchor = "uniqueness: identical data give identical solutions";
    ctx.report.verdicts.push_back(s);
    std::string csv = "t,distance\n";
    for (std::size_t k = 0; k < pair.times.size(); ++k) csv += fmt::format("{},{}\n", pair.times[k], pair.observed[k]);
    write_text(ctx.out("gronwall.csv"), csv);
    if (!ctx.cfg.analysis.refine) return;
    const BoundFit fine = gronwall_on(ctx.refined_grid(), ctx, false);
    ctx.report.verdicts.push_back(refinement_entry("gronwall_refinement", e.anchor, pair.constant, fine.constant,
                                                   ctx.cfg.analysis.refinement_tolerance));
    ctx.report.data["fine"] = fit_json(fine);
}

std::vector<double> sample_points(const Context& ctx, const GridSpec& grid)
{
    std::mt19937_64 rng(ctx.cfg.seed);
    std::uniform_real_distribution<double> pick(-grid.half_width() / 2.0, grid.half_width() / 2.0);
    std::vector<double> xs;
    for (int k = 0; k < ctx.cfg.analysis.samples; ++k) xs.push_back(pick(rng));
    return xs;
}

int nearest_node(const GridSpec& grid, double x)
{
    return std::clamp(static_cast<int>(std::lround((x + grid.half_width()) / grid.dx())), 0, grid.points());
}

struct IdentityStats {
    double worst_relative = 0.0;
    double worst_absolute = 0.0;
    json rows = json::array();
};

IdentityStats identity_on(const GridSpec& grid, const std::vector<double>& xs, Context& ctx, double sigma)
{
    const Materialized m = materialize(ctx.cfg.initial_data, grid);
    IdentityStats s;
    for (double x : xs) {
        const int node = nearest_node(grid, x);
        const IdentitySides sides = pv_identity_sides(m.height, node, sigma, ctx.cfg.quadrature);
        const double rel = sides.residual() / (std::fabs(sides.lhs) + 1.0);
        s.worst_relative = std::max(s.worst_relative, rel);
        s.worst_absolute = std::max(s.worst_absolute, sides.residual());
        s.rows.push_back({{"x", grid.coord(node)}, {"lhs", sides.lhs}, {"rhs", sides.rhs}, {"relative", rel}});
    }
    return s;
}

void run_pv_identity(Context& ctx)
{
    const GridSpec grid = ctx.cfg.grid.spec();
    require_line(grid, "pv-identity");
    const double sigma = ctx.cfg.analysis.sigma > 0.0 ? ctx.cfg.analysis.sigma : 1.0;
    const std::vector<double> xs = sample_points(ctx, grid);
    const IdentityStats coarse = identity_on(grid, xs, ctx, sigma);
    const double tol = ctx.tolerance(1e-3);
    const std::string anchor =
        "(Ealp): int E_alpha f k dalpha/alpha^2 = -int delta_alpha f_x K(x, alpha) dalpha";
    ctx.report.verdicts.push_back({"identity_residual", anchor,
                                   coarse.worst_relative <= tol ? Verdict::pass : Verdict::fail, false,
                                   {{"worst_relative", coarse.worst_relative}, {"tolerance", tol}}});
    std::string csv = "x,lhs,rhs,relative\n";
    for (const auto& r : coarse.rows)
        csv += fmt::format("{},{},{},{}\n", r["x"].get<double>(), r["lhs"].get<double>(), r["rhs"].get<double>(),
                           r["relative"].get<double>());
    write_text(ctx.out("identity.csv"), csv);
    ctx.report.data["samples"] = coarse.rows;
    if (!ctx.cfg.analysis.refine) return;
    const IdentityStats fine = identity_on(ctx.refined_grid(), xs, ctx, sigma);
    const double order = std::log2(coarse.worst_absolute / fine.worst_absolute);
    ctx.report.verdicts.push_back({"identity_order", anchor, order >= 1.0 ? Verdict::pass : Verdict::fail, false,
                                   {{"coarse", coarse.worst_absolute}, {"fine", fine.worst_absolute}, {"order", order}}});
}

void run_linearize(Context& ctx)
{
    const GridSpec grid = ctx.cfg.grid.spec();
    const auto* cos_data = std::get_if<CosineData>(&ctx.cfg.initial_data);
    const CosineData data = cos_data ? *cos_data : CosineData{};
    const Materialized m = materialize(data, grid);
    const int d = grid.dimension();
    // The flat-interface linearization is -c_d |xi|, c_1 = pi and c_2 = 2 pi.
    const double symbol = -(d == 1 ? kPi : 2.0 * kPi) * std::fabs(data.wavenumber);
    const SampledProfile rhs = muskat_rhs_nd(m.height, ctx.cfg.quadrature);
    const double window = grid.half_width() / 2.0;
    const int n = grid.nodes();
    double err = 0.0, scale = 0.0;
    std::string csv = "x,rhs,oracle\n";
    for (std::size_t k = 0; k < rhs.size(); ++k) {
        const int i = d == 1 ? static_cast<int>(k) : static_cast<int>(k / n);
        const int j = d == 1 ? grid.center_index() : static_cast<int>(k % n);
        const double x = grid.coord(i), y = grid.coord(j);
        const double want = symbol * data.amplitude * std::cos(data.wavenumber * x);
        if (j == grid.center_index()) csv += fmt::format("{},{},{}\n", x, rhs[k], want);
        if (std::fabs(x) > window || (d == 2 && std::fabs(y) > window)) continue;
        err = std::max(err, std::fabs(rhs[k] - want));
        scale = std::max(scale, std::fabs(want));
    }
    write_text(ctx.out("linearization.csv"), csv);
    const double rel = scale > 0.0 ? err / scale : 0.0;
    const double tol = ctx.tolerance(d == 1 ? 1e-2 : 2e-2);
    ctx.report.verdicts.push_back({"linearization",
                                   d == 1 ? "(E1): linearization about a flat interface is -pi |xi| in d = 1"
                                          : "(hde): linearization about a flat interface is -2 pi |xi| in d = 2",
                                   rel <= tol ? Verdict::pass : Verdict::fail, false,
                                   {{"relative_error", rel}, {"tolerance", tol}, {"symbol", symbol}, {"window", window}}});
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

Verdict Report::overall() const
{
    if (error) return Verdict::fail;
    Verdict v = Verdict::pass;
    for (const auto& e : verdicts) {
        if (e.informational) continue;
        if (e.verdict == Verdict::fail) return Verdict::fail;
        if (e.verdict == Verdict::inconclusive) v = Verdict::inconclusive;
    }
    return v;
}

int Report::exit_code() const
{
    switch (overall()) {
    case Verdict::pass: return 0;
    case Verdict::inconclusive: return 2;
    case Verdict::fail: break;
    }
    return 1;
}

json Report::to_json() const
{
    json list = json::array();
    for (const auto& e : verdicts)
        list.push_back({{"name", e.name},
                        {"anchor", e.anchor},
                        {"verdict", muskat::to_string(e.verdict)},
                        {"informational", e.informational},
                        {"detail", e.detail}});
    json j{{"kind", kind},
           {"config_hash", hash},
           {"config", config},
           {"overall", muskat::to_string(overall())},
           {"exit_code", exit_code()},
           {"verdicts", list},
           {"data", data}};
    if (error) j["error"] = *error;
    return j;
}

RunResult run(const RunConfig& cfg)
{
    Report report;
    report.kind = to_string(cfg.kind);
    report.hash = config_hash(cfg);
    report.config = to_json(cfg);
    Context ctx{cfg, report, std::nullopt};
    try {
        std::filesystem::create_directories(cfg.output_dir);
        switch (cfg.kind) {
        case ExperimentKind::simulate: run_simulate(ctx); break;
        case ExperimentKind::beta: run_beta(ctx); break;
        case ExperimentKind::modulus_certify: run_modulus_certify(ctx); break;
        case ExperimentKind::verify_bounds: run_verify_bounds(ctx); break;
        case ExperimentKind::gronwall: run_gronwall(ctx); break;
        case ExperimentKind::pv_identity: run_pv_identity(ctx); break;
        case ExperimentKind::linearize: run_linearize(ctx); break;
        }
    } catch (const std::exception& e) {
        report.error = e.what();
    }
    json j = report.to_json();
    j["generated_at"] = utc_timestamp();
    try {
        write_text(cfg.output_dir / "report.json", j.dump(2) + "\n");
    } catch (const std::exception& e) {
        if (!report.error) report.error = e.what();
    }
    return {std::move(report), std::move(ctx.final_height)};
}

namespace {

std::string report_hash(const Report& r)
{
    json j = r.to_json();
    j["config"].erase("output_dir");
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", h);
}

// Sup distance between two final heights at the nodes of the coarser grid.
double coarse_node_distance(const SampledProfile& coarse, const SampledProfile& fine)
{
    const GridSpec& a = coarse.grid;
    const GridSpec& b = fine.grid;
    if (a.dimension() != 1 || b.points() % a.points() != 0 || a.half_width() != b.half_width())
        throw InputError("refinement table needs 1-D grids on one domain with nested nodes");
    const int r = b.points() / a.points();
    double d = 0.0;
    for (int i = 0; i < a.nodes(); ++i) d = std::max(d, std::fabs(coarse[i] - fine[r * i]));
    return d;
}

}  // namespace

SweepReport sweep(const std::vector<RunConfig>& configs, const std::filesystem::path& base_dir)
{
    if (configs.empty()) throw ConfigError("sweep needs at least one config");
    std::filesystem::create_directories(base_dir);

    struct Child {
        std::string hash;
        RunResult result;
        RunConfig cfg;
    };
    std::vector<Child> children;
    for (const RunConfig& c : configs) {
        RunConfig child = c;
        const std::string hash = config_hash(c);
        child.output_dir = base_dir / hash;
        children.push_back({hash, run(child), child});
    }
    std::stable_sort(children.begin(), children.end(), [](const Child& a, const Child& b) { return a.hash < b.hash; });

    SweepReport out;
    json runs = json::object();
    json order = json::array();
    for (const Child& c : children) {
        const Report& r = c.result.report;
        const json entry{{"kind", r.kind},
                         {"overall", to_string(r.overall())},
                         {"exit_code", r.exit_code()},
                         {"report_hash", report_hash(r)},
                         {"report", (std::filesystem::path(c.hash) / "report.json").string()}};
        runs[c.hash] = entry;
        order.push_back({{"config_hash", c.hash}, {"report_hash", entry["report_hash"]}});
        const int code = r.exit_code();
        if (code == 1 || (code == 2 && out.exit_code == 0)) out.exit_code = code;
    }

    // Simulations differing only in grid resolution form one refinement family.
    std::map<std::string, std::map<int, const Child*>> families;
    for (const Child& c : children) {
        if (c.cfg.kind != ExperimentKind::simulate || !c.result.final_height) continue;
        json key = to_json(c.cfg);
        key.erase("output_dir");
        key["grid"].erase("points");
        families[key.dump()][c.cfg.grid.points] = &c;
    }
    json tables = json::array();
    for (const auto& [key, members] : families) {
        if (members.size() < 3) continue;
        std::vector<const Child*> chain;
        for (const auto& [points, child] : members) chain.push_back(child);
        json points = json::array(), gaps = json::array(), orders = json::array();
        try {
            std::vector<double> gap;
            for (std::size_t k = 0; k + 1 < chain.size(); ++k)
                gap.push_back(coarse_node_distance(*chain[k]->result.final_height, *chain[k + 1]->result.final_height));
            for (const Child* c : chain) points.push_back(c->cfg.grid.points);
            for (double g : gap) gaps.push_back(g);
            for (std::size_t k = 0; k + 1 < gap.size(); ++k) {
                const double ratio =
                    static_cast<double>(chain[k + 1]->cfg.grid.points) / chain[k]->cfg.grid.points;
                orders.push_back(std::log(gap[k] / gap[k + 1]) / std::log(ratio));
            }
            tables.push_back({{"points", points}, {"differences", gaps}, {"orders", orders}});
        } catch (const std::exception& e) {
            tables.push_back({{"points", points}, {"error", e.what()}});
        }
    }
    out.merged = {{"runs", runs}, {"children", order}, {"refinement", tables}, {"exit_code", out.exit_code}};
    write_text(base_dir / "sweep.json", out.merged.dump(2) + "\n");
    return out;
}

}  // namespace muskat
