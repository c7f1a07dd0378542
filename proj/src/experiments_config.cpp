#include <cstdio>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "muskat/errors.hpp"
#include "muskat/experiments.hpp"

namespace muskat {

using nlohmann::json;

namespace {

constexpr std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::simulate, "simulate"},           {ExperimentKind::beta, "beta"},
    {ExperimentKind::modulus_certify, "modulus-certify"}, {ExperimentKind::verify_bounds, "verify-bounds"},
    {ExperimentKind::gronwall, "gronwall"},           {ExperimentKind::pv_identity, "pv-identity"},
    {ExperimentKind::linearize, "linearize"},
};

// Reads one JSON object, recording which keys were consumed so leftovers can be rejected.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", path_));
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    void read(const std::string& key, double& out) { take(key, out, &json::is_number, "a number"); }
    void read(const std::string& key, bool& out) { take(key, out, &json::is_boolean, "a boolean"); }
    void read(const std::string& key, std::string& out) { take(key, out, &json::is_string, "a string"); }
    void read(const std::string& key, int& out)
    {
        if (!has(key)) return;
        const json& v = field(key);
        if (!v.is_number_integer()) fail(key, "an integer");
        out = v.get<int>();
    }
    void read(const std::string& key, std::uint64_t& out)
    {
        if (!has(key)) return;
        const json& v = field(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            fail(key, "a non-negative integer");
        out = v.get<std::uint64_t>();
    }
    void read(const std::string& key, std::vector<double>& out)
    {
        if (!has(key)) return;
        const json& v = field(key);
        if (!v.is_array()) fail(key, "an array of numbers");
        out.clear();
        for (std::size_t k = 0; k < v.size(); ++k) {
            if (!v[k].is_number()) throw ConfigError(fmt::format("{}.{}[{}]: expected a number", path_, key, k));
            out.push_back(v[k].get<double>());
        }
    }

    std::string require_string(const std::string& key)
    {
        if (!has(key)) throw ConfigError(fmt::format("{}.{}: required field is missing", path_, key));
        std::string s;
        read(key, s);
        return s;
    }

    const json& field(const std::string& key)
    {
        seen_.insert(key);
        return j_.at(key);
    }
    std::string path_of(const std::string& key) const { return path_ + "." + key; }

    void finish() const
    {
        for (const auto& [key, value] : j_.items())
            if (!seen_.contains(key)) throw ConfigError(fmt::format("{}.{}: unknown key", path_, key));
    }

private:
    template <class T>
    void take(const std::string& key, T& out, bool (json::*is)() const noexcept, const char* what)
    {
        if (!has(key)) return;
        const json& v = field(key);
        if (!(v.*is)()) fail(key, what);
        out = v.get<T>();
    }
    [[noreturn]] void fail(const std::string& key, const char* what) const
    {
        throw ConfigError(fmt::format("{}.{}: expected {}", path_, key, what));
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void read_interval_spec(ObjectReader& r, IntervalSlopeSpec& s)
{
    r.read("breakpoints", s.breakpoints);
    if (r.has("envelopes")) {
        const std::string path = r.path_of("envelopes");
        const json& v = r.field("envelopes");
        if (!v.is_array()) throw ConfigError(path + ": expected an array of [lo, hi] pairs");
        s.envelopes.clear();
        for (std::size_t k = 0; k < v.size(); ++k) {
            const json& e = v[k];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw ConfigError(fmt::format("{}[{}]: expected [lo, hi]", path, k));
            s.envelopes.push_back({e[0].get<double>(), e[1].get<double>()});
        }
    }
    r.read("junction_band", s.junction_band);
    r.read("eps0", s.eps0);
    r.read("transition", s.transition);
}

json interval_json(const IntervalSlopeSpec& s)
{
    json env = json::array();
    for (const auto& e : s.envelopes) env.push_back({e.lo, e.hi});
    return {{"breakpoints", s.breakpoints},
            {"envelopes", env},
            {"junction_band", s.junction_band},
            {"eps0", s.eps0},
            {"transition", s.transition}};
}

InitialData read_initial_data(const json& j, const std::string& path)
{
    ObjectReader r(j, path);
    const std::string type = r.require_string("type");
    InitialData out;
    if (type == "zero") {
        out = ZeroData{};
    } else if (type == "gaussian") {
        GaussianData d;
        r.read("amplitude", d.amplitude);
        r.read("width", d.width);
        r.read("center", d.center);
        out = d;
    } else if (type == "cosine") {
        CosineData d;
        r.read("amplitude", d.amplitude);
        r.read("wavenumber", d.wavenumber);
        out = d;
    } else if (type == "interval_slope") {
        IntervalData d;
        read_interval_spec(r, d.spec);
        out = d;
    } else if (type == "sinx2") {
        SinX2Data d;
        r.read("window", d.window);
        out = d;
    } else if (type == "compact_approximant") {
        ApproximantData d;
        read_interval_spec(r, d.spec);
        r.read("eps", d.eps);
        out = d;
    } else if (type == "nd_small_deviation") {
        NdSmallDeviationData d;
        r.read("plane_gradient", d.spec.plane_gradient);
        r.read("bump_amplitude", d.spec.bump_amplitude);
        r.read("bump_width", d.spec.bump_width);
        r.read("c_d", d.spec.c_d);
        r.read("ripple_amplitude", d.spec.ripple_amplitude);
        r.read("ripple_wavenumber", d.spec.ripple_wavenumber);
        r.read("eta", d.spec.eta);
        out = d;
    } else if (type == "csv") {
        CsvData d;
        d.path = r.require_string("path");
        r.read("slope", d.slope);
        out = d;
    } else {
        throw ConfigError(fmt::format("{}.type: unknown initial data type '{}'", path, type));
    }
    r.finish();
    return out;
}

json initial_data_json(const InitialData& data)
{
    struct Visitor {
        json operator()(const ZeroData&) const { return {{"type", "zero"}}; }
        json operator()(const GaussianData& d) const
        {
            return {{"type", "gaussian"}, {"amplitude", d.amplitude}, {"width", d.width}, {"center", d.center}};
        }
        json operator()(const CosineData& d) const
        {
            return {{"type", "cosine"}, {"amplitude", d.amplitude}, {"wavenumber", d.wavenumber}};
        }
        json operator()(const IntervalData& d) const
        {
            json j = interval_json(d.spec);
            j["type"] = "interval_slope";
            return j;
        }
        json operator()(const SinX2Data& d) const { return {{"type", "sinx2"}, {"window", d.window}}; }
        json operator()(const ApproximantData& d) const
        {
            json j = interval_json(d.spec);
            j["type"] = "compact_approximant";
            j["eps"] = d.eps;
            return j;
        }
        json operator()(const NdSmallDeviationData& d) const
        {
            const NdDataSpec& s = d.spec;
            return {{"type", "nd_small_deviation"},   {"plane_gradient", s.plane_gradient},
                    {"bump_amplitude", s.bump_amplitude}, {"bump_width", s.bump_width},
                    {"c_d", s.c_d},                   {"ripple_amplitude", s.ripple_amplitude},
                    {"ripple_wavenumber", s.ripple_wavenumber}, {"eta", s.eta}};
        }
        json operator()(const CsvData& d) const { return {{"type", "csv"}, {"path", d.path}, {"slope", d.slope}}; }
    };
    return std::visit(Visitor{}, data);
}

std::string origin_patch_name(OriginPatch p) { return p == OriginPatch::limit ? "limit" : "skip"; }

}  // namespace

const char* to_string(ExperimentKind kind)
{
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "unknown";
}

ExperimentKind parse_kind(const std::string& name)
{
    for (const auto& [k, n] : kKindNames)
        if (name == n) return k;
    std::string all;
    for (const auto& [k, n] : kKindNames) all += (all.empty() ? "" : " | ") + std::string(n);
    throw ConfigError(fmt::format("unknown experiment kind '{}' (expected {})", name, all));
}

RunConfig parse_run_config(const json& j)
{
    ObjectReader r(j, "$");
    RunConfig cfg;
    cfg.kind = parse_kind(r.require_string("kind"));

    if (r.has("grid")) {
        ObjectReader g(r.field("grid"), r.path_of("grid"));
        g.read("dim", cfg.grid.dim);
        g.read("half_width", cfg.grid.half_width);
        g.read("points", cfg.grid.points);
        g.finish();
    }
    if (r.has("initial_data")) cfg.initial_data = read_initial_data(r.field("initial_data"), r.path_of("initial_data"));
    if (r.has("step")) {
        ObjectReader s(r.field("step"), r.path_of("step"));
        s.read("cfl", cfg.step.cfl);
        s.read("dt_min", cfg.step.dt_min);
        s.read("dt_max", cfg.step.dt_max);
        s.read("jump_tolerance", cfg.step.jump_tolerance);
        s.finish();
    }
    if (r.has("time")) {
        ObjectReader t(r.field("time"), r.path_of("time"));
        t.read("horizon", cfg.time.horizon);
        t.read("record_every", cfg.time.record_every);
        t.finish();
    }
    if (r.has("quadrature")) {
        ObjectReader q(r.field("quadrature"), r.path_of("quadrature"));
        q.read("outer_radius_factor", cfg.quadrature.outer_radius_factor);
        q.read("k_integral_points", cfg.quadrature.k_integral_points);
        q.read("origin_block", cfg.quadrature.origin_block);
        if (q.has("origin_patch")) {
            std::string p;
            q.read("origin_patch", p);
            if (p == "limit")
                cfg.quadrature.origin_patch = OriginPatch::limit;
            else if (p == "skip")
                cfg.quadrature.origin_patch = OriginPatch::skip;
            else
                throw ConfigError(q.path_of("origin_patch") + ": expected 'limit' or 'skip'");
        }
        q.finish();
    }
    if (r.has("modulus")) {
        ObjectReader m(r.field("modulus"), r.path_of("modulus"));
        m.read("L", cfg.modulus.lipschitz);
        m.read("eps0", cfg.modulus.eps0);
        m.read("sigma", cfg.modulus.sigma);
        m.read("c0_floor", cfg.modulus.c0_floor);
        m.finish();
    }
    if (r.has("analysis")) {
        ObjectReader a(r.field("analysis"), r.path_of("analysis"));
        a.read("sigma", cfg.analysis.sigma);
        a.read("sigmas", cfg.analysis.sigmas);
        a.read("refine", cfg.analysis.refine);
        a.read("refinement_tolerance", cfg.analysis.refinement_tolerance);
        a.read("perturbation", cfg.analysis.perturbation);
        a.read("samples", cfg.analysis.samples);
        a.read("tolerance", cfg.analysis.tolerance);
        a.finish();
    }
    if (r.has("output_dir")) {
        std::string dir;
        r.read("output_dir", dir);
        cfg.output_dir = dir;
    }
    r.read("seed", cfg.seed);
    r.finish();

    if (cfg.grid.dim < 1 || cfg.grid.points < 2 || !(cfg.grid.half_width > 0.0))
        throw ConfigError("$.grid: need dim >= 1, points >= 2 and half_width > 0");
    if (cfg.time.record_every < 1) throw ConfigError("$.time.record_every: must be >= 1");
    if (!(cfg.time.horizon >= 0.0)) throw ConfigError("$.time.horizon: must be >= 0");
    if (cfg.analysis.samples < 1) throw ConfigError("$.analysis.samples: must be >= 1");
    if (cfg.analysis.sigmas.empty()) throw ConfigError("$.analysis.sigmas: must not be empty");
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    RunConfig cfg = parse_run_config(j);
    if (auto* csv = std::get_if<CsvData>(&cfg.initial_data)) {
        std::filesystem::path p = csv->path;
        if (p.is_relative()) p = path.parent_path() / p;
        if (!std::filesystem::exists(p))
            throw ConfigError(fmt::format("$.initial_data.path: file {} does not exist", p.string()));
        csv->path = p.string();
    }
    return cfg;
}

json to_json(const RunConfig& cfg)
{
    const auto& q = cfg.quadrature;
    const auto& a = cfg.analysis;
    return {{"kind", to_string(cfg.kind)},
            {"grid", {{"dim", cfg.grid.dim}, {"half_width", cfg.grid.half_width}, {"points", cfg.grid.points}}},
            {"initial_data", initial_data_json(cfg.initial_data)},
            {"step",
             {{"cfl", cfg.step.cfl},
              {"dt_min", cfg.step.dt_min},
              {"dt_max", cfg.step.dt_max},
              {"jump_tolerance", cfg.step.jump_tolerance}}},
            {"time", {{"horizon", cfg.time.horizon}, {"record_every", cfg.time.record_every}}},
            {"quadrature",
             {{"outer_radius_factor", q.outer_radius_factor},
              {"k_integral_points", q.k_integral_points},
              {"origin_patch", origin_patch_name(q.origin_patch)},
              {"origin_block", q.origin_block}}},
            {"modulus",
             {{"L", cfg.modulus.lipschitz},
              {"eps0", cfg.modulus.eps0},
              {"sigma", cfg.modulus.sigma},
              {"c0_floor", cfg.modulus.c0_floor}}},
            {"analysis",
             {{"sigma", a.sigma},
              {"sigmas", a.sigmas},
              {"refine", a.refine},
              {"refinement_tolerance", a.refinement_tolerance},
              {"perturbation", a.perturbation},
              {"samples", a.samples},
              {"tolerance", a.tolerance}}},
            {"output_dir", cfg.output_dir.string()},
            {"seed", cfg.seed}};
}

std::string config_hash(const RunConfig& cfg)
{
    json j = to_json(cfg);
    j.erase("output_dir");
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return fmt::format("{:016x}", h);
}

}  // namespace muskat
