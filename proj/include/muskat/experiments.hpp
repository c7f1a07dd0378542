#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "muskat/evolution.hpp"
#include "muskat/initial_data.hpp"
#include "muskat/kernels.hpp"
#include "muskat/slope_analysis.hpp"

namespace muskat {

enum class ExperimentKind { simulate, beta, modulus_certify, verify_bounds, gronwall, pv_identity, linearize };

const char* to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

struct GridConfig {
    int dim = 1;
    double half_width = 8.0;
    int points = 512;

    GridSpec spec() const { return {dim, half_width, points}; }
};

// Height profiles given in closed form.
struct ZeroData {};
struct GaussianData {
    double amplitude = 1.0;
    double width = 1.0;
    double center = 0.0;
};
struct CosineData {
    double amplitude = 1e-4;
    double wavenumber = 2.0;
};
// Slope profiles from the generators; the height is their running integral.
struct IntervalData {
    IntervalSlopeSpec spec;
};
struct SinX2Data {
    double window = 5.0;
};
struct ApproximantData {
    IntervalSlopeSpec spec;
    double eps = 0.05;
};
struct NdSmallDeviationData {
    NdDataSpec spec;
};
// A height (or slope) profile stored in the grid CSV format.
struct CsvData {
    std::string path;
    bool slope = false;
};

using InitialData = std::variant<ZeroData, GaussianData, CosineData, IntervalData, SinX2Data, ApproximantData,
                                 NdSmallDeviationData, CsvData>;

struct TimeConfig {
    double horizon = 0.05;
    int record_every = 1;
};

struct ModulusConfig {
    double lipschitz = 1.0;
    double eps0 = 0.25;
    double sigma = 0.5;
    double c0_floor = 1.0;
};

struct AnalysisConfig {
    // Window scale for beta diagnostics; 0 takes the scale certified by the data generator, else 0.5.
    double sigma = 0.0;
    std::vector<double> sigmas{0.1, 0.5, 1.0};
    // Repeat the trajectory checks at twice the resolution and compare fitted constants.
    bool refine = false;
    double refinement_tolerance = 0.2;
    // Sup-norm amplitude of the Gaussian added to the second datum of a Gronwall pair.
    double perturbation = 1e-3;
    // Random interior nodes for identity spot checks, drawn from the run seed.
    int samples = 8;
    // Relative error budget; 0 takes the kind default (1e-3 identity, 1e-2 / 2e-2 linearization in 1-D / 2-D).
    double tolerance = 0.0;
};

struct RunConfig {
    ExperimentKind kind = ExperimentKind::simulate;
    GridConfig grid;
    InitialData initial_data = ZeroData{};
    StepControl step;
    TimeConfig time;
    QuadratureConfig quadrature;
    ModulusConfig modulus;
    AnalysisConfig analysis;
    std::filesystem::path output_dir = "muskat-out";
    std::uint64_t seed = 0;
};

// Strict parse: unknown keys and wrong types raise ConfigError naming the JSON path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);
// FNV-1a of the canonical serialization without the output directory, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

struct VerdictEntry {
    std::string name;
    std::string anchor;
    Verdict verdict = Verdict::pass;
    // Informational entries are reported but do not decide the exit status.
    bool informational = false;
    nlohmann::json detail = nlohmann::json::object();
};

struct Report {
    std::string kind;
    std::string hash;
    nlohmann::json config;
    std::vector<VerdictEntry> verdicts;
    nlohmann::json data = nlohmann::json::object();
    std::optional<std::string> error;

    Verdict overall() const;
    // 0 pass, 1 fail or error, 2 inconclusive.
    int exit_code() const;
    nlohmann::json to_json() const;
};

struct RunResult {
    Report report;
    // Final height of a simulated trajectory, for refinement tables.
    std::optional<SampledProfile> final_height;
};

// Runs one experiment and writes report.json plus kind-specific files into cfg.output_dir.
// Errors inside the pipeline are captured in the report rather than thrown.
RunResult run(const RunConfig& cfg);

struct SweepReport {
    nlohmann::json merged;  // children keyed by config hash, plus refinement tables
    int exit_code = 0;
};

// Runs every config under base_dir/<hash> and writes base_dir/sweep.json.
SweepReport sweep(const std::vector<RunConfig>& configs, const std::filesystem::path& base_dir);

}  // namespace muskat
