#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "muskat/errors.hpp"
#include "muskat/experiments.hpp"
#include "muskat/parallel.hpp"

namespace {

int resolve_threads(int flag)
{
    if (flag > 0) return flag;
    if (const char* env = std::getenv("MUSKAT_LAB_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1)
            throw muskat::ConfigError(fmt::format("MUSKAT_LAB_THREADS = '{}' is not a positive integer", env));
        return static_cast<int>(n);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

nlohmann::json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw muskat::ConfigError(fmt::format("cannot open config file {}", path.string()));
    try {
        return nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
        throw muskat::ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void print_report(const muskat::Report& r)
{
    for (const auto& v : r.verdicts)
        fmt::print("{:<13} {:<28} {}\n", fmt::format("[{}{}]", muskat::to_string(v.verdict), v.informational ? "*" : ""),
                   v.name, v.anchor);
    if (r.error) fmt::print("error: {}\n", *r.error);
    fmt::print("overall: {} (exit {})\n", muskat::to_string(r.overall()), r.exit_code());
}

int run_single(const std::string& kind, const std::filesystem::path& config, const std::string& out)
{
    nlohmann::json j = read_json(config);
    if (!j.is_object()) throw muskat::ConfigError("$: expected an object");
    if (!j.contains("kind")) j["kind"] = kind;
    if (j["kind"] != kind)
        throw muskat::ConfigError(fmt::format("$.kind: config says '{}' but the command is '{}'",
                                              j["kind"].is_string() ? j["kind"].get<std::string>() : j["kind"].dump(), kind));
    muskat::RunConfig cfg = muskat::parse_run_config(j);
    // Relative data paths resolve against the config directory.
    if (auto* csv = std::get_if<muskat::CsvData>(&cfg.initial_data)) {
        std::filesystem::path p = csv->path;
        if (p.is_relative()) p = config.parent_path() / p;
        if (!std::filesystem::exists(p))
            throw muskat::ConfigError(fmt::format("$.initial_data.path: file {} does not exist", p.string()));
        csv->path = p.string();
    }
    if (!out.empty()) cfg.output_dir = out;
    const muskat::RunResult result = muskat::run(cfg);
    print_report(result.report);
    fmt::print("report: {}\n", (cfg.output_dir / "report.json").string());
    return result.report.exit_code();
}

int run_sweep(const std::filesystem::path& config, const std::string& out)
{
    const nlohmann::json j = read_json(config);
    const nlohmann::json* runs = &j;
    if (j.is_object()) {
        for (const auto& [key, value] : j.items())
            if (key != "runs" && key != "output_dir") throw muskat::ConfigError(fmt::format("$.{}: unknown key", key));
        if (!j.contains("runs")) throw muskat::ConfigError("$.runs: required field is missing");
        runs = &j.at("runs");
    }
    if (!runs->is_array()) throw muskat::ConfigError("$.runs: expected an array of run configs");
    std::vector<muskat::RunConfig> configs;
    for (std::size_t k = 0; k < runs->size(); ++k) {
        try {
            configs.push_back(muskat::parse_run_config((*runs)[k]));
        } catch (const muskat::ConfigError& e) {
            throw muskat::ConfigError(fmt::format("runs[{}]: {}", k, e.what()));
        }
    }
    std::filesystem::path base = out.empty() ? std::filesystem::path("muskat-sweep") : std::filesystem::path(out);
    if (out.empty() && j.is_object() && j.contains("output_dir")) base = j["output_dir"].get<std::string>();
    const muskat::SweepReport s = muskat::sweep(configs, base);
    for (const auto& [hash, entry] : s.merged["runs"].items())
        fmt::print("{} {:<16} {}\n", hash, entry["kind"].get<std::string>(), entry["overall"].get<std::string>());
    fmt::print("sweep: {} (exit {})\n", (base / "sweep.json").string(), s.exit_code);
    return s.exit_code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Experiment runner for the graph Muskat toolkit"};
    std::string kind;
    std::string config;
    std::string out;
    int threads = 0;
    app.add_option("kind", kind,
                   "simulate | beta | modulus-certify | verify-bounds | gronwall | pv-identity | linearize | sweep")
        ->required();
    app.add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", out, "output directory, overriding the config");
    app.add_option("--threads", threads, "worker threads (default: MUSKAT_LAB_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        muskat::set_thread_count(resolve_threads(threads));
        if (kind == "sweep") return run_sweep(config, out);
        muskat::parse_kind(kind);
        return run_single(kind, config, out);
    } catch (const muskat::ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
