#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mfsc/errors.hpp"
#include "mfsc/grid_ops.hpp"
#include "mfsc/harness.hpp"

namespace mfsc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void diagnostic(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

std::string error_kind(const Error& e) {
    if (dynamic_cast<const UnsupportedOrder*>(&e)) return "UnsupportedOrder";
    if (dynamic_cast<const CapacityExceeded*>(&e)) return "CapacityExceeded";
    if (dynamic_cast<const PreconditionFailed*>(&e)) return "PreconditionFailed";
    if (dynamic_cast<const DomainTooSmall*>(&e)) return "DomainTooSmall";
    if (dynamic_cast<const OutOfRange*>(&e)) return "OutOfRange";
    if (dynamic_cast<const ResolutionError*>(&e)) return "ResolutionError";
    return "Error";
}

void write_table(const fs::path& path, const ResultTable& table) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    table.write_csv(out);
}

json run_record(const ExperimentConfig& cfg, const RunContext& ctx, double seconds) {
    json modules;
    for (const char* m : {"phasespace", "nbody", "empirical", "vlasov", "corrections", "wigner", "metrics", "harness"})
        modules[m] = kSoftwareVersion;
    return {{"config_hash", ctx.hash},  {"experiment", to_string(cfg.kind)}, {"software_version", kSoftwareVersion},
            {"modules", modules},       {"threads", ctx.threads},           {"seconds", seconds},
            {"config", config_to_json(cfg)}};
}

int execute(ExperimentKind kind, const std::string& config_path, const std::string& output, int threads,
            bool quiet) {
    ExperimentConfig cfg = load_config(config_path);
    if (cfg.kind != kind)
        throw ConfigError("experiment: config declares '" + to_string(cfg.kind) + "' but '" + to_string(kind) +
                          "' was requested");
    apply_environment(cfg);
    if (!output.empty()) cfg.output_dir = output;
    if (threads >= 0) cfg.threads = threads;
    validate_config(cfg);

    RunContext ctx = make_context(cfg);
    if (!quiet) ctx.log = [](const std::string& line) { std::cerr << "[mfsc] " << line << '\n'; };
    const fs::path dir = fs::path(cfg.output_dir) / (to_string(kind) + "-" + ctx.hash);
    fs::create_directories(dir);
    const auto t0 = std::chrono::steady_clock::now();
    json record;
    json verdicts;
    switch (kind) {
        case ExperimentKind::Converge: {
            const ConvergenceResult r = run_convergence(cfg, ctx);
            write_table(dir / "results.csv", r.table());
            write_table(dir / "summary.csv", r.summary_table());
            if (cfg.write_snapshots) write_stack((dir / "snapshots").string(), r.stack);
            verdicts["skipped_n"] = r.skipped_n;
            break;
        }
        case ExperimentKind::Estimates: {
            const EstimatesResult r = run_estimates(cfg, ctx);
            write_table(dir / "results.csv", r.table());
            verdicts = {{"first_ratio", r.first_ratio},
                        {"second_ratio", r.second_ratio},
                        {"tested_ratio", r.tested_ratio},
                        {"fd_max_rel_error", r.fd_max_rel_error},
                        {"free_flow_error", r.free_flow_error}};
            break;
        }
        case ExperimentKind::Remainder: {
            const RemainderExperiment r = run_remainder(cfg, ctx);
            write_table(dir / "results.csv", r.table());
            if (cfg.write_snapshots) write_stack((dir / "snapshots").string(), r.stack);
            verdicts = {{"slopes", r.result.slopes},
                        {"intercepts", r.result.intercepts},
                        {"constants", r.result.constants}};
            break;
        }
        case ExperimentKind::Dobrushin: {
            const DobrushinResult r = run_dobrushin(cfg, ctx);
            write_table(dir / "results.csv", r.table());
            json fits = json::array();
            for (const auto& row : r.rows)
                fits.push_back({{"N", row.n},
                                {"C", row.fit.C},
                                {"pairs_used", row.fit.pairs_used},
                                {"warnings", row.fit.warnings},
                                {"violations", row.fit.violations}});
            verdicts = {{"fits", fits}, {"max_relative_change", r.max_relative_change}};
            break;
        }
        case ExperimentKind::VlasovCheck: {
            const VlasovCheckResult r = run_vlasov_check(cfg, ctx);
            write_table(dir / "results.csv", r.table());
            if (cfg.write_snapshots) {
                fs::create_directories(dir / "snapshots");
                write_snapshot((dir / "snapshots" / "vlasov_final.bin").string(), r.final_grid, cfg.t_final);
            }
            verdicts = {{"max_z", r.max_z()}, {"mass_drift", r.mass_drift}, {"boundary_fraction", r.boundary_fraction}};
            break;
        }
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record = run_record(cfg, ctx, seconds);
    record["verdicts"] = verdicts;
    std::ofstream(dir / "run.json") << record.dump(2) << '\n';
    std::cout << dir.string() << '\n';
    return kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Mean-field and semiclassical experiment runner"};
    app.require_subcommand(1);
    std::string config_path, output;
    int threads = -1;
    bool quiet = false;

    struct Sub {
        ExperimentKind kind;
        CLI::App* app;
    };
    std::vector<Sub> subs;
    for (auto kind : {ExperimentKind::Converge, ExperimentKind::Estimates, ExperimentKind::Remainder,
                      ExperimentKind::Dobrushin, ExperimentKind::VlasovCheck}) {
        CLI::App* sub = app.add_subcommand(to_string(kind), "Run the " + to_string(kind) + " experiment");
        sub->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--output", output, "Output directory (overrides config and MFSC_OUTPUT_DIR)");
        sub->add_option("-j,--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
        sub->add_flag("-q,--quiet", quiet, "Suppress progress lines");
        subs.push_back({kind, sub});
    }
    CLI::App* validate = app.add_subcommand("validate-config", "Validate a config and print resolved parameters");
    validate->add_option("config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    CLI::App* schema = app.add_subcommand("schema", "Print the config JSON schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        diagnostic("UsageError", e.what());
        std::cerr << app.help();
        return kExitValidation;
    }

    try {
        if (schema->parsed()) {
            std::cout << config_schema().dump(2) << '\n';
            return kExitOk;
        }
        if (validate->parsed()) {
            ExperimentConfig cfg = load_config(config_path);
            apply_environment(cfg);
            validate_config(cfg);
            json out = config_to_json(cfg);
            out["config_hash"] = config_hash(cfg);
            std::cout << out.dump(2) << '\n';
            return kExitOk;
        }
        for (const auto& s : subs)
            if (s.app->parsed()) return execute(s.kind, config_path, output, threads, quiet);
    } catch (const ConfigError& e) {
        diagnostic("ConfigError", e.what());
        return kExitValidation;
    } catch (const Divergence& e) {
        diagnostic("Divergence", e.what());
        return kExitDivergence;
    } catch (const Error& e) {
        diagnostic(error_kind(e), e.what());
        return kExitFailure;
    } catch (const std::exception& e) {
        diagnostic("InternalError", e.what());
        return kExitFailure;
    }
    return kExitValidation;
}

}  // namespace mfsc
