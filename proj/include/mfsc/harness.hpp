#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mfsc/configuration.hpp"
#include "mfsc/corrections.hpp"
#include "mfsc/density.hpp"
#include "mfsc/grid.hpp"
#include "mfsc/metrics.hpp"
#include "mfsc/nbody.hpp"
#include "mfsc/potential.hpp"
#include "mfsc/test_functions.hpp"
#include "mfsc/wigner.hpp"

namespace mfsc {

inline constexpr const char* kSoftwareVersion = "1.0.0";

enum class ExperimentKind { Converge, Estimates, Remainder, Dobrushin, VlasovCheck };

std::string to_string(ExperimentKind kind);
// Throws ConfigError for unknown names.
ExperimentKind experiment_kind_from_string(const std::string& name);

struct PotentialSpec {
    std::string kind = "gaussian";  // "gaussian" or "zero"
    double amplitude = 1.0;
    double sigma = 1.0;

    std::unique_ptr<PairPotential> make(int d) const;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Converge;
    int d = 1;
    PotentialSpec potential;
    std::vector<MixtureComponent> g;  // empty: unit-variance Gaussian
    std::vector<std::size_t> n_list{128, 256, 512, 1024, 2048};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
    double t_final = 1.0;
    double dt = 1e-3;
    GridSpec grid;
    int k = 0;      // order of the N-particle tested quantity (0 or 1)
    int K = 1;      // highest correction order on the grid side
    std::vector<double> epsilons{0.1, 0.05, 0.02, 0.01, 0.005};
    std::string test_bank = "default";
    std::string output_dir = "results";
    int threads = 0;  // 0: hardware concurrency

    std::size_t second_order_cap = 512;
    std::size_t fd_check_n = 8;
    std::size_t ensemble_size = 100000;
    std::vector<double> record_times{0.0, 0.25, 0.5, 0.75, 1.0};
    double perturbation = 0.05;
    double clamp = 1.0;
    std::size_t exact_cap = 1024;
    bool write_snapshots = true;

    GaussianMixture density() const;
    TestBank bank() const;
};

// Throws ConfigError naming the offending key.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);
// Applies MFSC_OUTPUT_DIR and MFSC_THREADS.
void apply_environment(ExperimentConfig& config);
// Resolution budgets and caps; throws ConfigError.
void validate_config(const ExperimentConfig& config);
// FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
// JSON schema (draft 2020-12) of the config file.
nlohmann::json config_schema();

// Mass of a Gaussian mixture outside the grid box.
double mixture_tail_mass(const GaussianMixture& g, const GridSpec& spec);

// Counter-based generator: the k-th draw of stream (seed, counter) is a pure
// function of its arguments.
std::uint64_t splitmix64(std::uint64_t x);
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t k);
double counter_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t k);

// N i.i.d. draws from g; particle i only uses streams 2i and 2i+1, so a
// sample of N is a prefix of the sample of 2N.
Configuration sample_typical(const GaussianMixture& g, std::size_t n, std::uint64_t seed);

// k = 0: (1/N) sum u(z_i(t)); k = 1: (u, D^2 mu_N(t)). k >= 2 throws UnsupportedOrder.
double nu_1(int k, const TestFunction& u, const Configuration& z0, const PairPotential& phi, double t, double dt);
double nu_1(int k, const TestFunction& u, const VariationalResult& flow);

// Tabular results with self-describing columns.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row);
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
    void write_csv(std::ostream& out) const;
};

std::string format_number(double x);

// One (N, seed) cell of the convergence sweep.
struct ConvergenceCell {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<double> nu0, nu1;  // per bank member (nu1 empty for k = 0)
    // Product-structure residual |nu_2^(1) - sum_q nu_1^(q) nu_1^(1-q)|, max over bank pairs.
    double product_residual = 0.0;
    double seconds = 0.0;
};

struct ConvergenceSummary {
    std::size_t n = 0;
    int k = 0;
    double mean_max_error = 0.0;   // seed average of the max-over-bank error
    double max_mean_error = 0.0;   // max over the bank of the seed-averaged error
    double mean_product_residual = 0.0;
    double prefactor = 1.0;        // N(N-1)/N^2 for the j = 2 comparison
};

struct ConvergenceResult {
    std::vector<double> reference0, reference1;  // (u, f^(k)(t)) per bank member
    std::vector<ConvergenceCell> cells;
    std::vector<ConvergenceSummary> summary;
    std::vector<std::size_t> skipped_n;  // above the second-order cap
    CorrectionStack stack;               // reference f^(0..k)
    ResultTable table() const;
    ResultTable summary_table() const;
};

struct EstimatesRow {
    std::size_t n = 0;
    double first_offdiag = 0.0;    // N max_{j != i} |dz_i/dz_j|
    double second_offdiag = 0.0;   // N max_{j != i} |d^2 z_i/dz_j dz_j|
    double tested_D2 = 0.0;        // max over bank |(u, D^2 mu_N(t))|
};

struct EstimatesResult {
    std::vector<EstimatesRow> rows;
    double first_ratio = 0.0, second_ratio = 0.0, tested_ratio = 0.0;  // max/min over the sweep
    double fd_max_rel_error = 0.0;       // variational vs finite differences at fd_check_n
    double free_flow_error = 0.0;        // J against its phi = 0 closed form
    ResultTable table() const;
};

struct RemainderExperiment {
    RemainderResult result;
    CorrectionStack stack;
    ResultTable table() const;
};

struct DobrushinRow {
    std::size_t n = 0;
    DobrushinFit fit;
    std::vector<std::vector<double>> distances;  // per seed, per record time
};

struct DobrushinResult {
    std::vector<double> times;
    std::vector<DobrushinRow> rows;
    double max_relative_change = 0.0;  // |C(2N) - C(N)| / |C(N)| over consecutive doublings
    ResultTable table() const;
};

struct VlasovCheckRow {
    std::string observable;
    double grid = 0.0;
    double ensemble = 0.0;
    double standard_error = 0.0;
    double z_score() const;
};

struct VlasovCheckResult {
    std::vector<VlasovCheckRow> rows;
    double mass_drift = 0.0;
    double boundary_fraction = 0.0;
    GridFunction final_grid;
    double max_z() const;
    ResultTable table() const;
};

struct RunContext {
    std::string hash;
    int threads = 1;
    // Progress lines; null suppresses them.
    std::function<void(const std::string&)> log;
};

RunContext make_context(const ExperimentConfig& config);

ConvergenceResult run_convergence(const ExperimentConfig& config, const RunContext& ctx);
EstimatesResult run_estimates(const ExperimentConfig& config, const RunContext& ctx);
RemainderExperiment run_remainder(const ExperimentConfig& config, const RunContext& ctx);
DobrushinResult run_dobrushin(const ExperimentConfig& config, const RunContext& ctx);
VlasovCheckResult run_vlasov_check(const ExperimentConfig& config, const RunContext& ctx);

// Self-consistent particle ensemble in d = 1: CIC deposit on the x-grid, the
// grid force kernel, CIC force interpolation and velocity Verlet.
Configuration evolve_particle_ensemble(const Configuration& z0, const PairPotential& phi, const GridSpec& grid,
                                       double t_final, double dt);

// Runs fn(0..count-1) on up to threads workers; results must be written to
// per-index slots by fn.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

// Exit codes of cli_main.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitFailure = 1;

int cli_main(int argc, char** argv);

}  // namespace mfsc
