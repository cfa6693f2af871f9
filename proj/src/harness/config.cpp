#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include "mfsc/errors.hpp"
#include "mfsc/harness.hpp"

namespace mfsc {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Converge: return "converge";
        case ExperimentKind::Estimates: return "estimates";
        case ExperimentKind::Remainder: return "remainder";
        case ExperimentKind::Dobrushin: return "dobrushin";
        case ExperimentKind::VlasovCheck: return "vlasov-check";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    for (auto k : {ExperimentKind::Converge, ExperimentKind::Estimates, ExperimentKind::Remainder,
                   ExperimentKind::Dobrushin, ExperimentKind::VlasovCheck})
        if (to_string(k) == name) return k;
    throw ConfigError("experiment: unknown kind '" + name + "'");
}

std::unique_ptr<PairPotential> PotentialSpec::make(int d) const {
    if (kind == "gaussian") return std::make_unique<GaussianPotential>(d, amplitude, sigma);
    if (kind == "zero") return std::make_unique<ZeroPotential>(d);
    throw ConfigError("potential.kind: unknown potential '" + kind + "'");
}

GaussianMixture ExperimentConfig::density() const {
    if (g.empty()) return GaussianMixture::standard(d);
    return GaussianMixture(g);
}

TestBank ExperimentConfig::bank() const {
    if (test_bank != "default") throw ConfigError("test_bank: unknown bank '" + test_bank + "'");
    return default_test_bank(d);
}

namespace {

const std::set<std::string> kKeys{
    "experiment", "d",          "potential",    "g",           "n_list",       "seeds",     "t_final",
    "dt",         "grid",       "k",            "K",           "epsilons",     "test_bank", "output_dir",
    "threads",    "second_order_cap", "fd_check_n", "ensemble_size", "record_times", "perturbation", "clamp",
    "exact_cap",  "write_snapshots"};

template <class T>
T get(const json& j, const std::string& key, const std::string& path) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + key + ": " + e.what());
    }
}

template <class T>
void read_opt(const json& j, const std::string& key, T& out, const std::string& path = "") {
    if (j.contains(key)) out = get<T>(j, key, path);
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    for (const auto& [key, value] : j.items())
        if (!kKeys.count(key)) throw ConfigError(key + ": unknown key");
    ExperimentConfig c;
    if (!j.contains("experiment")) throw ConfigError("experiment: required key missing");
    c.kind = experiment_kind_from_string(get<std::string>(j, "experiment", ""));
    read_opt(j, "d", c.d);
    if (j.contains("potential")) {
        const json& p = j["potential"];
        if (!p.is_object()) throw ConfigError("potential: must be an object");
        for (const auto& [key, value] : p.items())
            if (key != "kind" && key != "amplitude" && key != "sigma") throw ConfigError("potential." + key + ": unknown key");
        read_opt(p, "kind", c.potential.kind, "potential.");
        read_opt(p, "amplitude", c.potential.amplitude, "potential.");
        read_opt(p, "sigma", c.potential.sigma, "potential.");
    }
    if (j.contains("g")) {
        const json& g = j["g"];
        if (!g.is_object() || !g.contains("components") || !g["components"].is_array())
            throw ConfigError("g: expected an object with a 'components' array");
        for (std::size_t i = 0; i < g["components"].size(); ++i) {
            const json& cj = g["components"][i];
            const std::string path = "g.components[" + std::to_string(i) + "].";
            MixtureComponent comp;
            comp.weight = get<double>(cj, "weight", path);
            comp.mean = get<std::vector<double>>(cj, "mean", path);
            comp.stddev = get<std::vector<double>>(cj, "stddev", path);
            c.g.push_back(comp);
        }
    }
    read_opt(j, "n_list", c.n_list);
    read_opt(j, "seeds", c.seeds);
    read_opt(j, "t_final", c.t_final);
    read_opt(j, "dt", c.dt);
    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_object()) throw ConfigError("grid: must be an object");
        for (const auto& [key, value] : g.items())
            if (!std::set<std::string>{"x_min", "x_max", "v_min", "v_max", "nx", "nv"}.count(key))
                throw ConfigError("grid." + key + ": unknown key");
        read_opt(g, "x_min", c.grid.x_min, "grid.");
        read_opt(g, "x_max", c.grid.x_max, "grid.");
        read_opt(g, "v_min", c.grid.v_min, "grid.");
        read_opt(g, "v_max", c.grid.v_max, "grid.");
        read_opt(g, "nx", c.grid.nx, "grid.");
        read_opt(g, "nv", c.grid.nv, "grid.");
    }
    read_opt(j, "k", c.k);
    read_opt(j, "K", c.K);
    read_opt(j, "epsilons", c.epsilons);
    read_opt(j, "test_bank", c.test_bank);
    read_opt(j, "output_dir", c.output_dir);
    read_opt(j, "threads", c.threads);
    read_opt(j, "second_order_cap", c.second_order_cap);
    read_opt(j, "fd_check_n", c.fd_check_n);
    read_opt(j, "ensemble_size", c.ensemble_size);
    read_opt(j, "record_times", c.record_times);
    read_opt(j, "perturbation", c.perturbation);
    read_opt(j, "clamp", c.clamp);
    read_opt(j, "exact_cap", c.exact_cap);
    read_opt(j, "write_snapshots", c.write_snapshots);
    return c;
}

json config_to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = to_string(c.kind);
    j["d"] = c.d;
    j["potential"] = {{"kind", c.potential.kind}, {"amplitude", c.potential.amplitude}, {"sigma", c.potential.sigma}};
    json comps = json::array();
    const GaussianMixture g = c.density();
    for (const auto& comp : g.components())
        comps.push_back({{"weight", comp.weight}, {"mean", comp.mean}, {"stddev", comp.stddev}});
    j["g"] = {{"components", comps}};
    j["n_list"] = c.n_list;
    j["seeds"] = c.seeds;
    j["t_final"] = c.t_final;
    j["dt"] = c.dt;
    j["grid"] = {{"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}, {"v_min", c.grid.v_min},
                 {"v_max", c.grid.v_max}, {"nx", c.grid.nx},       {"nv", c.grid.nv}};
    j["k"] = c.k;
    j["K"] = c.K;
    j["epsilons"] = c.epsilons;
    j["test_bank"] = c.test_bank;
    j["output_dir"] = c.output_dir;
    j["threads"] = c.threads;
    j["second_order_cap"] = c.second_order_cap;
    j["fd_check_n"] = c.fd_check_n;
    j["ensemble_size"] = c.ensemble_size;
    j["record_times"] = c.record_times;
    j["perturbation"] = c.perturbation;
    j["clamp"] = c.clamp;
    j["exact_cap"] = c.exact_cap;
    j["write_snapshots"] = c.write_snapshots;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void apply_environment(ExperimentConfig& config) {
    if (const char* dir = std::getenv("MFSC_OUTPUT_DIR"); dir != nullptr && *dir != '\0') config.output_dir = dir;
    if (const char* th = std::getenv("MFSC_THREADS"); th != nullptr && *th != '\0') {
        char* end = nullptr;
        const long v = std::strtol(th, &end, 10);
        if (*end != '\0' || v < 0) throw ConfigError(std::string("MFSC_THREADS: not a non-negative integer: ") + th);
        config.threads = static_cast<int>(v);
    }
}

double mixture_tail_mass(const GaussianMixture& g, const GridSpec& spec) {
    double tail = 0.0;
    for (const auto& comp : g.components()) {
        const int dim = static_cast<int>(comp.mean.size());
        double log_inside = 0.0;
        for (int a = 0; a < dim; ++a) {
            const bool is_x = a < dim / 2;
            const double lo = is_x ? spec.x_min : spec.v_min;
            const double hi = is_x ? spec.x_max : spec.v_max;
            const double s = comp.stddev[a] * std::sqrt(2.0);
            const double out = 0.5 * std::erfc((hi - comp.mean[a]) / s) + 0.5 * std::erfc((comp.mean[a] - lo) / s);
            log_inside += std::log1p(-std::min(out, 1.0));
        }
        tail += comp.weight * -std::expm1(log_inside);
    }
    return tail;
}

void validate_config(const ExperimentConfig& c) {
    if (c.d < 1 || c.d > 3) throw ConfigError("d: must be 1, 2 or 3");
    const bool grid_kind = c.kind == ExperimentKind::Converge || c.kind == ExperimentKind::Remainder ||
                           c.kind == ExperimentKind::VlasovCheck;
    if (grid_kind && c.d != 1) throw ConfigError("d: grid experiments are implemented for d = 1 only");
    if (c.potential.kind != "gaussian" && c.potential.kind != "zero")
        throw ConfigError("potential.kind: unknown potential '" + c.potential.kind + "'");
    if (!(c.potential.sigma > 0.0) || !std::isfinite(c.potential.amplitude))
        throw ConfigError("potential: sigma must be positive and amplitude finite");

    double wsum = 0.0;
    for (std::size_t i = 0; i < c.g.size(); ++i) {
        const auto& comp = c.g[i];
        const std::string path = "g.components[" + std::to_string(i) + "]";
        if (!(comp.weight > 0.0)) throw ConfigError(path + ".weight: must be positive");
        if (comp.mean.size() != static_cast<std::size_t>(2 * c.d) || comp.stddev.size() != comp.mean.size())
            throw ConfigError(path + ": mean and stddev need 2d entries");
        for (double s : comp.stddev)
            if (!(s > 0.0)) throw ConfigError(path + ".stddev: must be positive");
        wsum += comp.weight;
    }
    if (!c.g.empty() && std::abs(wsum - 1.0) > 1e-12) throw ConfigError("g: component weights must sum to 1");

    if (c.n_list.empty()) throw ConfigError("n_list: must not be empty");
    for (std::size_t n : c.n_list)
        if (n < 2) throw ConfigError("n_list: every N must be at least 2");
    if (c.seeds.empty()) throw ConfigError("seeds: must not be empty");
    if (!(c.t_final > 0.0) || !std::isfinite(c.t_final)) throw ConfigError("t_final: must be positive");
    if (!(c.dt > 0.0) || c.dt > c.t_final) throw ConfigError("dt: must lie in (0, t_final]");
    if (c.k < 0) throw ConfigError("k: must be non-negative");
    if (c.k >= 2)
        throw ConfigError("k: N-particle tested quantities are implemented for k <= 1 (order-2 flow derivatives only)");
    if (c.K < 0 || c.K > 3) throw ConfigError("K: correction orders 0..3 are supported");
    if (c.kind == ExperimentKind::Converge && c.K < c.k) throw ConfigError("K: must be at least k");
    if (c.threads < 0) throw ConfigError("threads: must be non-negative");
    if (c.test_bank != "default") throw ConfigError("test_bank: unknown bank '" + c.test_bank + "'");
    if (!(c.clamp > 0.0)) throw ConfigError("clamp: must be positive");
    if (c.exact_cap < 1) throw ConfigError("exact_cap: must be positive");
    if (c.second_order_cap < 2) throw ConfigError("second_order_cap: must be at least 2");

    if (c.kind == ExperimentKind::Estimates)
        for (std::size_t n : c.n_list)
            if (n > c.second_order_cap)
                throw ConfigError("n_list: N = " + std::to_string(n) + " exceeds second_order_cap = " +
                                  std::to_string(c.second_order_cap));
    if (c.kind == ExperimentKind::Estimates && c.fd_check_n < 2) throw ConfigError("fd_check_n: must be at least 2");
    if (c.kind == ExperimentKind::Remainder) {
        if (c.epsilons.size() < 2) throw ConfigError("epsilons: at least two values are needed for a slope");
        for (double e : c.epsilons)
            if (!(e > 0.0)) throw ConfigError("epsilons: must be positive");
    }
    if (c.kind == ExperimentKind::Dobrushin) {
        if (c.record_times.size() < 2 || c.record_times.front() != 0.0)
            throw ConfigError("record_times: must start at 0 and contain a positive time");
        for (std::size_t i = 1; i < c.record_times.size(); ++i)
            if (!(c.record_times[i] > c.record_times[i - 1])) throw ConfigError("record_times: must be increasing");
        if (c.record_times.back() > c.t_final + 1e-12) throw ConfigError("record_times: must not exceed t_final");
        if (!(c.perturbation > 0.0) || c.perturbation >= 1.0) throw ConfigError("perturbation: must lie in (0, 1)");
    }
    if (c.kind == ExperimentKind::VlasovCheck && c.ensemble_size < 100)
        throw ConfigError("ensemble_size: at least 100 particles are needed for standard errors");

    if (grid_kind) {
        try {
            c.grid.validate();
        } catch (const Error& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
        const GaussianMixture g = c.density();
        // Resolution budget: every Gaussian width spans at least 8 cells.
        for (const auto& comp : g.components())
            if (comp.stddev[0] < 8.0 * c.grid.dx() || comp.stddev[1] < 8.0 * c.grid.dv())
                throw ConfigError("grid: a density component narrower than 8 cells is unresolved");
        if (c.potential.kind == "gaussian" && c.potential.sigma < 4.0 * c.grid.dx())
            throw ConfigError("grid: the potential width spans fewer than 4 cells");
        const double tail = mixture_tail_mass(g, c.grid);
        if (!(tail < 1e-10))
            throw ConfigError("grid: initial tail mass " + std::to_string(tail) + " outside the box exceeds 1e-10");
        const double vmax = std::max(std::abs(c.grid.v_min), std::abs(c.grid.v_max));
        if (vmax * c.dt > 4.0 * c.grid.dx()) throw ConfigError("dt: x-shift per step exceeds 4 cells");
    }
}

std::string config_hash(const ExperimentConfig& config) {
    json j = config_to_json(config);
    // Output location and thread count do not change the values.
    j.erase("output_dir");
    j.erase("threads");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

json config_schema() {
    auto num = [] { return json{{"type", "number"}}; };
    auto integer = [](int min) { return json{{"type", "integer"}, {"minimum", min}}; };
    auto num_array = [] { return json{{"type", "array"}, {"items", {{"type", "number"}}}}; };
    json component = {{"type", "object"},
                      {"required", {"weight", "mean", "stddev"}},
                      {"properties", {{"weight", num()}, {"mean", num_array()}, {"stddev", num_array()}}},
                      {"additionalProperties", false}};
    json grid = {{"type", "object"},
                 {"properties",
                  {{"x_min", num()}, {"x_max", num()}, {"v_min", num()}, {"v_max", num()}, {"nx", integer(8)},
                   {"nv", integer(8)}}},
                 {"additionalProperties", false}};
    return {
        {"$schema", "https://json-schema.org/draft/2020-12/schema"},
        {"title", "mfsc experiment config"},
        {"type", "object"},
        {"required", {"experiment"}},
        {"additionalProperties", false},
        {"properties",
         {{"experiment", {{"enum", {"converge", "estimates", "remainder", "dobrushin", "vlasov-check"}}}},
          {"d", {{"type", "integer"}, {"minimum", 1}, {"maximum", 3}}},
          {"potential",
           {{"type", "object"},
            {"properties", {{"kind", {{"enum", {"gaussian", "zero"}}}}, {"amplitude", num()}, {"sigma", num()}}},
            {"additionalProperties", false}}},
          {"g",
           {{"type", "object"},
            {"required", {"components"}},
            {"properties", {{"components", {{"type", "array"}, {"items", component}}}}}}},
          {"n_list", {{"type", "array"}, {"items", integer(2)}}},
          {"seeds", {{"type", "array"}, {"items", integer(0)}}},
          {"t_final", num()},
          {"dt", num()},
          {"grid", grid},
          {"k", {{"type", "integer"}, {"minimum", 0}, {"maximum", 1}}},
          {"K", {{"type", "integer"}, {"minimum", 0}, {"maximum", 3}}},
          {"epsilons", num_array()},
          {"test_bank", {{"enum", {"default"}}}},
          {"output_dir", {{"type", "string"}}},
          {"threads", integer(0)},
          {"second_order_cap", integer(2)},
          {"fd_check_n", integer(2)},
          {"ensemble_size", integer(100)},
          {"record_times", num_array()},
          {"perturbation", num()},
          {"clamp", num()},
          {"exact_cap", integer(1)},
          {"write_snapshots", {{"type", "boolean"}}}}}};
}

}  // namespace mfsc
