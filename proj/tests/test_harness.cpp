#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <string>

#include <doctest.h>

#include "mfsc/empirical.hpp"
#include "mfsc/errors.hpp"
#include "mfsc/harness.hpp"
#include "test_util.hpp"

using namespace mfsc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Closed form of the bump integrated against the standard Gaussian.
double bump_mean(const std::vector<double>& c, double s) {
    double r = 1.0;
    for (double ca : c) r *= s / std::sqrt(s * s + 1.0) * std::exp(-ca * ca / (2.0 * (s * s + 1.0)));
    return r;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mfsc_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_json(const fs::path& dir, const std::string& name, const json& j) {
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

int run_cli(const std::string& args, const fs::path& out_file) {
    const char* cli = std::getenv("MFSC_CLI");
    REQUIRE(cli != nullptr);
    const std::string cmd = std::string(cli) + " " + args + " > " + out_file.string() + " 2> " +
                            out_file.string() + ".err";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("counter generator") {
    CHECK(counter_uniform(3, 5, 7) == counter_uniform(3, 5, 7));
    CHECK(counter_uniform(3, 5, 7) != counter_uniform(3, 5, 8));
    CHECK(counter_uniform(3, 5, 7) != counter_uniform(4, 5, 7));
    double mean = 0.0, var = 0.0;
    const int m = 200000;
    for (int k = 0; k < m; ++k) {
        const double u = counter_uniform(11, 0, k);
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        const double z = counter_normal(11, 1, k);
        mean += z;
        var += z * z;
    }
    mean /= m;
    var /= m;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(m));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / m));
}

TEST_CASE("typical sampling") {
    const auto g = GaussianMixture::standard(1);
    const std::size_t n = 100000;
    const auto z = sample_typical(g, n, 42);
    double mx = 0.0, mv = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += z.x(i, 0);
        mv += z.v(i, 0);
        sxx += z.x(i, 0) * z.x(i, 0);
    }
    CHECK(std::abs(mx / n) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(mv / n) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(sxx / n - 1.0) < 4.0 * std::sqrt(2.0 / n));

    SUBCASE("deterministic and prefix-stable") {
        const auto a = sample_typical(g, 64, 9);
        const auto b = sample_typical(g, 64, 9);
        const auto c = sample_typical(g, 128, 9);
        CHECK(a.data() == b.data());
        for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(a.data()[i] == c.data()[i]);
        CHECK(sample_typical(g, 64, 10).data() != a.data());
    }

    SUBCASE("mixture weights") {
        const GaussianMixture mix({{0.25, {-3.0, 0.0}, {0.5, 0.5}}, {0.75, {3.0, 0.0}, {0.5, 0.5}}});
        const auto zm = sample_typical(mix, 40000, 5);
        std::size_t left = 0;
        for (std::size_t i = 0; i < zm.size(); ++i) left += zm.x(i, 0) < 0.0;
        const double p = double(left) / zm.size();
        CHECK(std::abs(p - 0.25) < 4.0 * std::sqrt(0.25 * 0.75 / zm.size()));
    }

    SUBCASE("tested error shrinks under doubling") {
        const std::vector<double> c{0.5, -0.3};
        const double s = 0.8;
        const GaussianBump u(c, s);
        const double exact = bump_mean(c, s);
        double prev = 1e300;
        for (std::size_t nn : {128, 512, 2048, 8192}) {
            double err = 0.0;
            for (std::uint64_t seed = 1; seed <= 8; ++seed) err += std::abs(test_empirical(u, sample_typical(g, nn, seed)) - exact);
            err /= 8.0;
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev < 0.02);
    }
}

TEST_CASE("tested quantity nu_1") {
    GaussianPotential phi(1);
    const auto g = GaussianMixture::standard(1);
    const auto z0 = sample_typical(g, 32, 3);
    const auto bank = default_test_bank(1);

    SUBCASE("constant observable") {
        ConstantFunction one(2, 1.0);
        CHECK(nu_1(0, one, z0, phi, 0.5, 1e-2) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(nu_1(1, one, z0, phi, 0.5, 1e-2)) <= 1e-14);
    }

    SUBCASE("k = 1 at t = 0 is the Gaussian derivation of u") {
        for (const auto& u : bank.functions) {
            const double lhs = nu_1(1, *u, z0, phi, 0.0, 1e-3);
            const double rhs = test_empirical(*apply_DG_to_test(u, 1), z0);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12).scale(1e-12));
        }
    }

    SUBCASE("k = 1 under free flow") {
        ZeroPotential zero(1);
        const double t = 0.7;
        for (const auto& u : bank.functions) {
            double expect = 0.0, h[4];
            for (std::size_t j = 0; j < z0.size(); ++j) {
                const std::vector<double> zt{z0.x(j, 0) + t * z0.v(j, 0), z0.v(j, 0)};
                u->hessian(zt, h);
                expect += 0.25 * ((1.0 + t * t) * h[0] + 2.0 * t * h[1] + h[3]);
            }
            expect /= double(z0.size());
            CHECK(nu_1(1, *u, z0, zero, t, 1e-2) == doctest::Approx(expect).epsilon(1e-11).scale(1e-11));
        }
    }

    SUBCASE("unsupported orders") {
        CHECK_THROWS_AS(nu_1(2, *bank.functions[0], z0, phi, 0.5, 1e-2), UnsupportedOrder);
        CHECK_THROWS_AS(nu_1(3, *bank.functions[0], z0, phi, 0.5, 1e-2), UnsupportedOrder);
    }

    SUBCASE("particle relabelling") {
        Configuration rev(1, z0.size());
        for (std::size_t i = 0; i < z0.size(); ++i) rev.set_point(i, z0.phase_point(z0.size() - 1 - i));
        for (int k : {0, 1}) {
            const double a = nu_1(k, *bank.functions[5], z0, phi, 0.4, 1e-2);
            const double b = nu_1(k, *bank.functions[5], rev, phi, 0.4, 1e-2);
            CHECK(a == doctest::Approx(b).epsilon(1e-12).scale(1e-12));
        }
    }
}

TEST_CASE("config parsing and validation") {
    const json base{{"experiment", "converge"}, {"n_list", {64, 128}}, {"seeds", {1, 2}}};
    const ExperimentConfig c = config_from_json(base);
    CHECK(c.kind == ExperimentKind::Converge);
    CHECK(c.n_list == std::vector<std::size_t>{64, 128});
    CHECK(c.t_final == 1.0);
    CHECK_NOTHROW(validate_config(c));

    SUBCASE("round trip") {
        const ExperimentConfig back = config_from_json(config_to_json(c));
        CHECK(config_to_json(back) == config_to_json(c));
        CHECK(config_hash(back) == config_hash(c));
    }

    SUBCASE("hash ignores output location and threads") {
        ExperimentConfig d = c;
        d.output_dir = "elsewhere";
        d.threads = 3;
        CHECK(config_hash(d) == config_hash(c));
        d.dt = 2e-3;
        CHECK(config_hash(d) != config_hash(c));
        CHECK(config_hash(c).size() == 16);
    }

    SUBCASE("rejections") {
        auto bad = [&](json patch) {
            json j = base;
            j.merge_patch(patch);
            return j;
        };
        CHECK_THROWS_AS(config_from_json(bad({{"bogus", 1}})), ConfigError);
        CHECK_THROWS_AS(config_from_json(bad({{"experiment", "nope"}})), ConfigError);
        CHECK_THROWS_AS(config_from_json(bad({{"dt", "fast"}})), ConfigError);
        CHECK_THROWS_AS(config_from_json(bad({{"grid", {{"nz", 4}}}})), ConfigError);
        CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
        CHECK_THROWS_AS(validate_config(config_from_json(bad({{"k", 2}, {"K", 2}}))), ConfigError);
        CHECK_THROWS_AS(validate_config(config_from_json(bad({{"k", 1}, {"K", 0}}))), ConfigError);
        CHECK_THROWS_AS(validate_config(config_from_json(bad({{"d", 2}}))), ConfigError);
        CHECK_THROWS_AS(validate_config(config_from_json(bad({{"dt", 0.0}}))), ConfigError);
        CHECK_THROWS_AS(validate_config(config_from_json(bad({{"grid", {{"nx", 32}, {"nv", 32}}}}))), ConfigError);
        CHECK_THROWS_AS(validate_config(config_from_json(bad({{"grid", {{"x_min", -3.0}, {"x_max", 3.0}}}}))),
                        ConfigError);
        CHECK_THROWS_AS(validate_config(config_from_json(bad({{"dt", 0.1}}))), ConfigError);
        json weights = bad({});
        weights["g"] = {{"components", json::array({{{"weight", 0.6}, {"mean", {0, 0}}, {"stddev", {1, 1}}},
                                                     {{"weight", 0.6}, {"mean", {0, 0}}, {"stddev", {1, 1}}}})}};
        CHECK_THROWS_AS(validate_config(config_from_json(weights)), ConfigError);

        json est{{"experiment", "estimates"}, {"n_list", {64, 1024}}};
        CHECK_THROWS_AS(validate_config(config_from_json(est)), ConfigError);
        json rem{{"experiment", "remainder"}, {"epsilons", {0.1}}};
        CHECK_THROWS_AS(validate_config(config_from_json(rem)), ConfigError);
        json dob{{"experiment", "dobrushin"}, {"record_times", {0.0, 0.5, 0.25}}};
        CHECK_THROWS_AS(validate_config(config_from_json(dob)), ConfigError);
    }

    SUBCASE("environment overrides") {
        ExperimentConfig e = c;
        setenv("MFSC_OUTPUT_DIR", "/tmp/mfsc_env_out", 1);
        setenv("MFSC_THREADS", "2", 1);
        apply_environment(e);
        CHECK(e.output_dir == "/tmp/mfsc_env_out");
        CHECK(e.threads == 2);
        setenv("MFSC_THREADS", "two", 1);
        CHECK_THROWS_AS(apply_environment(e), ConfigError);
        unsetenv("MFSC_OUTPUT_DIR");
        unsetenv("MFSC_THREADS");
    }

    SUBCASE("schema lists every key") {
        const json s = config_schema();
        const json dumped = config_to_json(c);
        for (const auto& [key, value] : dumped.items()) CHECK(s["properties"].contains(key));
        CHECK(s["required"] == json::array({"experiment"}));
    }
}

TEST_CASE("tail mass") {
    GridSpec spec;
    const auto g = GaussianMixture::standard(1);
    const double expect = 1.0 - std::pow(std::erf(8.0 / std::sqrt(2.0)), 2);
    CHECK(mixture_tail_mass(g, spec) == doctest::Approx(expect).epsilon(1e-6));
    spec.x_min = -2.0;
    spec.x_max = 2.0;
    CHECK(mixture_tail_mass(g, spec) == doctest::Approx(std::erfc(2.0 / std::sqrt(2.0))).epsilon(1e-9));
}

TEST_CASE("result tables") {
    ResultTable t;
    t.columns = {"name", "value"};
    t.add_row({"plain", format_number(0.1)});
    t.add_row({"a,b \"q\"", format_number(-2.5e-300)});
    CHECK_THROWS_AS(t.add_row({"short"}), PreconditionFailed);
    CHECK(t.number(0, "value") == 0.1);
    CHECK(t.number(1, "value") == -2.5e-300);
    CHECK_THROWS_AS(t.column("missing"), OutOfRange);
    std::ostringstream out;
    t.write_csv(out);
    CHECK(out.str() == "name,value\nplain,0.1\n\"a,b \"\"q\"\"\",-2.5e-300\n");
}

TEST_CASE("parallel_for") {
    for (int threads : {1, 2, 4}) {
        std::vector<double> out(257, 0.0);
        parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = std::sqrt(double(i)); });
        for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == std::sqrt(double(i)));
    }
    CHECK_THROWS_AS(parallel_for(8, 2, [](std::size_t i) {
                        if (i == 5) throw Divergence("boom", 0);
                    }),
                    Divergence);
}

TEST_CASE("particle ensemble") {
    GridSpec spec;
    spec.nx = spec.nv = 128;
    const auto g = GaussianMixture::standard(1);
    const auto z0 = sample_typical(g, 20000, 4);

    SUBCASE("free streaming") {
        ZeroPotential zero(1);
        const auto zt = evolve_particle_ensemble(z0, zero, spec, 0.5, 0.01);
        for (std::size_t i = 0; i < zt.size(); i += 997) {
            CHECK(zt.v(i, 0) == doctest::Approx(z0.v(i, 0)).epsilon(1e-14));
            CHECK(zt.x(i, 0) == doctest::Approx(z0.x(i, 0) + 0.5 * z0.v(i, 0)).epsilon(1e-12).scale(1e-12));
        }
    }

    SUBCASE("momentum conservation") {
        GaussianPotential phi(1);
        const auto zt = evolve_particle_ensemble(z0, phi, spec, 0.5, 0.01);
        double p0 = 0.0, p1 = 0.0;
        for (std::size_t i = 0; i < z0.size(); ++i) {
            p0 += z0.v(i, 0);
            p1 += zt.v(i, 0);
        }
        CHECK(std::abs(p1 - p0) / z0.size() < 1e-3);
    }
}

TEST_CASE("small experiments") {
    RunContext ctx;
    ctx.threads = 1;

    SUBCASE("convergence k = 1") {
        ExperimentConfig c;
        c.n_list = {16, 64};
        c.seeds = {1, 2};
        c.t_final = 0.25;
        c.dt = 5e-3;
        c.grid.nx = c.grid.nv = 128;
        c.k = 1;
        c.K = 1;
        c.second_order_cap = 32;
        validate_config(c);
        const auto r = run_convergence(c, ctx);
        CHECK(r.skipped_n == std::vector<std::size_t>{64});
        CHECK(r.cells.size() == 2);
        CHECK(r.summary.size() == 2);
        CHECK(r.reference1.size() == c.bank().size());
        for (const auto& cell : r.cells) CHECK(cell.nu1.size() == c.bank().size());
        CHECK(r.summary[0].prefactor == doctest::Approx(15.0 / 16.0));
    }

    SUBCASE("dobrushin") {
        ExperimentConfig c;
        c.kind = ExperimentKind::Dobrushin;
        c.n_list = {32, 64};
        c.seeds = {1, 2};
        c.t_final = 0.5;
        c.dt = 1e-2;
        c.record_times = {0.0, 0.25, 0.5};
        validate_config(c);
        const auto r = run_dobrushin(c, ctx);
        REQUIRE(r.rows.size() == 2);
        for (const auto& row : r.rows) {
            CHECK(row.fit.C > 0.0);
            CHECK(row.fit.violations.empty());
            // W(t=0) equals delta times the mean clamped norm of the particles.
            CHECK(row.distances[0][0] > 0.0);
        }
        CHECK(r.max_relative_change >= 0.0);
    }

    SUBCASE("vlasov check") {
        ExperimentConfig c;
        c.kind = ExperimentKind::VlasovCheck;
        c.seeds = {1};
        c.t_final = 0.5;
        c.dt = 1e-2;
        c.grid.nx = c.grid.nv = 128;
        c.ensemble_size = 40000;
        validate_config(c);
        const auto r = run_vlasov_check(c, ctx);
        CHECK(r.rows.size() == c.bank().size());
        CHECK(r.max_z() < 5.0);
        CHECK(r.mass_drift < 1e-10);
    }
}

TEST_CASE("command line") {
    const fs::path dir = scratch_dir("cli");
    const json demo{{"experiment", "converge"}, {"n_list", {32, 128, 512}}, {"seeds", {1, 2, 3, 4}},
                    {"t_final", 0.25},          {"dt", 5e-3},              {"grid", {{"nx", 128}, {"nv", 128}}},
                    {"k", 0},                   {"K", 0},                  {"write_snapshots", false}};
    const fs::path cfg = write_json(dir, "demo.json", demo);

    SUBCASE("validate-config echoes resolved parameters") {
        CHECK(run_cli("validate-config " + cfg.string(), dir / "v.out") == kExitOk);
        const json out = json::parse(slurp(dir / "v.out"));
        CHECK(out["dt"] == 5e-3);
        CHECK(out["config_hash"] == config_hash(config_from_json(demo)));
    }

    SUBCASE("usage and validation errors exit 2") {
        CHECK(run_cli("bogus", dir / "u.out") == kExitValidation);
        CHECK(run_cli("", dir / "u.out") == kExitValidation);
        json bad = demo;
        bad["k"] = 2;
        bad["K"] = 2;
        CHECK(run_cli("converge " + write_json(dir, "bad.json", bad).string() + " -q", dir / "b.out") ==
              kExitValidation);
        const json diag = json::parse(slurp(dir / "b.out.err"));
        CHECK(diag["error"] == "ConfigError");
        CHECK(run_cli("estimates " + cfg.string() + " -q", dir / "m.out") == kExitValidation);
    }

    SUBCASE("schema") {
        CHECK(run_cli("schema", dir / "s.out") == kExitOk);
        CHECK(json::parse(slurp(dir / "s.out")).contains("properties"));
    }

    SUBCASE("converge run writes tables") {
        REQUIRE(run_cli("converge " + cfg.string() + " -q -o " + (dir / "runs").string(), dir / "r.out") == kExitOk);
        std::string run_dir = slurp(dir / "r.out");
        run_dir.erase(run_dir.find_last_not_of('\n') + 1);
        CHECK(run_dir == (dir / "runs" / ("converge-" + config_hash(config_from_json(demo)))).string());
        const auto summary = read_csv(fs::path(run_dir) / "summary.csv");
        REQUIRE(summary.size() == 4);
        CHECK(summary[0][2] == "mean_max_error");
        const double e32 = std::stod(summary[1][2]), e512 = std::stod(summary[3][2]);
        CHECK(e512 < e32);
        const json record = json::parse(slurp(fs::path(run_dir) / "run.json"));
        CHECK(record["software_version"] == kSoftwareVersion);
        CHECK(record["config_hash"] == config_hash(config_from_json(demo)));
        CHECK(fs::exists(fs::path(run_dir) / "results.csv"));
    }
}
