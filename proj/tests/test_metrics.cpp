#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <doctest.h>

#include "mfsc/density.hpp"
#include "mfsc/errors.hpp"
#include "mfsc/metrics.hpp"
#include "test_util.hpp"

using namespace mfsc;

namespace {

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, int dim, double spread, double shift = 0.0) {
    std::normal_distribution<double> g(0.0, spread);
    PointCloud p;
    p.dim = dim;
    for (std::size_t i = 0; i < n * dim; ++i) p.coords.push_back(g(rng) + (i % dim == 0 ? shift : 0.0));
    p.weights.assign(n, 1.0 / n);
    return p;
}

double brute_force_assignment(const PointCloud& p, const PointCloud& q) {
    const std::size_t n = p.size();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += clamped_distance(p.point(i), q.point(perm[i]), p.dim);
        best = std::min(best, s / n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// O(n^3) Hungarian method (potentials form) for square cost matrices.
double hungarian(const std::vector<double>& cost, int n) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j)
                if (!used[j]) {
                    const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if (cur < minv[j]) {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if (minv[j] < delta) {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            for (int j = 0; j <= n; ++j)
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j) total += cost[(p[j] - 1) * n + (j - 1)];
    return total;
}

std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
    return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("wasserstein: trivial couplings and the clamp") {
    std::mt19937_64 rng(3);
    const PointCloud p = random_cloud(rng, 20, 2, 1.0);
    CHECK(wasserstein_bounded(p, p) <= 1e-14);

    PointCloud a{2, {0.0, 0.0}, {1.0}}, b{2, {0.3, 0.4}, {1.0}};
    CHECK(wasserstein_bounded(a, b) == doctest::Approx(0.5).epsilon(1e-14));
    PointCloud far{2, {30.0, 0.0}, {1.0}};
    CHECK(wasserstein_bounded(a, far) == 1.0);

    PointCloud bad = a;
    bad.weights = {0.5};
    CHECK_THROWS_AS(wasserstein_bounded(bad, b), PreconditionFailed);
    PointCloud big = random_cloud(rng, 1025, 2, 1.0);
    CHECK_THROWS_AS(wasserstein_bounded(big, p), CapacityExceeded);
}

TEST_CASE("wasserstein: equals exhaustive assignment on small equal-weight clouds") {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 6; ++n)
        for (int rep = 0; rep < 40; ++rep) {
            const double spread = (rep % 4 == 0) ? 2.0 : 0.4;
            const PointCloud p = random_cloud(rng, n, 2, spread), q = random_cloud(rng, n, 2, spread, 0.2);
            worst = std::max(worst, std::abs(wasserstein_bounded(p, q) - brute_force_assignment(p, q)));
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("wasserstein: unequal weights match the replicated uniform problem") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> mult(1, 3);
    for (int rep = 0; rep < 30; ++rep) {
        // Weights k/6 become k copies of an atom of mass 1/6.
        auto make = [&](double shift) {
            PointCloud w, u;
            w.dim = u.dim = 2;
            int left = 6;
            std::normal_distribution<double> g(0.0, 0.6);
            while (left > 0) {
                const int k = std::min(left, mult(rng));
                const double x = g(rng) + shift, v = g(rng);
                w.coords.insert(w.coords.end(), {x, v});
                w.weights.push_back(k / 6.0);
                for (int c = 0; c < k; ++c) {
                    u.coords.insert(u.coords.end(), {x, v});
                    u.weights.push_back(1.0 / 6.0);
                }
                left -= k;
            }
            return std::pair{w, u};
        };
        auto [pw, pu] = make(0.0);
        auto [qw, qu] = make(0.3);
        CHECK(wasserstein_bounded(pw, qw) == doctest::Approx(brute_force_assignment(pu, qu)).epsilon(1e-12));
    }
}

TEST_CASE("wasserstein: agrees with a Hungarian assignment on larger clouds") {
    std::mt19937_64 rng(17);
    for (int n : {50, 120}) {
        const PointCloud p = random_cloud(rng, n, 2, 1.0), q = random_cloud(rng, n, 2, 1.0, 0.5);
        std::vector<double> cost(n * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) cost[i * n + j] = clamped_distance(p.point(i), q.point(j), 2);
        CHECK(wasserstein_bounded(p, q) == doctest::Approx(hungarian(cost, n) / n).epsilon(1e-12));
    }
    // Unequal sizes: transporting 1/n atoms into 1/m atoms at the lcm scale.
    const PointCloud p = random_cloud(rng, 6, 2, 1.0), q = random_cloud(rng, 4, 2, 1.0, 0.4);
    PointCloud pu{2, {}, {}}, qu{2, {}, {}};
    for (std::size_t i = 0; i < 6; ++i)
        for (int c = 0; c < 2; ++c) pu.coords.insert(pu.coords.end(), {p.point(i)[0], p.point(i)[1]});
    for (std::size_t j = 0; j < 4; ++j)
        for (int c = 0; c < 3; ++c) qu.coords.insert(qu.coords.end(), {q.point(j)[0], q.point(j)[1]});
    pu.weights.assign(12, 1.0 / 12);
    qu.weights.assign(12, 1.0 / 12);
    std::vector<double> cost(144);
    for (int i = 0; i < 12; ++i)
        for (int j = 0; j < 12; ++j) cost[i * 12 + j] = clamped_distance(pu.point(i), qu.point(j), 2);
    CHECK(wasserstein_bounded(p, q) == doctest::Approx(hungarian(cost, 12) / 12).epsilon(1e-12));
}

TEST_CASE("wasserstein: metric properties") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> size(1, 40);
    for (int rep = 0; rep < 60; ++rep) {
        const PointCloud a = random_cloud(rng, size(rng), 2, 0.8), b = random_cloud(rng, size(rng), 2, 0.8, 0.3),
                         c = random_cloud(rng, size(rng), 2, 1.5, -0.2);
        const double ab = wasserstein_bounded(a, b), ba = wasserstein_bounded(b, a);
        const double bc = wasserstein_bounded(b, c), ac = wasserstein_bounded(a, c);
        CHECK(std::abs(ab - ba) <= 1e-12);
        CHECK(ac <= ab + bc + 1e-10);
        CHECK(ab >= 0.0);
        CHECK(ab <= 1.0);
    }
    // Zero iff equal: permuting the support gives 0; moving one atom does not.
    PointCloud a = random_cloud(rng, 30, 2, 1.0);
    PointCloud perm = a;
    std::vector<int> order(30);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int i = 0; i < 30; ++i)
        for (int k = 0; k < 2; ++k) perm.coords[i * 2 + k] = a.coords[order[i] * 2 + k];
    CHECK(wasserstein_bounded(a, perm) <= 1e-14);
    PointCloud moved = a;
    moved.coords[0] += 1e-3;
    CHECK(wasserstein_bounded(a, moved) > 0.0);
    CHECK(wasserstein_bounded(a, moved) <= 1e-3 / 30 + 1e-15);
}

TEST_CASE("wasserstein: exact solver handles the cap size") {
    std::mt19937_64 rng(29);
    const PointCloud p = random_cloud(rng, 1024, 2, 1.0), q = random_cloud(rng, 1024, 2, 1.0, 0.25);
    const auto t0 = std::chrono::steady_clock::now();
    const double w = wasserstein_bounded(p, q);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    MESSAGE("1024x1024 exact W = " << w << " in " << secs << " s");
    // Any coupling is an upper bound; the sliced value of matched projections
    // is a lower bound only up to the clamp, so compare with the identity matching.
    double identity = 0.0;
    for (std::size_t i = 0; i < 1024; ++i) identity += clamped_distance(p.point(i), q.point(i), 2) / 1024;
    CHECK(w <= identity);
    CHECK(w > 0.1);
}

TEST_CASE("sliced wasserstein") {
    std::mt19937_64 rng(31);
    const PointCloud p = random_cloud(rng, 200, 2, 1.0);
    CHECK(sliced_wasserstein(p, p, 16, 1) == 0.0);
    const PointCloud q = random_cloud(rng, 150, 2, 1.0, 0.4);
    CHECK(sliced_wasserstein(p, q, 16, 7) == sliced_wasserstein(p, q, 16, 7));

    SUBCASE("one-dimensional clouds reduce to the sorted coupling") {
        const PointCloud a = random_cloud(rng, 64, 1, 1.0), b = random_cloud(rng, 64, 1, 1.0, 0.3);
        std::vector<double> sa(a.coords), sb(b.coords);
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        double expect = 0.0;
        for (int i = 0; i < 64; ++i) expect += std::min(std::abs(sa[i] - sb[i]), 1.0) / 64;
        CHECK(sliced_wasserstein(a, b, 1, 99) == doctest::Approx(expect).epsilon(1e-13));
        // With every pairwise gap below the clamp the cost is |x - y|, for which
        // the sorted coupling is optimal, so the exact solver must agree.
        const PointCloud c = random_cloud(rng, 64, 1, 0.08), e = random_cloud(rng, 64, 1, 0.08, 0.1);
        const auto [cmin, cmax] = std::minmax_element(c.coords.begin(), c.coords.end());
        const auto [emin, emax] = std::minmax_element(e.coords.begin(), e.coords.end());
        REQUIRE(std::max(*cmax, *emax) - std::min(*cmin, *emin) < 1.0);
        CHECK(sliced_wasserstein(c, e, 1, 3) == doctest::Approx(wasserstein_bounded(c, e)).epsilon(1e-12));
    }

    SUBCASE("rank correlation with the exact solver") {
        std::uniform_int_distribution<int> size(8, 64);
        std::uniform_real_distribution<double> shift(0.0, 1.5);
        std::vector<double> exact, sliced;
        for (int rep = 0; rep < 100; ++rep) {
            const PointCloud a = random_cloud(rng, size(rng), 2, 0.5);
            const PointCloud b = random_cloud(rng, size(rng), 2, 0.5, shift(rng));
            exact.push_back(wasserstein_bounded(a, b));
            sliced.push_back(sliced_wasserstein(a, b, 64, rep));
        }
        const double rho = pearson(ranks(exact), ranks(sliced));
        MESSAGE("Spearman rank correlation " << rho);
        CHECK(rho > 0.95);
    }
}

TEST_CASE("grid versus cloud distances") {
    GridSpec spec;
    spec.nx = spec.nv = 128;
    const GaussianMixture g = GaussianMixture::standard(1);
    const GridFunction f = g.sample(spec);
    const TestBank bank = default_test_bank(1);

    SUBCASE("i.i.d. sample is within the Monte-Carlo error") {
        const std::size_t n = 10000;
        const Configuration z = testutil::gaussian_configuration(1, n, 41);
        const PointCloud p = PointCloud::from_configuration(z);
        double max_se = 0.0;
        for (std::size_t k = 0; k < bank.size(); ++k) {
            double s = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double u = bank[k].value(z.point(i));
                s += u;
                s2 += u * u;
            }
            const double mean = s / n;
            max_se = std::max(max_se, std::sqrt((s2 / n - mean * mean) / n));
        }
        const double dist = grid_vs_cloud_distance(f, p, GridDistanceMode::TestBank, &bank);
        MESSAGE("test-bank distance " << dist << ", max standard error " << max_se);
        CHECK(dist < 4.0 * max_se);
    }

    SUBCASE("a grid is at distance zero from its own quantization") {
        const PointCloud q = quantize(f, 1024);
        CHECK(q.size() <= 1024);
        CHECK(grid_vs_cloud_distance(f, q, GridDistanceMode::Quantized) <= 1e-14);
        GridSpec small = spec;
        small.nx = small.nv = 32;
        const GridFunction fs = g.sample(small);
        CHECK(quantize(fs, 1024).size() == 32u * 32u);
        CHECK(grid_vs_cloud_distance(fs, quantize(fs, 1024), GridDistanceMode::Quantized) <= 1e-14);
    }

    SUBCASE("translation is detected by the steepest bank member") {
        // c = max_u |int d_x u f|, the first-order response to a shift in x.
        double c = 0.0;
        for (std::size_t k = 0; k < bank.size(); ++k) {
            double s = 0.0;
            for (int i = 0; i < spec.nx; ++i)
                for (int j = 0; j < spec.nv; ++j) {
                    const double zz[2] = {spec.x(i), spec.v(j)};
                    double grad[2];
                    bank[k].gradient(zz, grad);
                    s += grad[0] * f(i, j) * spec.cell_area();
                }
            c = std::max(c, std::abs(s));
        }
        const PointCloud q = quantize(f, spec.size());
        for (double delta : {0.02, 0.05, 0.1}) {
            MixtureComponent comp{1.0, {delta, 0.0}, {1.0, 1.0}};
            const GridFunction shifted = GaussianMixture({comp}).sample(spec);
            const double dist = grid_vs_cloud_distance(shifted, q, GridDistanceMode::TestBank, &bank);
            CHECK(dist >= 0.9 * c * delta);
        }
    }
}

TEST_CASE("dobrushin fit") {
    const std::vector<double> times{0.0, 0.25, 0.5, 0.75, 1.0};
    auto evolve = [&](double dx, double dv) {
        // Free flow of two point masses (0,0) and (dx,dv).
        std::vector<double> w;
        for (double t : times) {
            PointCloud a{2, {0.0, 0.0}, {1.0}}, b{2, {dx + dv * t, dv}, {1.0}};
            w.push_back(wasserstein_bounded(a, b));
        }
        return w;
    };
    SUBCASE("x offset is preserved") {
        const DobrushinFit fit = dobrushin_fit({evolve(0.3, 0.0)}, times);
        CHECK(fit.C == 0.0);
        CHECK(fit.pairs_used == 1);
    }
    SUBCASE("v offset grows like sqrt(1 + t^2)") {
        const double delta = 0.1;
        const DobrushinFit fit = dobrushin_fit({evolve(0.0, delta)}, times);
        double expect = 0.0;
        for (std::size_t k = 1; k < times.size(); ++k)
            expect = std::max(expect, 0.5 * std::log1p(times[k] * times[k]) / times[k]);
        CHECK(fit.C == doctest::Approx(expect).epsilon(1e-12));
        CHECK(fit.C < 0.5);
    }
    SUBCASE("degenerate pairs are excluded and separations flagged") {
        const DobrushinFit fit = dobrushin_fit({evolve(0.2, 0.05), {0.0, 0.0, 0.0, 0.0, 0.0}, {0.0, 0, 1e-3, 0, 0}}, times);
        CHECK(fit.pairs_used == 1);
        CHECK(fit.warnings.size() == 2);
        CHECK(fit.violations.size() == 1);
        CHECK_THROWS_AS(dobrushin_fit({{0.0, 0.0, 0.0, 0.0, 0.0}}, times), PreconditionFailed);
    }
}
