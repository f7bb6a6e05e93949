#include "doctest.h"

#include "erosion/errors.hpp"
#include "erosion/green.hpp"
#include "erosion/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace erosion;

namespace {

// Dense oracle: ground vertex 0, solve, then shift to degree-weighted mean zero.
std::vector<double> dense_green(const LatticeDomain& lat) {
    const int nv = lat.size();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(nv, nv);
    for (const auto& e : lat.graph().edges()) {
        L(e[0], e[0]) += 1;
        L(e[1], e[1]) += 1;
        L(e[0], e[1]) -= 1;
        L(e[1], e[0]) -= 1;
    }
    const auto f = green_source(lat);
    Eigen::VectorXd b(nv);
    for (int v = 0; v < nv; ++v) b[v] = lat.degree(v) * f[v];
    Eigen::MatrixXd A = L.bottomRightCorner(nv - 1, nv - 1);
    Eigen::VectorXd x = A.ldlt().solve(b.tail(nv - 1));
    std::vector<double> u(nv, 0.0);
    for (int v = 1; v < nv; ++v) u[v] = x[v - 1];
    double ds = 0, ws = 0;
    for (int v = 0; v < nv; ++v) {
        ds += lat.degree(v);
        ws += lat.degree(v) * u[v];
    }
    for (double& y : u) y -= ws / ds;
    return u;
}

Configuration random_config(const LatticeDomain& lat, int k, std::uint64_t seed) {
    std::vector<int> ids(lat.size());
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(seed, 0, Rng::tag("test-config"));
    for (int i = 0; i < k; ++i) std::swap(ids[i], ids[i + rng.uniform_index(lat.size() - i)]);
    RegionMask blue(lat.size());
    for (int i = 0; i < k; ++i) blue.set(ids[i]);
    return Configuration::from_blue_mask(blue);
}

Configuration level_config(const LatticeDomain& lat, double alpha) {
    return Configuration::from_blue_mask(level_region_mask(lat, beta_of_alpha(lat.domain(), alpha)));
}

} // namespace

TEST_CASE("green field matches the dense solve") {
    const auto d = SmoothDomain::disc();
    for (auto lat : {discretize_n(d, 8, 0.5), discretize(d, 3, 0.4), discretize(d, 4, 0.25),
                     discretize(SmoothDomain::quadratic(0.3), 4, 0.3)}) {
        const auto field = solve_green(lat);
        const auto ref = dense_green(lat);
        double err = 0.0;
        for (int v = 0; v < lat.size(); ++v)
            err = std::max(err, std::abs(field[v] + field.centering - ref[v]));
        CHECK(err <= 1e-8);
        CHECK(field.max_residual <= 1e-9);
    }
}

TEST_CASE("laplacian identity and compatibility") {
    const auto lat = discretize(SmoothDomain::quadratic(0.3), 5, 0.2);
    const auto field = solve_green(lat);
    const auto lap = normalized_laplacian(lat.graph(), field.values);
    double compat = 0.0;
    for (int v = 0; v < lat.size(); ++v) compat += lat.degree(v) * lap[v];
    CHECK(std::abs(compat) <= 1e-9);
    Rng rng(5, 0, 0);
    int checked = 0;
    while (checked < 20) {
        const int v = static_cast<int>(rng.uniform_index(lat.size()));
        if (lat.blob_label(v) != 0) continue;
        CHECK(std::abs(lap[v]) <= 1e-9);
        ++checked;
    }
}

TEST_CASE("disc field is antisymmetric") {
    const auto lat = discretize(SmoothDomain::disc(), 5, 0.2);
    const auto field = solve_green(lat);
    double worst = 0.0;
    for (int v = 0; v < lat.size(); ++v) {
        const auto c = lat.coord(v);
        const int w = lat.vertex_at(-c.ix, -c.iy);
        REQUIRE(w >= 0);
        worst = std::max(worst, std::abs(field[v] + field[w]));
    }
    CHECK(worst <= 1e-6);
    CHECK(std::abs(field.centering) <= 1e-6);
    CHECK(field[lat.blob_center(1)] > 0);
}

TEST_CASE("neumann solver rejects incompatible data") {
    std::vector<std::array<int, 2>> edges{{0, 1}, {1, 2}};
    auto g = Graph::from_edges(3, edges);
    CHECK_THROWS_AS(solve_neumann(g, {1.0, 0.0, 0.0}), ArgumentError);
}

TEST_CASE("occupation-time oracle") {
    const auto lat = discretize_n(SmoothDomain::disc(), 8, 0.5);
    const auto field = solve_green(lat);
    const auto horizon = occupation_horizon(lat.n());
    CHECK_THROWS_AS(occupation_green_mc(lat, 0, 100, horizon - 1, 1), ArgumentError);
    const int probes[] = {lat.blob_center(1), lat.nearest_vertex(0.0), lat.blob_center(2),
                          lat.nearest_vertex(cplx(0.5, -0.25)), lat.nearest_vertex(cplx(-0.75, 0.5))};
    std::uint64_t seed = 11;
    for (int x : probes) {
        const auto est = occupation_green_mc(lat, x, 100000, horizon, seed++);
        CHECK(std::abs(est.estimate - (field[x] + field.centering)) <= 3 * est.stderr_);
    }
    const auto deep = occupation_green_mc(lat, lat.blob_center(1), 20000, horizon, 99);
    CHECK(deep.estimate > 0);
}

TEST_CASE("continuum green function") {
    const auto d = SmoothDomain::disc();
    const ContinuumGreen g(d, inward_point(d, d.x1(), 0.2), inward_point(d, d.x2(), 0.2), 0.05);
    CHECK(std::abs(g(0.0)) < 1e-9);
    CHECK(g.source_density(inward_point(d, d.x2(), 0.2)) > 0);
    CHECK(g.source_density(0.0) == 0.0);
    // Symmetry under reflection across the real axis.
    for (cplx z : {cplx(0.3, 0.4), cplx(-0.2, 0.85), cplx(0.0, 0.78), cplx(0.01, -0.8)})
        CHECK(std::abs(g(z) + g(std::conj(z))) < 1e-7);
    // Near-field and far-field quadrature agree at the switch radius.
    const cplx y1 = g.center(1);
    const double inside = g(y1 + cplx(0.0999999, 0.0));
    const double outside = g(y1 + cplx(0.1000001, 0.0));
    CHECK(std::abs(inside - outside) < 1e-5 * std::max(1.0, std::abs(inside)));

    // Away from the marks G_* approaches h as delta shrinks.
    std::vector<double> sups;
    for (double delta : {0.2, 0.1, 0.05}) {
        const ContinuumGreen gd(d, inward_point(d, d.x1(), delta), inward_point(d, d.x2(), delta),
                                delta / 4);
        const double a = std::sqrt(delta);
        double sup = 0.0;
        int probes = 0;
        Rng rng(3, 0, 0);
        while (probes < 50) {
            const cplx z(2 * rng.uniform01() - 1, 2 * rng.uniform01() - 1);
            if (!d.contains(z) || std::abs(z - d.x1()) < a || std::abs(z - d.x2()) < a) continue;
            sup = std::max(sup, std::abs(gd(z) - hyperbolic_potential(d, z)));
            ++probes;
        }
        sups.push_back(sup);
    }
    CHECK(sups[1] < sups[0]);
    CHECK(sups[2] < sups[1]);

    // Logarithmic blow-up near x_1.
    for (double delta : {0.2, 0.1, 0.05}) {
        const ContinuumGreen gd(d, inward_point(d, d.x1(), delta), inward_point(d, d.x2(), delta),
                                delta / 4);
        const cplx z = d.x1() + cplx(0.0, 0.5 * std::sqrt(delta));
        const double v = gd(z);
        CHECK(v > 0);
        const double ratio = v / std::abs(std::log(delta));
        CHECK(ratio >= 0.1);
        CHECK(ratio <= 100);
    }
}

TEST_CASE("green comparison table") {
    const auto d = SmoothDomain::disc();
    const auto l4 = discretize(d, 4, 0.2);
    const auto cont = ContinuumGreen::for_lattice(l4);
    const auto rows = compare_green_continuum({&l4, &l4}, cont);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].supnorm == rows[1].supnorm);
    CHECK(std::abs(rows[0].value_at_zero) <= rows[0].supnorm);
    CHECK(rows[0].m == 4);
    CHECK(rows[0].fitted_scale > 0);
}

TEST_CASE("green field properties across refinement") {
    const auto d = SmoothDomain::disc();
    double prev_max = 0.0;
    for (int m : {4, 5, 6}) {
        const auto lat = discretize(d, m, 0.2);
        const auto field = solve_green(lat);
        double mx = 0.0;
        for (double v : field.values) mx = std::max(mx, std::abs(v));
        if (prev_max > 0) CHECK(mx <= 1.1 * prev_max);
        prev_max = mx;
        if (m == 6) {
            const auto& h = lat.h_values();
            const double n = lat.size();
            const double mg = std::accumulate(field.values.begin(), field.values.end(), 0.0) / n;
            const double mh = std::accumulate(h.begin(), h.end(), 0.0) / n;
            double sgh = 0, sgg = 0, shh = 0;
            for (int v = 0; v < lat.size(); ++v) {
                sgh += (field[v] - mg) * (h[v] - mh);
                sgg += (field[v] - mg) * (field[v] - mg);
                shh += (h[v] - mh) * (h[v] - mh);
            }
            CHECK(sgh / std::sqrt(sgg * shh) >= 0.95);
        }
    }
}

TEST_CASE("weight function") {
    const auto lat = discretize(SmoothDomain::disc(), 4, 0.25);
    const auto field = solve_green(lat);
    const int k = blue_target(lat, 0.5);
    const double total = std::accumulate(field.values.begin(), field.values.end(), 0.0);
    const double wmax = weight_max(field, k);
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const auto cfg = random_config(lat, k, s);
        const double w = weight(cfg, field);
        CHECK(w <= wmax + 1e-9);
        if (s < 20) CHECK(std::abs(w + weight(cfg.swapped(), field) - total) < 1e-9);
    }
    // Top-k by G attains the maximum.
    std::vector<int> ids(lat.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(), [&](int a, int b) { return field[a] > field[b]; });
    RegionMask top(lat.size());
    for (int i = 0; i < k; ++i) top.set(ids[i]);
    CHECK(std::abs(weight(Configuration::from_blue_mask(top), field) - wmax) < 1e-9);

    GreenField zero;
    zero.values.assign(lat.size(), 0.0);
    CHECK(weight(random_config(lat, k, 1), zero) == 0.0);
}

TEST_CASE("blue exit distribution") {
    const auto lat = discretize(SmoothDomain::disc(), 3, 0.4);
    const auto cfg = level_config(lat, 0.4);
    const auto p = blue_exit_distribution(lat, cfg);
    CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    for (int v = 0; v < lat.size(); ++v)
        if (p[v] > 0) CHECK(!cfg.is_blue(v));
}

TEST_CASE("exact drift against simulation") {
    const auto lat = discretize_n(SmoothDomain::disc(), 8, 0.5);
    const auto field = solve_green(lat);
    const int k = blue_target(lat, 0.5);
    for (std::uint64_t s : {3u, 4u}) {
        const auto cfg = random_config(lat, k, s);
        const auto ex = drift_exact(lat, cfg, field);
        CHECK_FALSE(ex.fallback);
        const auto mc = drift_mc(lat, cfg, field, 1000000, 17 + s);
        CHECK(std::abs(ex.value - mc.estimate) <= 3 * mc.stderr_);
    }
    // Single replica equals the realised one-step change of the weight.
    const auto cfg = random_config(lat, k, 8);
    const auto one = drift_mc(lat, cfg, field, 1, 5);
    CHECK(one.stderr_ == 0.0);
    GreenField zero;
    zero.values.assign(lat.size(), 0.0);
    CHECK(drift_mc(lat, cfg, zero, 1000, 5).estimate == 0.0);
}

TEST_CASE("drift invariances and sign") {
    const auto lat = discretize(SmoothDomain::disc(), 4, 0.25);
    const auto field = solve_green(lat);
    const int k = blue_target(lat, 0.5);
    const auto cfg = random_config(lat, k, 21);
    const auto base = drift_exact(lat, cfg, field);
    GreenField shifted = field;
    for (double& v : shifted.values) v += 3.75;
    CHECK(std::abs(drift_exact(lat, cfg, shifted).value - base.value) <= 1e-10);

    // Blue on the x_2 side, red on the x_1 side.
    const auto good = level_config(lat, 0.5);
    RegionMask swapped(lat.size());
    for (int v = 0; v < lat.size(); ++v) {
        const auto c = lat.coord(v);
        const int w = lat.vertex_at(c.ix, -c.iy);
        if (good.is_blue(w)) swapped.set(v);
    }
    const auto sw = Configuration::from_blue_mask(swapped);
    REQUIRE(sw.blue_count == good.blue_count);
    CHECK(drift_exact(lat, sw, field).value > 0);
}

TEST_CASE("mirror identity for the blue term") {
    const auto lat = discretize(SmoothDomain::disc(), 4, 0.25);
    const auto field = solve_green(lat);
    for (std::uint64_t s : {1u, 2u, 3u}) {
        const auto cfg = random_config(lat, blue_target(lat, 0.5), s);
        // sigma* = colour swap of the conjugated configuration.
        RegionMask star(lat.size());
        for (int v = 0; v < lat.size(); ++v) {
            const auto c = lat.coord(v);
            if (cfg.is_red(lat.vertex_at(c.ix, -c.iy))) star.set(v);
        }
        const auto mirrored = Configuration::from_blue_mask(star);
        const auto r2 = monochromatic_region(lat, cfg, 2);
        std::vector<double> zero(lat.size(), 0.0);
        const auto u = r2.empty() ? field.values
                                  : solve_dirichlet(lat.graph(), r2.bits(), zero, field.values, 1e-13);
        double red_avg = 0.0;
        for (int v : lat.blob(2)) red_avg += u[v];
        red_avg /= lat.blob_size();
        CHECK(std::abs(drift_exact(lat, mirrored, field).blue_term + red_avg) <= 1e-8);
    }
}

TEST_CASE("green CSV dump is deterministic") {
    const auto lat = discretize(SmoothDomain::disc(), 3, 0.4);
    std::ostringstream a, b;
    write_green_csv(lat, solve_green(lat).values, a);
    write_green_csv(lat, solve_green(lat).values, b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("ix,iy,G\n", 0) == 0);
}
