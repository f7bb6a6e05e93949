#include "doctest.h"

#include "erosion/analysis.hpp"
#include "erosion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

using namespace erosion;

namespace {

const LatticeDomain& disc32() {
    static const LatticeDomain lat = discretize(SmoothDomain::disc(), 5, 0.2);
    return lat;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("wrong-colour profile") {
    const auto& lat = disc32();
    const double alpha = 0.5;
    const double beta = beta_of_alpha(lat.domain(), alpha);
    const auto region = level_region_mask(lat, beta);
    const auto shells = build_shells(lat.domain(), lat.n(), beta, -1);

    SUBCASE("level set is clean") {
        const auto cfg = Configuration::from_blue_mask(region);
        const auto p = wrong_color_profile(lat, cfg, region, shells);
        CHECK(p.red_inside == 0);
        CHECK(p.blue_outside == 0);
        CHECK(p.blue_inside == region.count());
        CHECK(p.red_outside == lat.size() - region.count());
        CHECK(p.offending_negative <= 1);
        CHECK(p.offending_positive <= 1);
        CHECK(symmetric_difference_fraction(cfg, region) == 0.0);
    }

    SUBCASE("swapped level set is all wrong") {
        const auto cfg = Configuration::from_blue_mask(region).swapped();
        const auto p = wrong_color_profile(lat, cfg, region, shells);
        CHECK(p.red_inside == region.count());
        CHECK(p.blue_outside == lat.size() - region.count());
        CHECK(symmetric_difference_fraction(cfg, region) == 1.0);
        int nonempty = 0;
        for (const auto& s : p.shells) nonempty += s.index != 0 && s.blue + s.red > 0;
        CHECK(p.offending_negative + p.offending_positive >= nonempty - 2);
    }

    SUBCASE("brute-force recount") {
        const auto cfg = sample_initial(lat, alpha, InitialKind::UniformExact, 17);
        const auto p = wrong_color_profile(lat, cfg, region, shells);
        int ri = 0, bo = 0, neg = 0, pos = 0;
        std::vector<int> red(shells.shell_count(), 0), blue(shells.shell_count(), 0);
        for (int v = 0; v < lat.size(); ++v) {
            const bool in = lat.h(v) >= beta;
            CHECK(in == region.test(v));
            ri += in && cfg.is_red(v);
            bo += !in && cfg.is_blue(v);
            const auto s = shells.shell_of(lat.h(v));
            if (!s) continue;
            (cfg.is_blue(v) ? blue : red)[*s - shells.first_shell()]++;
        }
        for (int i = 0; i < shells.shell_count(); ++i) {
            const int idx = shells.first_shell() + i;
            CHECK(p.shells[i].index == idx);
            CHECK(p.shells[i].blue == blue[i]);
            CHECK(p.shells[i].red == red[i]);
            neg += idx < 0 && red[i] > 0;
            pos += idx > 0 && blue[i] > 0;
        }
        CHECK(p.red_inside == ri);
        CHECK(p.blue_outside == bo);
        CHECK(p.offending_negative == neg);
        CHECK(p.offending_positive == pos);
    }

    SUBCASE("size mismatch") {
        Configuration small;
        small.color.assign(3, kBlue);
        CHECK_THROWS_AS(wrong_color_profile(lat, small, region, shells), ArgumentError);
    }
}

TEST_CASE("symmetric difference of random starts") {
    const auto& lat = disc32();
    for (double alpha : {0.25, 0.5}) {
        const auto region = level_region_mask(lat, beta_of_alpha(lat.domain(), alpha));
        const double a = static_cast<double>(region.count()) / lat.size();
        const int k = blue_target(lat, alpha);
        const double kb = static_cast<double>(k) / lat.size();
        // E|B \ L| = k (1 - a), E|L \ B| = |L| - k a.
        const double expect = kb * (1 - a) + (a - kb * a);
        double sum = 0.0;
        const int reps = 40;
        for (int s = 0; s < reps; ++s) sum += symmetric_difference_fraction(lat, sample_initial(lat, alpha, InitialKind::UniformExact, 100 + s), alpha);
        const double mean = sum / reps;
        // Hypergeometric spread per draw is about sqrt(a (1-a) / N).
        const double sigma = 2.0 * std::sqrt(a * (1 - a) / lat.size()) / std::sqrt(reps);
        CHECK(std::abs(mean - expect) < 3 * sigma + 1e-12);
        CHECK(std::abs(expect - 2 * alpha * (1 - alpha)) < 0.03);
    }
    const auto lvl = sample_initial(lat, 0.5, InitialKind::LevelSet, 1);
    CHECK(symmetric_difference_fraction(lat, lvl, 0.5) < 0.02);
}

TEST_CASE("concentration bounds") {
    CHECK(azuma_tail(1, 1, 1, 2) == doctest::Approx(std::exp(-1.0 / 8.0)).epsilon(1e-14));
    CHECK(std::abs(azuma_tail(1, 1, 1, 2) - std::exp(-0.125)) <= 1e-12);
    CHECK(std::abs(hitstation_bound(2, 6) - 0.25) <= 1e-12);
    CHECK_THROWS_AS(azuma_tail(1, 1, 2, 2), ArgumentError);
    CHECK_THROWS_AS(azuma_tail(0, 1, 1, 2), ArgumentError);
    CHECK(hitstation_bound(1, std::numeric_limits<double>::infinity()) == 0.0);

    const auto e = azuma_escape(1, 1, 60, 40);
    CHECK(e.t_prime == doctest::Approx(std::exp(1600.0 / 1280.0)));
    CHECK(e.probability == doctest::Approx(1 - std::exp(-3600.0 / 1280.0) - std::exp(-1600.0 / 1280.0)));
    CHECK(e.probability >= 0.0);
    CHECK(azuma_escape(1, 1, 20, 40).probability == 0.0);
    CHECK_THROWS_AS(azuma_escape(1, 1, 2, 40), ArgumentError);
    CHECK_THROWS_AS(azuma_escape(1, 1, 20, 2), ArgumentError);

    // The tail decreases in T once a1 T exceeds a2.
    double prev = 1.0;
    for (double T = 2; T < 30; T += 1) {
        const double v = azuma_tail(1, 1, 1, T);
        CHECK(v <= prev + 1e-15);
        prev = v;
    }
}

TEST_CASE("hitting time measurement") {
    const auto& lat = disc32();
    auto make = [&](std::uint64_t s) { return make_chain(sample_initial(lat, 0.5, InitialKind::UniformExact, s), s); };
    auto step = [&](ChainState& st) { erosion_step(lat, st); };

    const auto now = measure_hitting_time(make, step, [](const ChainState&) { return true; }, 100, {1, 2, 3});
    CHECK(now.censored == 0);
    for (const auto& s : now.samples) CHECK(s.steps == 0);
    CHECK(now.mean_uncensored == 0.0);

    const auto never = measure_hitting_time(make, [](ChainState&) {}, [](const ChainState&) { return false; }, 50, {4, 5}, 7);
    CHECK(never.censored == 2);
    for (const auto& s : never.samples) {
        CHECK(s.censored);
        CHECK(s.steps == 50);
    }

    // Half steps counted by the chain itself.
    const auto ten = measure_hitting_time(make, step, [](const ChainState& st) { return st.half_steps >= 20; }, 100, {9}, 3);
    CHECK(ten.samples[0].steps == 12);
    CHECK_FALSE(ten.samples[0].censored);
    CHECK_THROWS_AS(measure_hitting_time(make, step, [](const ChainState&) { return true; }, 1, {1}, 0), ArgumentError);
}

TEST_CASE("rasters") {
    SUBCASE("golden 2x2") {
        const auto r = render_cells(2, 2, {kBlue, kRed, 0, kBlue});
        std::ostringstream out;
        write_ppm(r, out);
        CHECK(out.str() == slurp(std::string(EROSION_TEST_DATA) + "/cells_2x2.ppm"));
        const auto big = render_cells(2, 2, {kBlue, kRed, 0, kBlue}, 3);
        CHECK(big.width == 6);
        CHECK(big.at(5, 0) == kRedPixel);
        CHECK(big.at(0, 5) == kWhite);
        CHECK_THROWS_AS(render_cells(2, 2, {kBlue}), ArgumentError);
    }

    SUBCASE("configuration with geodesic overlay") {
        const auto& lat = disc32();
        const double beta = beta_of_alpha(lat.domain(), 1.0 / 3.0);
        const auto pts = geodesic_points(lat.domain(), beta, 64);
        for (cplx z : pts) CHECK(std::abs(hyperbolic_potential(lat.domain(), z) - beta) <= 1e-8);
        const auto cfg = Configuration::from_blue_mask(level_region_mask(lat, beta));
        RenderOptions opts;
        opts.scale = 2;
        opts.overlay = pts;
        const auto r = render_configuration(lat, cfg, opts);
        const auto box = lat.index_box();
        CHECK(r.width == 2 * (box[1] - box[0] + 1));
        CHECK(r.height == 2 * (box[3] - box[2] + 1));
        int black = 0, blue = 0, red = 0, white = 0;
        for (const auto& p : r.pixels) {
            black += p == kOverlayPixel;
            blue += p == kBluePixel;
            red += p == kRedPixel;
            white += p == kWhite;
        }
        CHECK(black >= 20);
        CHECK(white > 0);
        CHECK(blue <= 4 * cfg.blue_count);
        CHECK(blue + red <= 4 * lat.size());
        CHECK(blue + red + black >= 4 * lat.size());
        // Blue sits at the bottom of the picture.
        int low = box[3];
        for (int v = 0; v < lat.size(); ++v)
            if (lat.coord(v).ix == 0) low = std::min(low, lat.coord(v).iy);
        CHECK(r.at(2 * (0 - box[0]), 2 * (box[3] - low)) == kBluePixel);
    }

    SUBCASE("field palette") {
        CHECK(diverging_color(0) == kWhite);
        CHECK(diverging_color(1) == kBluePixel);
        CHECK(diverging_color(-1) == kRedPixel);
        CHECK(diverging_color(5) == kBluePixel);
        const auto& lat = disc32();
        std::vector<double> f(lat.size());
        for (int v = 0; v < lat.size(); ++v) f[v] = lat.h(v) - 1.0;
        const auto r = render_field(lat, f, {});
        CHECK(r.pixels.size() == static_cast<std::size_t>(r.width * r.height));
    }
}
