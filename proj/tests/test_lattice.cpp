#include "doctest.h"

#include "erosion/errors.hpp"
#include "erosion/lattice.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>

using namespace erosion;

TEST_CASE("disc mesh matches a brute-force point count") {
    const auto d = SmoothDomain::disc();
    const auto lat = discretize(d, 4, 0.25);
    int brute = 0;
    for (int i = -16; i <= 16; ++i)
        for (int j = -16; j <= 16; ++j)
            if (i * i + j * j < 256) ++brute;
    CHECK(lat.size() == brute);
    CHECK(lat.n() == 16);
    CHECK(lat.m() == 4);
    for (int v = 0; v < lat.size(); ++v) {
        if (1.0 - std::abs(lat.position(v)) > 2.0 / 16) CHECK(lat.degree(v) == 4);
    }
}

TEST_CASE("graph invariants") {
    for (const auto& d : {SmoothDomain::disc(), SmoothDomain::quadratic(0.3)}) {
        for (int m : {3, 4, 5}) {
            const auto lat = discretize(d, m, 0.25);
            int degsum = 0;
            for (int v = 0; v < lat.size(); ++v) degsum += lat.degree(v);
            CHECK(degsum == 2 * lat.graph().num_edges());
            CHECK(lat.graph().connected());
            CHECK(lat.blob(1).size() == lat.blob(2).size());
            CHECK_FALSE(lat.blob(1).empty());
            for (int i : {1, 2}) {
                const cplx zc = lat.position(lat.blob_center(i));
                for (int v : lat.blob(i)) {
                    CHECK(std::abs(lat.position(v) - zc) < lat.delta() / 4);
                    CHECK(d.contains(lat.position(v)));
                    CHECK(lat.degree(v) == 4);
                }
            }
            // Every edge joins lattice neighbours whose segment lies inside.
            for (const auto& e : lat.graph().edges()) {
                const auto a = lat.coord(e[0]), b = lat.coord(e[1]);
                CHECK(std::abs(a.ix - b.ix) + std::abs(a.iy - b.iy) == 1);
                const cplx mid = 0.5 * (lat.position(e[0]) + lat.position(e[1]));
                CHECK(d.contains(mid));
            }
        }
    }
}

TEST_CASE("vertex density approaches the disc area") {
    const auto d = SmoothDomain::disc();
    for (int m : {5, 6}) {
        const auto lat = discretize(d, m, 0.2);
        const double density = static_cast<double>(lat.size()) / (lat.n() * lat.n());
        CHECK(std::abs(density - kPi) / kPi < 0.02);
    }
}

TEST_CASE("blob centres and trimming") {
    const auto d = SmoothDomain::disc();
    const auto lat = discretize(d, 5, 0.2);
    // y = -0.8i lies on the lattice at n = 32 when it is a multiple of 1/32.
    const auto c1 = lat.coord(lat.blob_center(1));
    CHECK(c1.ix == 0);
    CHECK(c1.iy == static_cast<int>(std::lround(-0.8 * 32)));
    // Mirror symmetry of the blobs.
    for (int v : lat.blob(1)) {
        const auto c = lat.coord(v);
        const int w = lat.vertex_at(c.ix, -c.iy);
        CHECK(w >= 0);
        CHECK(lat.blob_label(w) == 2);
    }

    const auto q = discretize(SmoothDomain::quadratic(0.3), 5, 0.2);
    CHECK(q.blob(1).size() == q.blob(2).size());

    CHECK_THROWS_AS(discretize(d, 3, 0.02), DomainError);
    CHECK_THROWS_AS(discretize(d, 4, 1.5), DomainError);
    CHECK_THROWS_AS(discretize(d, 2, 0.2), ArgumentError);
}

TEST_CASE("point sources sit next to the marks") {
    const auto d = SmoothDomain::disc();
    const auto lat = discretize_n(d, 50, 0.2, SourceMode::Point);
    CHECK(lat.m() == -1);
    CHECK(lat.blob(1).size() == 1);
    CHECK(lat.blob(2).size() == 1);
    const auto c1 = lat.coord(lat.blob(1)[0]);
    const auto c2 = lat.coord(lat.blob(2)[0]);
    CHECK(c1.ix == 0);
    CHECK(c1.iy == -48);
    CHECK(c2.iy == 48);
    CHECK(lat.degree(lat.blob(1)[0]) == 4);
    CHECK(lat.vertex_at(0, -49) >= 0);
    CHECK(lat.degree(lat.vertex_at(0, -49)) == 3);
}

TEST_CASE("nearest vertex") {
    const auto lat = discretize(SmoothDomain::disc(), 4, 0.25);
    for (int v = 0; v < lat.size(); v += 7) CHECK(lat.nearest_vertex(lat.position(v)) == v);
    const int b = lat.nearest_vertex(cplx(1.0, 0.0));
    CHECK(lat.coord(b).ix == 15);
    CHECK(lat.coord(b).iy == 0);
    // Tie between (0,0) and (1,0): lexicographic choice.
    const int t = lat.nearest_vertex(cplx(0.5 / 16, 0.0));
    CHECK(lat.coord(t).ix == 0);
}

TEST_CASE("level region masks") {
    const auto d = SmoothDomain::disc();
    const auto lat = discretize(d, 4, 0.25);
    const auto lower = level_region_mask(lat, 0.0);
    for (int v = 0; v < lat.size(); ++v) CHECK(lower.test(v) == (lat.coord(v).iy <= 0));
    CHECK(level_region_mask(lat, -INFINITY).count() == lat.size());

    const auto lat6 = discretize(d, 6, 0.2);
    const auto third = level_region_mask(lat6, beta_of_alpha(d, 1.0 / 3.0));
    const double frac = static_cast<double>(third.count()) / lat6.size();
    CHECK(std::abs(frac - 1.0 / 3.0) < 2.0 / 64 * 2.0);
}

TEST_CASE("shell masks partition the band") {
    const auto d = SmoothDomain::disc();
    const auto lat = discretize(d, 6, 0.2);
    for (int window : {10, -1}) {
        const auto shells = build_shells(d, 64, 0.0, window);
        const auto masks = shell_masks(lat, shells);
        const auto band = band_mask(lat, shells);
        RegionMask uni(lat.size());
        int total = 0;
        for (const auto& m : masks) {
            total += m.count();
            uni = uni | m;
        }
        CHECK(total == band.count());
        CHECK(uni == band);
        const auto idx = shell_index(lat, shells);
        for (int v = 0; v < lat.size(); ++v) {
            if (idx[v] == INT_MIN) continue;
            CHECK(shells.level(idx[v] + 1) <= lat.h(v));
            CHECK(lat.h(v) < shells.level(idx[v]));
        }
        if (window < 0) {
            CHECK(band.count() == lat.size());
        }
        std::vector<int> pops;
        for (const auto& m : masks) pops.push_back(m.count());
        std::nth_element(pops.begin(), pops.begin() + pops.size() / 2, pops.end());
        const double median = pops[pops.size() / 2];
        const double mean = static_cast<double>(band.count()) / masks.size();
        CHECK(median <= 3 * mean);
        CHECK(median >= mean / 3);
    }
    CHECK_THROWS_AS(shell_masks(lat, build_shells(d, 32, 0.0, 3)), ArgumentError);
}

TEST_CASE("lattice CSV dump") {
    const auto lat = discretize(SmoothDomain::disc(), 3, 0.25);
    std::ostringstream os;
    write_lattice_csv(lat, os);
    const std::string s = os.str();
    CHECK(s.rfind("ix,iy,x,y,degree,blob\n", 0) == 0);
    CHECK(std::count(s.begin(), s.end(), '\n') == lat.size() + 1);
}
