#include "doctest.h"

#include "erosion/conformal_domain.hpp"
#include "erosion/errors.hpp"
#include "erosion/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace erosion;

namespace {

constexpr cplx I{0.0, 1.0};

// Area of {zeta in D : |zeta - i| >= K |zeta + i|} from the lens formula for the
// unit circle and the orthogonal Apollonius circle.
double lens_area_oracle(double beta) {
    if (beta == 0.0) return kPi / 2;
    if (beta < 0.0) return kPi - lens_area_oracle(-beta);
    const double k2 = std::exp(2.0 * beta / kPotentialScale);
    const double d = std::abs((1.0 + k2) / (1.0 - k2));
    const double r = std::sqrt(d * d - 1.0);
    const double a1 = r * r * std::acos((d * d + r * r - 1.0) / (2.0 * d * r));
    const double a2 = std::acos((d * d + 1.0 - r * r) / (2.0 * d));
    const double a3 = 0.5 * std::sqrt((-d + r + 1) * (d + r - 1) * (d - r + 1) * (d + r + 1));
    return a1 + a2 - a3;
}

double lens_beta_oracle(double alpha) {
    double lo = -200, hi = 200;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (lens_area_oracle(mid) / kPi > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct McArea {
    double area;
    double stderr_;
};

McArea mc_area(const SmoothDomain& d, double beta, int samples, std::uint64_t seed) {
    Rng rng(seed, 0, Rng::tag("mc-area"));
    const auto box = d.bounding_box();
    const double box_area = (box[1] - box[0]) * (box[3] - box[2]);
    int hits = 0;
    for (int k = 0; k < samples; ++k) {
        const cplx z(box[0] + (box[1] - box[0]) * rng.uniform01(),
                     box[2] + (box[3] - box[2]) * rng.uniform01());
        if (d.contains(z) && hyperbolic_potential(d, z) >= beta) ++hits;
    }
    const double p = static_cast<double>(hits) / samples;
    return {box_area * p, box_area * std::sqrt(p * (1 - p) / samples)};
}

} // namespace

TEST_CASE("hyperbolic potential closed-form values on the disc") {
    const auto d = SmoothDomain::disc();
    CHECK(hyperbolic_potential(d, 0.0) == doctest::Approx(0.0));
    CHECK(hyperbolic_potential(d, -0.5 * I) == doctest::Approx(64.0 / kPi * std::log(3.0)));
    CHECK(hyperbolic_potential(d, -0.5 * I) == doctest::Approx(22.383).epsilon(1e-4));
    CHECK(hyperbolic_potential(d, 0.5 * I) == doctest::Approx(-64.0 / kPi * std::log(3.0)));
    CHECK_THROWS_AS(hyperbolic_potential(d, d.x1()), DomainError);
    CHECK_THROWS_AS(hyperbolic_potential(d, d.x2()), DomainError);
    CHECK(hyperbolic_potential(d, -0.999999 * I) > 250.0);
    CHECK(hyperbolic_potential(d, 0.999999 * I) < -250.0);
}

TEST_CASE("h o phi equals the disc formula and is odd on the disc") {
    const auto d = SmoothDomain::disc();
    Rng rng(11, 0, 1);
    for (int k = 0; k < 100; ++k) {
        const cplx z = std::polar(std::sqrt(rng.uniform01()) * 0.999, 2 * kPi * rng.uniform01());
        const double formula = kPotentialScale * std::log(std::abs(z - I) / std::abs(z + I));
        CHECK(hyperbolic_potential(d, d.phi(z)) == doctest::Approx(formula).epsilon(1e-12));
        CHECK(hyperbolic_potential(d, -z) == doctest::Approx(-hyperbolic_potential(d, z)));
    }
}

TEST_CASE("quadratic domain: inverse, marks and derivative bounds") {
    for (double c : {0.3, -0.25, 0.4}) {
        const auto d = SmoothDomain::quadratic(c);
        CHECK(std::abs(d.psi(d.x1()) + I) < 1e-10);
        CHECK(std::abs(d.psi(d.x2()) - I) < 1e-10);
        Rng rng(3, 0, 2);
        for (int k = 0; k < 500; ++k) {
            const cplx w = std::polar(std::sqrt(rng.uniform01()), 2 * kPi * rng.uniform01());
            const cplx z = d.phi(w);
            CHECK(d.contains(z) == (std::abs(w) < 1.0));
            CHECK(std::abs(d.phi(d.psi(z)) - z) < 1e-10);
        }
        double dmin = 1e300;
        for (int j = 0; j < 1024; ++j) dmin = std::min(dmin, std::abs(d.dphi(std::polar(1.0, 2 * kPi * j / 1024))));
        CHECK(dmin >= 1.0 - 2.0 * std::abs(c) - 1e-12);
        CHECK(dmin > 0.15);
    }
}

TEST_CASE("marks away from antipodal positions") {
    DomainSpec spec;
    spec.family = Family::Quadratic;
    spec.c = 0.2;
    spec.theta1 = -2.0;
    spec.theta2 = 0.3;
    const SmoothDomain d(spec);
    CHECK(std::abs(d.psi(d.x1()) + I) < 1e-10);
    CHECK(std::abs(d.psi(d.x2()) - I) < 1e-10);
    CHECK(std::abs(d.x1() - d.family_map(std::polar(1.0, -2.0))) < 1e-14);
    Rng rng(5, 0, 0);
    for (int k = 0; k < 100; ++k) {
        const cplx w = std::polar(std::sqrt(rng.uniform01()) * 0.99, 2 * kPi * rng.uniform01());
        CHECK(std::abs(d.psi(d.phi(w)) - w) < 1e-10);
    }
}

TEST_CASE("level-region area against the lens oracle and Monte Carlo") {
    const auto d = SmoothDomain::disc();
    CHECK(area_of_level_region(d, 0.0) == doctest::Approx(kPi / 2).epsilon(1e-6));
    CHECK(area_of_level_region(d, 1e6) < 1e-9);
    for (double beta : {-30.0, -5.0, 3.0, 22.383, 60.0}) {
        CHECK(area_of_level_region(d, beta) ==
              doctest::Approx(lens_area_oracle(beta)).epsilon(2e-6));
    }
    const double b3 = 64.0 / kPi * std::log(3.0);
    const auto mc = mc_area(d, b3, 1000000, 17);
    CHECK(std::abs(area_of_level_region(d, b3) - mc.area) <= 3 * mc.stderr_);

    const auto q = SmoothDomain::quadratic(0.3);
    const auto mcq = mc_area(q, 5.0, 1000000, 19);
    CHECK(std::abs(area_of_level_region(q, 5.0) - mcq.area) <= 3 * mcq.stderr_);
    CHECK(area_of_level_region(q, -1e6) == doctest::Approx(q.area()).epsilon(1e-6));
}

TEST_CASE("level-region area is strictly decreasing") {
    for (const auto& d : {SmoothDomain::disc(), SmoothDomain::quadratic(0.3)}) {
        double prev = 1e300;
        for (int j = 0; j < 20; ++j) {
            const double a = area_of_level_region(d, -60.0 + 6.0 * j);
            CHECK(a < prev);
            CHECK(a >= 0.0);
            CHECK(a <= d.area());
            prev = a;
        }
    }
}

TEST_CASE("beta_of_alpha") {
    const auto d = SmoothDomain::disc();
    CHECK(std::abs(beta_of_alpha(d, 0.5)) < 1e-5);
    CHECK(beta_of_alpha(d, 0.999) < beta_of_alpha(d, 0.5));
    CHECK(beta_of_alpha(d, 1.0 / 3.0) == doctest::Approx(lens_beta_oracle(1.0 / 3.0)).epsilon(1e-5));
    CHECK_THROWS_AS(beta_of_alpha(d, 0.0), ArgumentError);
    CHECK_THROWS_AS(beta_of_alpha(d, 1.5), ArgumentError);

    // Empirical 1/3 upper quantile of h under uniform sampling of the disc.
    Rng rng(23, 0, 0);
    std::vector<double> hs;
    const int samples = 1000000;
    hs.reserve(samples);
    for (int k = 0; k < samples; ++k) {
        const cplx z = std::polar(std::sqrt(rng.uniform01()), 2 * kPi * rng.uniform01());
        hs.push_back(hyperbolic_potential(d, z));
    }
    const auto pos = static_cast<std::size_t>(samples * (2.0 / 3.0));
    std::nth_element(hs.begin(), hs.begin() + static_cast<std::ptrdiff_t>(pos), hs.end());
    const double mc_beta = hs[pos];
    // Quantile standard error sqrt(p(1-p)/N) / density, density of h at the
    // quantile = (d area / d beta) / pi.
    const double b = beta_of_alpha(d, 1.0 / 3.0);
    const double dens = (area_of_level_region(d, b - 0.5) - area_of_level_region(d, b + 0.5)) / kPi;
    const double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / samples) / dens;
    CHECK(std::abs(mc_beta - b) < 4 * se);

    for (const auto& dom : {SmoothDomain::disc(), SmoothDomain::quadratic(0.3)}) {
        for (double alpha : {0.1, 1.0 / 3.0, 0.5, 0.8}) {
            const double beta = beta_of_alpha(dom, alpha);
            CHECK(std::abs(area_of_level_region(dom, beta) / dom.area() - alpha) <= 2e-6);
        }
    }
}

TEST_CASE("shell march along the transversal") {
    const auto d = SmoothDomain::disc();
    const auto sh = build_shells(d, 100, 0.0, 20);
    CHECK_FALSE(sh.truncated);
    CHECK(sh.shell_count() == 40);
    CHECK(sh.level(0) == 0.0);
    for (int i = sh.first_index; i < sh.first_index + static_cast<int>(sh.crossings.size()); ++i) {
        const double s = sh.crossings[static_cast<std::size_t>(i - sh.first_index)];
        CHECK(kPotentialScale * std::log((1 - s) / (1 + s)) == doctest::Approx(sh.level(i)));
    }
    for (std::size_t j = 0; j + 1 < sh.crossings.size(); ++j) {
        const double gap = std::abs(d.phi(cplx(0, sh.crossings[j])) - d.phi(cplx(0, sh.crossings[j + 1])));
        CHECK(gap == doctest::Approx(1.0 / 100).epsilon(0.1));
        CHECK(sh.levels[j + 1] < sh.levels[j]);
    }

    const auto zero = build_shells(d, 100, 0.7, 0);
    CHECK(zero.levels.size() == 1);
    CHECK(zero.levels[0] == 0.7);
    CHECK(zero.shell_count() == 0);

    const auto five = build_shells(d, 64, 0.0, 5);
    CHECK(five.level(1) < 0.0);
    CHECK(five.level(-1) > 0.0);
    for (std::size_t j = 0; j + 1 < five.levels.size(); ++j) CHECK(five.levels[j + 1] < five.levels[j]);

    const auto big = build_shells(d, 16, 0.0, 1000);
    CHECK(big.truncated);
    const auto full = build_shells(d, 64, 0.0, -1);
    CHECK_FALSE(full.truncated);
    CHECK(std::isinf(full.levels.front()));
    CHECK(std::isinf(full.levels.back()));
    CHECK(full.shell_count() >= 100);
    CHECK(full.shell_count() <= 160);
    CHECK(full.shell_of(0.0).value() == -1);
    CHECK(full.shell_of(-1e-9).value() == 0);
    CHECK(full.shell_of(1e9).value() == full.first_shell());
    CHECK(full.shell_of(-1e9).value() == full.last_shell());
    CHECK_THROWS_AS(build_shells(d, 8, 0.0, 1), ArgumentError);
}

TEST_CASE("inward point") {
    const auto d = SmoothDomain::disc();
    CHECK(std::abs(inward_point(d, -I, 0.2) - (-0.8 * I)) < 1e-12);
    CHECK(std::abs(inward_point(d, 1.0, 0.1) - 0.9) < 1e-12);
    CHECK_THROWS_AS(inward_point(d, 1.0, 1.5), DomainError);
    CHECK_THROWS_AS(inward_point(d, 0.5, 0.1), ArgumentError);

    const auto q = SmoothDomain::quadratic(0.3);
    for (int j = 0; j < 64; ++j) {
        const cplx x = q.boundary_point(2 * kPi * j / 64);
        for (double delta : {0.05, 0.1, 0.2}) {
            const cplx y = inward_point(q, x, delta);
            CHECK(std::abs(std::abs(y - x) - delta) < 1e-9);
            double dist = 1e300;
            for (int k = 0; k < 8192; ++k) dist = std::min(dist, std::abs(q.boundary_point(2 * kPi * k / 8192) - y));
            CHECK(dist > delta / 2);
            CHECK(q.contains(y));
        }
    }
    const cplx y = inward_point(q, q.family_map(-I), 0.1);
    CHECK(q.contains(y));
}

TEST_CASE("geodesic points") {
    const auto d = SmoothDomain::disc();
    for (const cplx& z : geodesic_points(d, 0.0, 50)) CHECK(std::abs(z.imag()) < 1e-14);
    const double b3 = 64.0 / kPi * std::log(3.0);
    const auto pts = geodesic_points(d, b3, 64);
    for (const cplx& z : pts) {
        CHECK(std::abs(z - I) / std::abs(z + I) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(std::abs(z) < 1.0);
    }
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) CHECK(pts[j].real() < pts[j + 1].real());
    const auto two = geodesic_points(d, 5.0, 2);
    CHECK(two.size() == 2);
    CHECK(std::abs(two[0] - two[1]) > 1e-3);
    const auto q = SmoothDomain::quadratic(0.3);
    for (double beta : {-20.0, 0.0, 7.5}) {
        for (const cplx& z : geodesic_points(q, beta, 40)) {
            CHECK(std::abs(hyperbolic_potential(q, z) - beta) <= 1e-8);
        }
    }
    CHECK_THROWS_AS(geodesic_points(d, 0.0, 1), ArgumentError);
}
