#pragma once

#include "erosion/configuration.hpp"
#include "erosion/green.hpp"
#include "erosion/lattice.hpp"
#include "erosion/rng.hpp"
#include "erosion/walk.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace erosion {

enum class InitialKind { UniformExact, LevelSet, BernoulliRepaired };

// Initial configuration with exactly floor(alpha |U_n|) blue vertices.
// bernoulli_p is the colouring probability of the BernoulliRepaired kind.
Configuration sample_initial(const LatticeDomain& lattice, double alpha, InitialKind kind,
                             std::uint64_t seed, double bernoulli_p = 1.0 / 3.0);

struct StepRecord {
    int blue_start = -1;
    int blue_end = -1;
    std::int64_t blue_steps = 0;
    int red_start = -1;
    int red_end = -1;
    std::int64_t red_steps = 0;
};

struct ChainState {
    Configuration config;
    // Twice the chain time; even in Omega, odd in Omega'.
    std::int64_t half_steps = 0;
    Rng rng;

    double time() const { return 0.5 * static_cast<double>(half_steps); }
};

ChainState make_chain(Configuration config, std::uint64_t seed, std::uint64_t replica = 0);

// Blue walker: uniform start on U_1n, first non-blue vertex becomes blue.
template <class R>
int blue_half_step(const LatticeDomain& lattice, Configuration& config, R& rng, int* start = nullptr,
                   std::int64_t* steps = nullptr) {
    const auto& b1 = lattice.blob(1);
    const int s = b1[static_cast<std::size_t>(rng.uniform_index(b1.size()))];
    const int x = walk_until(lattice.graph(), s, [&](int v) { return !config.is_blue(v); }, rng, steps);
    config.set(x, kBlue);
    if (start) *start = s;
    return x;
}

// Red walker: uniform start on U_2n, first blue vertex becomes red.
template <class R>
int red_half_step(const LatticeDomain& lattice, Configuration& config, R& rng, int* start = nullptr,
                  std::int64_t* steps = nullptr) {
    const auto& b2 = lattice.blob(2);
    const int s = b2[static_cast<std::size_t>(rng.uniform_index(b2.size()))];
    const int y = walk_until(lattice.graph(), s, [&](int v) { return config.is_blue(v); }, rng, steps);
    config.set(y, kRed);
    if (start) *start = s;
    return y;
}

template <class R>
StepRecord erosion_step(const LatticeDomain& lattice, Configuration& config, R& rng) {
    StepRecord rec;
    rec.blue_end = blue_half_step(lattice, config, rng, &rec.blue_start, &rec.blue_steps);
    rec.red_end = red_half_step(lattice, config, rng, &rec.red_start, &rec.red_steps);
    return rec;
}

// One full step from a state in Omega.
StepRecord erosion_step(const LatticeDomain& lattice, ChainState& state);
// Blue half step in Omega, red half step in Omega'. Returns the recoloured vertex.
int advance_half_step(const LatticeDomain& lattice, ChainState& state);

struct RegionStructure {
    RegionMask r1, r2;
    // Source neighbourhoods A_{i,n}: B(z_{i,n}, delta) component of z_{i,n}.
    RegionMask a1, a2;
    RegionMask filled1, filled2;
    RegionMask inner1, outer1, inner2, outer2;
    bool inner1_star_connected = false, outer1_star_connected = false;
    bool inner2_star_connected = false, outer2_star_connected = false;
    // The other region (with its source neighbourhood) lies in the kept
    // outer component of the complement.
    bool regular1 = true, regular2 = true;
};

RegionMask source_neighbourhood(const LatticeDomain& lattice, int blob);
RegionMask inner_boundary(const Graph& g, const RegionMask& set);
RegionMask outer_boundary(const Graph& g, const RegionMask& set);
// Connectivity of the set in the star graph (empty sets count as connected).
bool star_connected(const LatticeDomain& lattice, const RegionMask& set);

RegionStructure region_structure(const LatticeDomain& lattice, const Configuration& config);

struct ClassifyFlags {
    bool in_G = false;
    bool in_A = false;
    bool in_Gamma1 = false;
    bool in_Gamma2 = false;
    bool in_Omega = false;
    int wrong_red_inside = 0;
    int wrong_blue_outside = 0;
    int offending_negative = 0;
    int offending_positive = 0;
    double weight = 0.0;
    double weight_max = 0.0;
};

// G uses eps; A uses eps; Gamma uses eps1 and eps2 (w >= w_max - 2 eps_j n^2);
// Omega_(eps) counts offending shells of the decomposition around beta(alpha).
ClassifyFlags classify(const LatticeDomain& lattice, const Configuration& config,
                       const GreenField& field, const ShellDecomposition& shells, double alpha,
                       double eps, double eps1, double eps2);

struct BlockingCertificate {
    RegionMask blue;  // B
    RegionMask red;   // A
};

// U_n \ A separates the nonempty remainders of both blobs.
bool is_blocking(const LatticeDomain& lattice, const RegionMask& set);
// A over B in the sense: A misses the U_1n side of U_n \ B, and B misses the
// U_2n side of U_n \ A.
bool is_over(const LatticeDomain& lattice, const RegionMask& a, const RegionMask& b);

// Search over monochromatic star-connected components for a blue blocking
// set over a red blocking set.
std::optional<BlockingCertificate> detect_blue_over_red(const LatticeDomain& lattice,
                                                        const Configuration& config);

} // namespace erosion
