#pragma once

#include "erosion/graph.hpp"
#include "erosion/lattice.hpp"

#include <cstdint>
#include <vector>

namespace erosion {

inline constexpr std::uint8_t kBlue = 1;
inline constexpr std::uint8_t kRed = 2;

// Two-colouring of the lattice vertices.
struct Configuration {
    std::vector<std::uint8_t> color;
    int blue_count = 0;

    int size() const { return static_cast<int>(color.size()); }
    bool is_blue(int v) const { return color[static_cast<std::size_t>(v)] == kBlue; }
    bool is_red(int v) const { return color[static_cast<std::size_t>(v)] == kRed; }
    void set(int v, std::uint8_t c);

    static Configuration from_blue_mask(const RegionMask& blue);
    RegionMask blue_mask() const;
    RegionMask red_mask() const;
    // Swap the two colours.
    Configuration swapped() const;
};

// Blue count k = floor(alpha |U_n|) of the chain with area fraction alpha.
int blue_target(const LatticeDomain& lattice, double alpha);

// Vertices reachable from the colour-c vertices of blob c by a path of
// colour-c vertices (c = 1 blue from blob 1, c = 2 red from blob 2).
RegionMask monochromatic_region(const LatticeDomain& lattice, const Configuration& config, int c);

} // namespace erosion
