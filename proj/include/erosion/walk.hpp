#pragma once

#include "erosion/errors.hpp"
#include "erosion/graph.hpp"

#include <cstdint>

namespace erosion {

inline constexpr std::int64_t kWalkGuard = 1'000'000'000;

template <class R>
int random_neighbor(const Graph& g, int v, R& rng) {
    const auto nb = g.neighbors(v);
    return nb[static_cast<std::size_t>(rng.uniform_index(nb.size()))];
}

// Simple random walk from start until the first vertex (start included)
// satisfying stop. steps receives the number of jumps taken.
template <class Stop, class R>
int walk_until(const Graph& g, int start, Stop&& stop, R& rng, std::int64_t* steps = nullptr) {
    int v = start;
    std::int64_t k = 0;
    while (!stop(v)) {
        v = random_neighbor(g, v, rng);
        if (++k > kWalkGuard) throw NumericalError("random walk exceeded step guard");
    }
    if (steps) *steps = k;
    return v;
}

} // namespace erosion
