#pragma once

#include "erosion/configuration.hpp"
#include "erosion/errors.hpp"
#include "erosion/graph.hpp"
#include "erosion/lattice.hpp"
#include "erosion/rng.hpp"
#include "erosion/walk.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace erosion {

struct Aggregate {
    RegionMask occupied;
    // Newly occupied vertices in order.
    std::vector<int> history;

    Aggregate() = default;
    explicit Aggregate(RegionMask initial) : occupied(std::move(initial)) {}

    int size() const { return occupied.count(); }
    bool full() const { return occupied.count() == occupied.size(); }
    bool contains(int v) const { return occupied.test(v); }
    void add(int v) {
        if (occupied.test(v)) return;
        occupied.set(v);
        history.push_back(v);
    }
};

inline constexpr int kAbsorbed = -1;

// One particle from start; the first vertex outside S (start included) is
// occupied and returned.
template <class R>
int idla_add(const Graph& g, Aggregate& agg, int start, R& rng) {
    if (agg.full()) throw ArgumentError("saturated: every vertex is occupied");
    const int x = walk_until(g, start, [&](int v) { return !agg.contains(v); }, rng);
    agg.add(x);
    return x;
}

struct PauseOutcome {
    int added = -1;         // newly occupied vertex, -1 when paused
    int paused = kAbsorbed;  // paused position outside T
};

// Walk from start in T. Leaving S first (or at the same step as leaving T)
// occupies that vertex; leaving T while still in S pauses the particle at
// its first vertex outside T, leaving the aggregate unchanged.
template <class R>
PauseOutcome idla_add_paused(const Graph& g, Aggregate& agg, int start, const RegionMask& t,
                             R& rng) {
    if (!t.test(start)) throw ArgumentError("start vertex lies outside the pausing set");
    if (agg.full() && t.count() == t.size()) throw ArgumentError("saturated: every vertex is occupied");
    PauseOutcome out;
    int v = start;
    std::int64_t k = 0;
    while (agg.contains(v)) {
        v = random_neighbor(g, v, rng);
        if (++k > kWalkGuard) throw NumericalError("random walk exceeded step guard");
        if (!t.test(v) && agg.contains(v)) {
            out.paused = v;
            return out;
        }
    }
    agg.add(v);
    out.added = v;
    return out;
}

struct PausedBatch {
    Aggregate aggregate;
    std::vector<int> paused;
};

// Particle j uses base.split(first_index + j, tag("particle")), so a batch
// equals the same particles added one call at a time.
PausedBatch idla_batch_paused(const Graph& g, Aggregate agg, const std::vector<int>& starts,
                              const RegionMask& t, const Rng& base, std::uint64_t first_index = 0);
// Releases every start with no pausing, same stream convention.
Aggregate idla_batch(const Graph& g, Aggregate agg, const std::vector<int>& starts, const Rng& base,
                     std::uint64_t first_index = 0);
Rng particle_stream(const Rng& base, std::uint64_t index);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    int cells = 0;         // after pooling
    int raw_cells = 0;     // distinct outcomes seen
};

// Two-sample chi-square homogeneity test on outcome keys. Cells with an
// expected count below 5 in either sample are pooled; throws ArgumentError
// when pooling cannot reach that.
ChiSquareResult chi_square_homogeneity(const std::vector<std::uint64_t>& a,
                                       const std::vector<std::uint64_t>& b);

// Final-aggregate law for starts in the given order versus the permuted
// order. |V| <= 60 and at most 6 particles.
ChiSquareResult abelian_test(const Graph& g, const RegionMask& initial, const std::vector<int>& starts,
                             const std::vector<int>& permutation, int trials, std::uint64_t seed);

// Unpaused aggregate law versus pausing on exit from T and then releasing the
// paused particles.
ChiSquareResult pause_release_test(const Graph& g, const RegionMask& initial,
                                   const std::vector<int>& starts, const RegionMask& t, int trials,
                                   std::uint64_t seed);

struct StageRecord {
    int j = 0;
    int m = 0;         // pausing depth in shells past the interface
    int released = 0;  // particles walking in this stage
    int k = 0;         // particles paused at its end
};

struct AnnulusSeed {
    std::uint64_t seed = 0;
    int new_sites = 0;
    double deepest_h = 0.0;
    double deepest_fraction = 0.0;  // area fraction of U_{deepest_h}
    double depth = 0.0;             // alpha - deepest_fraction
    double statistic = 0.0;         // depth / sqrt(eps)
    bool contained = true;
    std::vector<StageRecord> stages;
};

struct AnnulusReport {
    int n = 0;
    double alpha = 0.0, eps = 0.0, eps_prime = 0.0, C = 0.0, D = 0.0;
    int particles = 0;
    int initial_shells = 0;
    double max_statistic = 0.0;  // empirical C
    bool contained = true;
    std::vector<AnnulusSeed> seeds;
};

struct AnnulusOptions {
    double C = 8.0;
    double D = 10.0;          // requires eps_prime <= eps / D
    bool record_stages = false;
    double stage_fraction = 0.1;  // the eps_1 of the staging rule
};

// Initial cluster: U_n minus U_(alpha), plus floor(eps' n) shells on the blue
// side. floor(eps n^2) particles start uniformly on U_2n.
AnnulusReport annulus_experiment(const LatticeDomain& lattice, double alpha, double eps,
                                 double eps_prime, const std::vector<std::uint64_t>& seeds,
                                 const AnnulusOptions& opts = {});

struct CouplingReport {
    int steps = 0;
    bool dominated = true;
    int first_violation = -1;
    int red_size = 0;
    int idla_size = 0;
};

// Competitive erosion run with each red walker continued past its erosion
// stopping point until it leaves the IDLA aggregate started from the red set.
CouplingReport erosion_idla_coupling(const LatticeDomain& lattice, const Configuration& start,
                                     int steps, std::uint64_t seed);

void write_aggregate_csv(const LatticeDomain& lattice, const Aggregate& agg, std::ostream& out);
void write_stage_csv(const AnnulusReport& report, std::ostream& out);

} // namespace erosion
