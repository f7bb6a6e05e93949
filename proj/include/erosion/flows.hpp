#pragma once

#include "erosion/configuration.hpp"
#include "erosion/erosion.hpp"
#include "erosion/graph.hpp"
#include "erosion/green.hpp"
#include "erosion/lattice.hpp"
#include "erosion/rng.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace erosion {

// Antisymmetric edge function. value[e] is the flow from edge(e)[0] to
// edge(e)[1]; self-loops always carry 0.
struct Flow {
    const Graph* graph = nullptr;
    std::vector<double> value;

    // f(from -> other end of e).
    double along(int e, int from) const;
    Flow& operator+=(const Flow& o);
    Flow& operator*=(double s);
};

Flow zero_flow(const Graph& g);
// grad F (v, w) = F(w) - F(v).
Flow gradient(const Graph& g, const std::vector<double>& f);
// div f (v) = sum over w ~ v of f(w, v).
std::vector<double> divergence(const Flow& flow);
double energy(const Flow& flow);
double inner_product(const Flow& a, const Flow& b);

// |E(grad F) - sum_v F(v) d_v Delta F(v)|.
double check_summation_by_parts(const Graph& g, const std::vector<double>& f);

// Unit flow around the lattice square with lower-left corner (ix, iy),
// counterclockwise. Throws ArgumentError if the square is not fully present.
Flow square_circulation(const LatticeDomain& lattice, int ix, int iy);
// Sum of count unit square circulations with N(0,1)-like random weights.
Flow random_circulation(const LatticeDomain& lattice, int count, Rng& rng);

struct ThomsonVerdict {
    bool accepted = false;  // divergence matched the prescription
    bool holds = false;     // E(grad G_n) <= E(trial)
    double energy = 0.0;
    double excess = 0.0;    // E(trial) - E(grad G_n)
    double divergence_error = 0.0;
    std::string diagnostic;
};

// Prescribed divergence d_v Delta G_n(v) = 4 (1(U_1n) - 1(U_2n)) / |U_1n|.
std::vector<double> green_divergence(const LatticeDomain& lattice);
std::vector<ThomsonVerdict> thomson_check(const LatticeDomain& lattice, const GreenField& field,
                                          const std::vector<Flow>& trials, double tol = 1e-9);

enum class GreenVariant { Plain, Star };

struct StoppedGreen {
    std::vector<double> values;
    GreenVariant variant = GreenVariant::Plain;
    int blob = 1;
    RegionMask absorbing;
    double max_residual = 0.0;
};

// Expected f_i-occupation before leaving R_i (plain), or before leaving R_i
// or hitting the inner boundary of the filled region (star).
StoppedGreen stopped_green(const LatticeDomain& lattice, const RegionStructure& regions, int blob,
                           GreenVariant variant, double tol = 1e-12);

struct GluedGraph {
    const Graph* base = nullptr;
    // Quotient vertex of each base vertex. Edge ids match the base graph.
    std::vector<int> cls;
    Graph quotient;
    // Quotient vertex of each glued set (empty sets get -1).
    std::vector<int> super_vertices;
};

// Non-glued vertices keep their relative order, and the glued sets follow.
// Sets must be disjoint.
GluedGraph glue(const Graph& g, const std::vector<RegionMask>& sets);

struct MinEnergyFlow {
    Flow flow;  // on the quotient graph
    std::vector<double> potential;
    double energy = 0.0;
};

// Minimum-energy flow on the quotient with the given divergence per quotient
// vertex. If implied >= 0 that entry is replaced by minus the sum of the rest.
MinEnergyFlow min_energy_flow(const GluedGraph& glued, std::vector<double> divergence,
                              int implied = -1, double tol = 1e-13);

// Rewrites a base-graph vertex function as a quotient divergence prescription:
// glued classes receive the sum of their members.
std::vector<double> push_forward(const GluedGraph& glued, const std::vector<double>& base_values);

enum class AssumptionCase {
    Holds = 0,
    SmallR1 = 1,   // R_1 stays inside B(z_1, delta_2)
    R2NearZ1 = 2,  // R_2 comes within delta_1 of z_1
    SmallR2 = 3,
    R1NearZ2 = 4,
};

struct AssumptionExponents {
    double a1 = 0.9;
    double a2 = 0.5;
};

AssumptionCase assumption_case(const LatticeDomain& lattice, const RegionStructure& regions,
                               AssumptionExponents exps = {});
const char* to_string(AssumptionCase c);

struct EnergyReport {
    AssumptionCase regime = AssumptionCase::Holds;
    // R_1 misses U_2n and R_2 misses U_1n, so the stopped energies exist.
    bool disjoint = false;
    double E = 0.0, E1 = 0.0, E2 = 0.0, E1star = 0.0, E2star = 0.0, Ewired = 0.0;
    double bound = 0.0;  // (E - E1 - E2) / 4
    double drift_exact = 0.0;
    // Boundary extension of grad G*_1 to the outer graph, and its energy.
    double theta1_energy = 0.0;
    double theta1_divergence_error = 0.0;
    // Total grad G*_1 flow from the inner boundary into R_1.
    double boundary_flux1 = 0.0;
    bool star_monotone = false;   // E*_i <= E_i
    bool splits = false;          // E >= E*_1 + E_2
    bool wired_monotone = false;  // E^wired <= E
    bool drift_bound = false;     // drift >= bound
};

EnergyReport energy_decomposition_check(const LatticeDomain& lattice, const Configuration& config,
                                        const GreenField& field, AssumptionExponents exps = {},
                                        double tol = 1e-9);

void write_energy_csv_header(std::ostream& out);
void write_energy_csv_row(std::ostream& out, int config_id, const EnergyReport& r);

struct GainBound {
    double bound = 0.0;        // [sum gaps]^2 / (D^2 sum d_i)
    int D = 0;                 // max number of paths using one edge
    long total_length = 0;     // sum d_i
    double gap_sum = 0.0;
    double beta = 0.0;         // optimal extra flow along the cycles
    double base_energy = 0.0;  // E(grad G_n)
    double augmented_energy = 0.0;  // E(theta_A) at beta
    bool verified = false;     // augmented <= base - bound (up to rounding)
};

// Paths are vertex sequences from z'_i to z_i or the reverse; each is oriented
// from its lower to its higher G_n endpoint before augmenting.
GainBound gain_bound(const LatticeDomain& lattice, const GreenField& field,
                     const std::vector<std::vector<int>>& paths);

struct ShellPairing {
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::vector<int>> paths;
    int occupied_shells = 0;
    int max_multiplicity = 0;
    int max_length = 0;
};

// One point of A per non-adjacent occupied shell, paired across half the list,
// joined by shortest paths that use no edge more than twice.
ShellPairing shell_pairing(const LatticeDomain& lattice, const ShellDecomposition& shells,
                           const RegionMask& a);

} // namespace erosion
