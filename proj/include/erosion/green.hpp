#pragma once

#include "erosion/configuration.hpp"
#include "erosion/lattice.hpp"
#include "erosion/linalg.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace erosion {

// Centered discrete Green function. values solve
// Delta G = (1(U_1n) - 1(U_2n)) / |U_1n| with Delta f = f - neighbour average.
// The degree-weighted-mean-zero solution (the occupation-time form) equals
// values + centering.
struct GreenField {
    std::vector<double> values;
    double centering = 0.0;
    double max_residual = 0.0;
    SolveInfo info;

    double operator[](int v) const { return values[static_cast<std::size_t>(v)]; }
    int size() const { return static_cast<int>(values.size()); }
};

// Source term f = (1(U_1n) - 1(U_2n)) / |U_1n|.
std::vector<double> green_source(const LatticeDomain& lattice);

// Degree-normalized Laplacian F(x) - (1/d_x) sum_{y~x} F(y).
std::vector<double> normalized_laplacian(const Graph& g, const std::vector<double>& f);

GreenField solve_green(const LatticeDomain& lattice, double tol = 1e-10);

struct McEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    std::int64_t samples = 0;
};

// Occupation-time difference (1/|U_1n|) E_x sum_{k<horizon} f-indicators.
// Estimates values[x] + centering.
McEstimate occupation_green_mc(const LatticeDomain& lattice, int x, std::int64_t trials,
                               std::int64_t horizon, std::uint64_t seed);
// Smallest admissible horizon, ceil(10 n^2 ln n).
std::int64_t occupation_horizon(int n);

// G_* by quadrature over the source disks U_i = B(y_i, radius).
class ContinuumGreen {
public:
    ContinuumGreen(const SmoothDomain& domain, cplx y1, cplx y2, double radius);
    // Disks of radius delta/4 around the lattice's inward points.
    static ContinuumGreen for_lattice(const LatticeDomain& lattice);

    double operator()(cplx z) const;
    // tilde f = (16/area(U_1)) (1(U_2) - 1(U_1)).
    double source_density(cplx w) const;
    const SmoothDomain& domain() const { return domain_; }
    double radius() const { return radius_; }
    cplx center(int i) const { return i == 1 ? y1_ : y2_; }

private:
    double blob_integral(int i, cplx z, cplx pz) const;
    double far_integral(int i, cplx pz) const;
    double near_integral(int i, cplx z, cplx pz) const;

    SmoothDomain domain_;
    cplx y1_, y2_;
    double radius_;
    double area_;
    // Far-field nodes per blob: psi(w) and weight (dA).
    std::vector<cplx> nodes_[2];
    std::vector<double> weights_[2];
};

struct GreenComparisonRow {
    int m = 0;
    int n = 0;
    double supnorm = 0.0;
    // Least-squares factor lambda fitting lambda G_n to G_*, and the sup of
    // |lambda G_n - G_*| after the fit.
    double fitted_scale = 0.0;
    double supnorm_fitted = 0.0;
    double value_at_zero = 0.0;
};

std::vector<GreenComparisonRow> compare_green_continuum(
    const std::vector<const LatticeDomain*>& lattices, const ContinuumGreen& continuum);

// G_* at every lattice vertex.
std::vector<double> sample_continuum(const LatticeDomain& lattice, const ContinuumGreen& continuum);

double weight(const Configuration& config, const GreenField& field);
// Sum of the k largest values.
double weight_max(const GreenField& field, int k);

struct DriftResult {
    double value = 0.0;
    // Expected G at the blue absorption point and at the red one.
    double blue_term = 0.0;
    double red_term = 0.0;
    int exit_support = 0;
    int red_solves = 0;
    // Set when the exit support was too large and Monte Carlo was used.
    bool fallback = false;
    double stderr_ = 0.0;
};

inline constexpr int kExitSupportLimit = 5000;

// E[G(X) - G(Y)] for one full step from config.
DriftResult drift_exact(const LatticeDomain& lattice, const Configuration& config,
                        const GreenField& field, std::int64_t fallback_replicas = 100000,
                        std::uint64_t fallback_seed = 1);
McEstimate drift_mc(const LatticeDomain& lattice, const Configuration& config,
                    const GreenField& field, std::int64_t replicas, std::uint64_t seed);

// Exact law of the blue absorption vertex from a uniform start on U_1n.
std::vector<double> blue_exit_distribution(const LatticeDomain& lattice, const Configuration& config);

void write_green_csv(const LatticeDomain& lattice, const std::vector<double>& values,
                     std::ostream& out);

} // namespace erosion
