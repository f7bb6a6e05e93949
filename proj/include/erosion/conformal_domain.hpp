#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace erosion {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
// Scale of the hyperbolic potential h.
inline constexpr double kPotentialScale = 64.0 / kPi;

enum class Family { Disc, Quadratic };

struct DomainSpec {
    Family family = Family::Disc;
    double c = 0.0;
    // Marks as boundary angles on the preimage disc of the family map.
    double theta1 = -kPi / 2;
    double theta2 = kPi / 2;
};

// Simply connected domain U = phi(D). The family map F is z or z + c z^2;
// phi = F o M^{-1}, psi = M o F^{-1}, where the disc automorphism M sends the
// preimages of the marks to -i and i.
class SmoothDomain {
public:
    explicit SmoothDomain(const DomainSpec& spec);

    static SmoothDomain disc() { return SmoothDomain(DomainSpec{}); }
    static SmoothDomain quadratic(double c) {
        DomainSpec s;
        s.family = Family::Quadratic;
        s.c = c;
        return SmoothDomain(s);
    }

    const DomainSpec& spec() const { return spec_; }
    std::string describe() const;

    cplx phi(cplx zeta) const;
    cplx dphi(cplx zeta) const;
    cplx psi(cplx z) const;
    bool contains(cplx z) const;

    cplx x1() const { return x1_; }
    cplx x2() const { return x2_; }
    cplx boundary_point(double theta) const { return phi(std::polar(1.0, theta)); }

    double area() const;
    // Largest inward offset the boundary supports (inverse of the maximal
    // positive curvature), sampled on 4096 boundary points.
    double reach() const { return reach_; }
    // Axis-aligned bounding box of U: {xmin, xmax, ymin, ymax}.
    std::array<double, 4> bounding_box() const { return bbox_; }

    // Family map and its inverse by damped Newton.
    cplx family_map(cplx w) const;
    cplx family_dmap(cplx w) const;
    cplx family_inverse(cplx z) const;

    // Disc automorphism and its inverse.
    cplx automorphism(cplx w) const;
    cplx automorphism_inverse(cplx zeta) const;
    cplx automorphism_inverse_derivative(cplx zeta) const;

private:
    DomainSpec spec_;
    cplx a_{0.0, 0.0};
    cplx rot_{1.0, 0.0};
    cplx x1_, x2_;
    double reach_ = 1.0;
    std::array<double, 4> bbox_{};
};

// h(z) = (64/pi) log|(psi(z) - i)/(psi(z) + i)|.
double hyperbolic_potential(const SmoothDomain& domain, cplx z);
// Same potential in disc coordinates.
double potential_of_zeta(cplx zeta);

double area_of_level_region(const SmoothDomain& domain, double beta);
double beta_of_alpha(const SmoothDomain& domain, double alpha);

struct ShellDecomposition {
    // levels[j] is a_{first_index + j}; strictly decreasing. Infinite end
    // levels appear only when the march reached the boundary.
    std::vector<double> levels;
    std::vector<double> crossings;  // transversal parameter s of each finite level
    int first_index = 0;
    double spacing = 0.0;
    bool truncated = false;
    int n = 0;

    int shell_count() const { return static_cast<int>(levels.size()) - 1; }
    int first_shell() const { return first_index; }
    int last_shell() const { return first_index + shell_count() - 1; }
    double level(int i) const { return levels.at(static_cast<std::size_t>(i - first_index)); }
    // Index i with a_{i+1} <= h < a_i, if h lies in the covered band.
    std::optional<int> shell_of(double h) const;
};

// window < 0 marches to the boundary on both sides. spacing_factor scales the
// 1/n distance between consecutive crossings on the transversal phi(i s).
ShellDecomposition build_shells(const SmoothDomain& domain, int n, double beta, int window,
                                double spacing_factor = 1.0);

cplx inward_point(const SmoothDomain& domain, cplx x, double delta);

std::vector<cplx> geodesic_points(const SmoothDomain& domain, double beta, int count);

// Transversal crossing parameter s with h(phi(i s)) = a.
double transversal_parameter(double a);

} // namespace erosion
