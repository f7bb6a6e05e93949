#pragma once

#include "erosion/configuration.hpp"
#include "erosion/conformal_domain.hpp"
#include "erosion/erosion.hpp"
#include "erosion/lattice.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

namespace erosion {

struct ShellCount {
    int index = 0;
    int blue = 0;
    int red = 0;
};

struct WrongColorProfile {
    int red_inside = 0;    // red in the alpha-region
    int blue_outside = 0;  // blue outside it
    int blue_inside = 0;
    int red_outside = 0;
    int offending_negative = 0;  // blue-side shells holding a red vertex
    int offending_positive = 0;  // red-side shells holding a blue vertex
    std::vector<ShellCount> shells;
};

WrongColorProfile wrong_color_profile(const LatticeDomain& lattice, const Configuration& config,
                                      const RegionMask& region, const ShellDecomposition& shells);

// |S symmetric-difference region| / |U_n|.
double symmetric_difference_fraction(const Configuration& config, const RegionMask& region);
double symmetric_difference_fraction(const LatticeDomain& lattice, const Configuration& config,
                                     double alpha);

// exp(-(a2 - a1 T)^2 / (4 A2^2 T)); needs a2 - a1 T < 0.
double azuma_tail(double A2, double a1, double a2, double T);

struct EscapeBound {
    double t_prime = 0.0;      // exp(min(a4^2, a1^2 T^2) / (32 A2^2 T))
    double probability = 0.0;  // lower bound on P(tau(B') >= T')
};
// Needs a4 > 2 A2 and T > 2 A2 / a1.
EscapeBound azuma_escape(double A2, double a1, double a4, double T);

// t1 / (t1 + t2).
double hitstation_bound(double t1, double t2);

struct HittingSample {
    std::uint64_t seed = 0;
    std::int64_t steps = 0;
    bool censored = false;
};

struct HittingSummary {
    std::vector<HittingSample> samples;
    double mean_uncensored = 0.0;
    int censored = 0;
};

// Runs step until pred holds (checked every check_every steps and at 0).
HittingSummary measure_hitting_time(const std::function<ChainState(std::uint64_t)>& make,
                                    const std::function<void(ChainState&)>& step,
                                    const std::function<bool(const ChainState&)>& pred,
                                    std::int64_t max_steps, const std::vector<std::uint64_t>& seeds,
                                    std::int64_t check_every = 1);

struct Rgb {
    std::uint8_t r = 255, g = 255, b = 255;
    bool operator==(const Rgb& o) const { return r == o.r && g == o.g && b == o.b; }
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBluePixel{0, 0, 255};
inline constexpr Rgb kRedPixel{255, 0, 0};
inline constexpr Rgb kOverlayPixel{0, 0, 0};

struct Raster {
    int width = 0;
    int height = 0;
    std::vector<Rgb> pixels;  // row-major, top row first

    Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y * width + x)]; }
    const Rgb& at(int x, int y) const { return pixels[static_cast<std::size_t>(y * width + x)]; }
};

// cells row-major with top row first: 0 white, 1 blue, 2 red.
Raster render_cells(int width, int height, const std::vector<std::uint8_t>& cells, int scale = 1);

struct RenderOptions {
    int scale = 1;
    // Points drawn over the raster, e.g. geodesic_points of gamma_beta.
    std::vector<cplx> overlay;
};

Raster render_configuration(const LatticeDomain& lattice, const Configuration& config,
                            const RenderOptions& opts = {});
// Blue for positive, white at 0, red for negative, scaled by max |value|.
Raster render_field(const LatticeDomain& lattice, const std::vector<double>& values,
                    const RenderOptions& opts = {});
Rgb diverging_color(double t);

void write_ppm(const Raster& raster, std::ostream& out);

} // namespace erosion
