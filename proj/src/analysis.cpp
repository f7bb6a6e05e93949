#include "erosion/analysis.hpp"

#include "erosion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace erosion {

WrongColorProfile wrong_color_profile(const LatticeDomain& lattice, const Configuration& config,
                                      const RegionMask& region, const ShellDecomposition& shells) {
    if (config.size() != lattice.size() || region.size() != lattice.size())
        throw ArgumentError("configuration, region and lattice sizes differ");
    WrongColorProfile p;
    for (int v = 0; v < lattice.size(); ++v) {
        const bool in = region.test(v);
        if (config.is_blue(v)) (in ? p.blue_inside : p.blue_outside)++;
        else (in ? p.red_inside : p.red_outside)++;
    }
    if (shells.shell_count() <= 0) return p;
    p.shells.resize(static_cast<std::size_t>(shells.shell_count()));
    for (int i = 0; i < shells.shell_count(); ++i) p.shells[i].index = shells.first_shell() + i;
    const auto idx = shell_index(lattice, shells);
    for (int v = 0; v < lattice.size(); ++v) {
        if (idx[v] == std::numeric_limits<int>::min()) continue;
        auto& s = p.shells[static_cast<std::size_t>(idx[v] - shells.first_shell())];
        (config.is_blue(v) ? s.blue : s.red)++;
    }
    for (const auto& s : p.shells) {
        if (s.index < 0 && s.red > 0) ++p.offending_negative;
        if (s.index > 0 && s.blue > 0) ++p.offending_positive;
    }
    return p;
}

double symmetric_difference_fraction(const Configuration& config, const RegionMask& region) {
    if (config.size() != region.size()) throw ArgumentError("configuration and region sizes differ");
    if (config.size() == 0) return 0.0;
    int diff = 0;
    for (int v = 0; v < config.size(); ++v) diff += config.is_blue(v) != region.test(v);
    return static_cast<double>(diff) / config.size();
}

double symmetric_difference_fraction(const LatticeDomain& lattice, const Configuration& config,
                                     double alpha) {
    return symmetric_difference_fraction(
        config, level_region_mask(lattice, beta_of_alpha(lattice.domain(), alpha)));
}

double azuma_tail(double A2, double a1, double a2, double T) {
    if (!(A2 > 0 && a1 > 0 && a2 > 0 && T > 0)) throw ArgumentError("bound inapplicable: parameters must be positive");
    const double gap = a2 - a1 * T;
    if (!(gap < 0)) throw ArgumentError("bound inapplicable: a2 - a1 T must be negative");
    return std::exp(-gap * gap / (4.0 * A2 * A2 * T));
}

EscapeBound azuma_escape(double A2, double a1, double a4, double T) {
    if (!(A2 > 0 && a1 > 0 && a4 > 0 && T > 0)) throw ArgumentError("bound inapplicable: parameters must be positive");
    if (!(a4 > 2.0 * A2)) throw ArgumentError("bound inapplicable: a4 must exceed 2 A2");
    if (!(T > 2.0 * A2 / a1)) throw ArgumentError("bound inapplicable: T must exceed 2 A2 / a1");
    const double den = 32.0 * A2 * A2 * T;
    EscapeBound b;
    b.t_prime = std::exp(std::min(a4 * a4, a1 * a1 * T * T) / den);
    const double fail = std::exp(-a4 * a4 / den) + std::exp(-a1 * a1 * T * T / den);
    b.probability = std::clamp(1.0 - fail, 0.0, 1.0);
    return b;
}

double hitstation_bound(double t1, double t2) {
    if (!(t1 > 0 && t2 > 0)) throw ArgumentError("bound inapplicable: hitting times must be positive");
    if (std::isinf(t2)) return std::isinf(t1) ? 1.0 : 0.0;
    if (std::isinf(t1)) return 1.0;
    return t1 / (t1 + t2);
}

HittingSummary measure_hitting_time(const std::function<ChainState(std::uint64_t)>& make,
                                    const std::function<void(ChainState&)>& step,
                                    const std::function<bool(const ChainState&)>& pred,
                                    std::int64_t max_steps, const std::vector<std::uint64_t>& seeds,
                                    std::int64_t check_every) {
    if (check_every < 1) throw ArgumentError("check interval must be positive");
    HittingSummary out;
    double total = 0.0;
    int hit = 0;
    for (auto seed : seeds) {
        ChainState st = make(seed);
        HittingSample s;
        s.seed = seed;
        std::int64_t t = 0;
        bool done = pred(st);
        while (!done && t < max_steps) {
            step(st);
            ++t;
            if (t % check_every == 0 || t == max_steps) done = pred(st);
        }
        s.steps = t;
        s.censored = !done;
        if (done) {
            total += static_cast<double>(t);
            ++hit;
        } else {
            ++out.censored;
        }
        out.samples.push_back(s);
    }
    out.mean_uncensored = hit > 0 ? total / hit : 0.0;
    return out;
}

Rgb diverging_color(double t) {
    t = std::clamp(t, -1.0, 1.0);
    const auto fade = static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - std::abs(t))));
    if (t >= 0) return Rgb{fade, fade, 255};
    return Rgb{255, fade, fade};
}

Raster render_cells(int width, int height, const std::vector<std::uint8_t>& cells, int scale) {
    if (width <= 0 || height <= 0 || scale <= 0) throw ArgumentError("raster dimensions must be positive");
    if (cells.size() != static_cast<std::size_t>(width) * height) throw ArgumentError("cell count mismatch");
    Raster r;
    r.width = width * scale;
    r.height = height * scale;
    r.pixels.assign(static_cast<std::size_t>(r.width) * r.height, kWhite);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const auto c = cells[static_cast<std::size_t>(y * width + x)];
            const Rgb col = c == kBlue ? kBluePixel : c == kRed ? kRedPixel : kWhite;
            for (int dy = 0; dy < scale; ++dy)
                for (int dx = 0; dx < scale; ++dx) r.at(x * scale + dx, y * scale + dy) = col;
        }
    return r;
}

namespace {

template <class Paint>
Raster lattice_raster(const LatticeDomain& lattice, const RenderOptions& opts, Paint&& paint) {
    const auto box = lattice.index_box();
    const int w = box[1] - box[0] + 1, h = box[3] - box[2] + 1;
    const int s = opts.scale;
    if (s <= 0) throw ArgumentError("raster scale must be positive");
    Raster r;
    r.width = w * s;
    r.height = h * s;
    r.pixels.assign(static_cast<std::size_t>(r.width) * r.height, kWhite);
    for (int v = 0; v < lattice.size(); ++v) {
        const auto c = lattice.coord(v);
        const int x = c.ix - box[0], y = box[3] - c.iy;
        const Rgb col = paint(v);
        for (int dy = 0; dy < s; ++dy)
            for (int dx = 0; dx < s; ++dx) r.at(x * s + dx, y * s + dy) = col;
    }
    const double n = lattice.n();
    for (cplx z : opts.overlay) {
        const double px = (z.real() * n - box[0] + 0.5) * s;
        const double py = (box[3] - z.imag() * n + 0.5) * s;
        const int x = static_cast<int>(std::floor(px)), y = static_cast<int>(std::floor(py));
        if (x >= 0 && x < r.width && y >= 0 && y < r.height) r.at(x, y) = kOverlayPixel;
    }
    return r;
}

} // namespace

Raster render_configuration(const LatticeDomain& lattice, const Configuration& config,
                            const RenderOptions& opts) {
    if (config.size() != lattice.size()) throw ArgumentError("configuration size mismatch");
    return lattice_raster(lattice, opts, [&](int v) { return config.is_blue(v) ? kBluePixel : kRedPixel; });
}

Raster render_field(const LatticeDomain& lattice, const std::vector<double>& values,
                    const RenderOptions& opts) {
    if (static_cast<int>(values.size()) != lattice.size()) throw ArgumentError("field size mismatch");
    double top = 0.0;
    for (double x : values) top = std::max(top, std::abs(x));
    return lattice_raster(lattice, opts, [&](int v) { return diverging_color(top > 0 ? values[v] / top : 0.0); });
}

void write_ppm(const Raster& raster, std::ostream& out) {
    out << "P6\n" << raster.width << ' ' << raster.height << "\n255\n";
    for (const auto& p : raster.pixels) {
        const char px[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
        out.write(px, 3);
    }
}

} // namespace erosion
