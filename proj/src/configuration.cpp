#include "erosion/configuration.hpp"

#include "erosion/errors.hpp"

#include <cmath>

namespace erosion {

void Configuration::set(int v, std::uint8_t c) {
    auto& slot = color[static_cast<std::size_t>(v)];
    if (slot == kBlue) --blue_count;
    slot = c;
    if (c == kBlue) ++blue_count;
}

Configuration Configuration::from_blue_mask(const RegionMask& blue) {
    Configuration cfg;
    cfg.color.assign(static_cast<std::size_t>(blue.size()), kRed);
    for (int v = 0; v < blue.size(); ++v)
        if (blue.test(v)) cfg.color[v] = kBlue;
    cfg.blue_count = blue.count();
    return cfg;
}

RegionMask Configuration::blue_mask() const {
    std::vector<char> b(color.size());
    for (std::size_t i = 0; i < color.size(); ++i) b[i] = color[i] == kBlue;
    return RegionMask(std::move(b));
}

RegionMask Configuration::red_mask() const {
    std::vector<char> b(color.size());
    for (std::size_t i = 0; i < color.size(); ++i) b[i] = color[i] == kRed;
    return RegionMask(std::move(b));
}

Configuration Configuration::swapped() const {
    Configuration out = *this;
    for (auto& c : out.color) c = c == kBlue ? kRed : kBlue;
    out.blue_count = size() - blue_count;
    return out;
}

int blue_target(const LatticeDomain& lattice, double alpha) {
    return static_cast<int>(std::floor(alpha * lattice.size()));
}

RegionMask monochromatic_region(const LatticeDomain& lattice, const Configuration& config, int c) {
    if (c != 1 && c != 2) throw ArgumentError("colour must be 1 or 2");
    const auto col = static_cast<std::uint8_t>(c);
    RegionMask region(lattice.size());
    std::vector<int> stack;
    for (int v : lattice.blob(c)) {
        if (config.color[v] == col && !region.test(v)) {
            region.set(v);
            stack.push_back(v);
        }
    }
    const Graph& g = lattice.graph();
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : g.neighbors(v)) {
            if (config.color[w] == col && !region.test(w)) {
                region.set(w);
                stack.push_back(w);
            }
        }
    }
    return region;
}

} // namespace erosion
