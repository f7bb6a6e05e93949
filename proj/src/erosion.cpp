#include "erosion/erosion.hpp"

#include "erosion/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace erosion {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha <= 0.5)) throw ArgumentError("alpha must lie in (0, 1/2]");
}

// Labels of the components of U_n minus the set.
std::pair<std::vector<int>, int> complement_components(const Graph& g, const RegionMask& set) {
    std::vector<char> keep(static_cast<std::size_t>(g.num_vertices()));
    for (int v = 0; v < g.num_vertices(); ++v) keep[v] = !set.test(v);
    return g.components(keep);
}

// Component labels touched by the vertices of mask outside the removed set.
std::vector<char> touched(const std::vector<int>& labels, int count, const RegionMask& mask) {
    std::vector<char> t(static_cast<std::size_t>(count), 0);
    for (int v = 0; v < mask.size(); ++v)
        if (mask.test(v) && labels[v] >= 0) t[labels[v]] = 1;
    return t;
}

std::vector<char> touched(const std::vector<int>& labels, int count, const std::vector<int>& verts) {
    std::vector<char> t(static_cast<std::size_t>(count), 0);
    for (int v : verts)
        if (labels[v] >= 0) t[labels[v]] = 1;
    return t;
}

} // namespace

Configuration sample_initial(const LatticeDomain& lattice, double alpha, InitialKind kind,
                             std::uint64_t seed, double bernoulli_p) {
    check_alpha(alpha);
    const int nv = lattice.size();
    const int k = blue_target(lattice, alpha);
    Rng rng(seed, 0, Rng::tag("initial"));
    RegionMask blue(nv);
    switch (kind) {
    case InitialKind::UniformExact: {
        std::vector<int> ids(nv);
        std::iota(ids.begin(), ids.end(), 0);
        for (int i = 0; i < k; ++i) {
            const int j = i + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(nv - i)));
            std::swap(ids[i], ids[j]);
            blue.set(ids[i]);
        }
        break;
    }
    case InitialKind::LevelSet: {
        std::vector<int> ids(nv);
        std::iota(ids.begin(), ids.end(), 0);
        std::sort(ids.begin(), ids.end(), [&](int a, int b) {
            if (lattice.h(a) != lattice.h(b)) return lattice.h(a) > lattice.h(b);
            const auto& ca = lattice.coord(a);
            const auto& cb = lattice.coord(b);
            return ca.ix != cb.ix ? ca.ix < cb.ix : ca.iy < cb.iy;
        });
        for (int i = 0; i < k; ++i) blue.set(ids[i]);
        break;
    }
    case InitialKind::BernoulliRepaired: {
        if (!(bernoulli_p >= 0.0 && bernoulli_p <= 1.0))
            throw ArgumentError("bernoulli probability must lie in [0, 1]");
        for (int v = 0; v < nv; ++v)
            if (rng.uniform01() < bernoulli_p) blue.set(v);
        // Flip a uniformly random minimal set of vertices to reach k.
        const bool too_many = blue.count() > k;
        std::vector<int> pool;
        for (int v = 0; v < nv; ++v)
            if (blue.test(v) == too_many) pool.push_back(v);
        const int flips = std::abs(blue.count() - k);
        for (int i = 0; i < flips; ++i) {
            const int j = i + static_cast<int>(rng.uniform_index(pool.size() - i));
            std::swap(pool[i], pool[j]);
            blue.set(pool[i], !too_many);
        }
        break;
    }
    }
    return Configuration::from_blue_mask(blue);
}

ChainState make_chain(Configuration config, std::uint64_t seed, std::uint64_t replica) {
    ChainState s;
    s.config = std::move(config);
    s.rng = Rng(seed, replica, Rng::tag("erosion"));
    return s;
}

StepRecord erosion_step(const LatticeDomain& lattice, ChainState& state) {
    if (state.half_steps % 2 != 0) throw ArgumentError("erosion_step needs a state in Omega");
    if (state.config.size() != lattice.size()) throw ArgumentError("configuration size mismatch");
    const auto rec = erosion_step(lattice, state.config, state.rng);
    state.half_steps += 2;
    return rec;
}

int advance_half_step(const LatticeDomain& lattice, ChainState& state) {
    if (state.config.size() != lattice.size()) throw ArgumentError("configuration size mismatch");
    const int v = state.half_steps % 2 == 0 ? blue_half_step(lattice, state.config, state.rng)
                                            : red_half_step(lattice, state.config, state.rng);
    ++state.half_steps;
    return v;
}

RegionMask source_neighbourhood(const LatticeDomain& lattice, int blob) {
    const int zc = lattice.blob_center(blob);
    const cplx c = lattice.position(zc);
    const Graph& g = lattice.graph();
    RegionMask out(lattice.size());
    std::vector<int> stack{zc};
    out.set(zc);
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int w : g.neighbors(v)) {
            if (!out.test(w) && std::abs(lattice.position(w) - c) < lattice.delta()) {
                out.set(w);
                stack.push_back(w);
            }
        }
    }
    return out;
}

RegionMask inner_boundary(const Graph& g, const RegionMask& set) {
    RegionMask out(set.size());
    for (int v = 0; v < set.size(); ++v) {
        if (!set.test(v)) continue;
        for (int w : g.neighbors(v))
            if (!set.test(w)) {
                out.set(v);
                break;
            }
    }
    return out;
}

RegionMask outer_boundary(const Graph& g, const RegionMask& set) {
    RegionMask out(set.size());
    for (int v = 0; v < set.size(); ++v) {
        if (set.test(v)) continue;
        for (int w : g.neighbors(v))
            if (set.test(w)) {
                out.set(v);
                break;
            }
    }
    return out;
}

bool star_connected(const LatticeDomain& lattice, const RegionMask& set) {
    if (set.empty()) return true;
    return lattice.star_graph().components(set.bits()).second == 1;
}

namespace {

struct Filled {
    RegionMask filled;
    bool regular = true;
};

Filled fill_holes(const LatticeDomain& lattice, const RegionMask& core, const RegionMask& other,
                  int other_blob) {
    const Graph& g = lattice.graph();
    const auto [labels, count] = complement_components(g, core);
    Filled res;
    if (count == 0) {
        res.filled = core;
        return res;
    }
    std::vector<int> blob_hits(static_cast<std::size_t>(count), 0), sizes(count, 0);
    for (int v : lattice.blob(other_blob))
        if (labels[v] >= 0) ++blob_hits[labels[v]];
    for (int v = 0; v < lattice.size(); ++v)
        if (labels[v] >= 0) ++sizes[labels[v]];
    // Outer component: most vertices of the other blob, then the largest,
    // then the lowest label.
    int outer = 0;
    for (int c = 1; c < count; ++c) {
        if (blob_hits[c] > blob_hits[outer] ||
            (blob_hits[c] == blob_hits[outer] && sizes[c] > sizes[outer]))
            outer = c;
    }
    std::vector<char> bits(static_cast<std::size_t>(lattice.size()), 0);
    for (int v = 0; v < lattice.size(); ++v) bits[v] = labels[v] != outer;
    res.filled = RegionMask(std::move(bits));
    for (int v = 0; v < lattice.size(); ++v)
        if (other.test(v) && labels[v] != outer) {
            res.regular = false;
            break;
        }
    return res;
}

} // namespace

RegionStructure region_structure(const LatticeDomain& lattice, const Configuration& config) {
    if (config.size() != lattice.size()) throw ArgumentError("configuration size mismatch");
    const Graph& g = lattice.graph();
    RegionStructure rs;
    rs.r1 = monochromatic_region(lattice, config, 1);
    rs.r2 = monochromatic_region(lattice, config, 2);
    rs.a1 = source_neighbourhood(lattice, 1);
    rs.a2 = source_neighbourhood(lattice, 2);
    auto f1 = fill_holes(lattice, rs.r1 | rs.a1, rs.r2 | rs.a2, 2);
    auto f2 = fill_holes(lattice, rs.r2 | rs.a2, rs.r1 | rs.a1, 1);
    rs.filled1 = std::move(f1.filled);
    rs.filled2 = std::move(f2.filled);
    rs.regular1 = f1.regular;
    rs.regular2 = f2.regular;
    rs.inner1 = inner_boundary(g, rs.filled1);
    rs.outer1 = outer_boundary(g, rs.filled1);
    rs.inner2 = inner_boundary(g, rs.filled2);
    rs.outer2 = outer_boundary(g, rs.filled2);
    rs.inner1_star_connected = star_connected(lattice, rs.inner1);
    rs.outer1_star_connected = star_connected(lattice, rs.outer1);
    rs.inner2_star_connected = star_connected(lattice, rs.inner2);
    rs.outer2_star_connected = star_connected(lattice, rs.outer2);
    return rs;
}

ClassifyFlags classify(const LatticeDomain& lattice, const Configuration& config,
                       const GreenField& field, const ShellDecomposition& shells, double alpha,
                       double eps, double eps1, double eps2) {
    if (shells.n != lattice.n() || shells.shell_count() <= 0)
        throw ConfigError("classify needs shells built for this lattice");
    if (config.size() != lattice.size() || field.size() != lattice.size())
        throw ArgumentError("configuration, field and lattice sizes differ");
    check_alpha(alpha);
    const SmoothDomain& d = lattice.domain();
    const double n2 = static_cast<double>(lattice.n()) * lattice.n();
    ClassifyFlags fl;

    const auto blue = config.blue_mask();
    const RegionMask inner = alpha - eps > 0 ? level_region_mask(lattice, beta_of_alpha(d, alpha - eps))
                                             : RegionMask(lattice.size());
    const RegionMask outer = alpha + eps < 1 ? level_region_mask(lattice, beta_of_alpha(d, alpha + eps))
                                             : RegionMask(lattice.size()).complement();
    fl.in_G = inner.subset_of(blue) && blue.subset_of(outer);

    const auto target = level_region_mask(lattice, beta_of_alpha(d, alpha));
    for (int v = 0; v < lattice.size(); ++v) {
        if (target.test(v) && config.is_red(v)) ++fl.wrong_red_inside;
        if (!target.test(v) && config.is_blue(v)) ++fl.wrong_blue_outside;
    }
    fl.in_A = fl.wrong_red_inside <= eps * n2 && fl.wrong_blue_outside <= eps * n2;

    fl.weight = weight(config, field);
    fl.weight_max = weight_max(field, config.blue_count);
    fl.in_Gamma1 = fl.weight >= fl.weight_max - 2.0 * eps1 * n2;
    fl.in_Gamma2 = fl.weight >= fl.weight_max - 2.0 * eps2 * n2;

    const auto idx = shell_index(lattice, shells);
    std::vector<char> neg(static_cast<std::size_t>(shells.shell_count()), 0), pos(neg.size(), 0);
    for (int v = 0; v < lattice.size(); ++v) {
        const int i = idx[v];
        if (i == std::numeric_limits<int>::min()) continue;
        const auto slot = static_cast<std::size_t>(i - shells.first_shell());
        if (i < 0 && config.is_red(v)) neg[slot] = 1;
        if (i > 0 && config.is_blue(v)) pos[slot] = 1;
    }
    fl.offending_negative = static_cast<int>(std::count(neg.begin(), neg.end(), 1));
    fl.offending_positive = static_cast<int>(std::count(pos.begin(), pos.end(), 1));
    const double lim = eps * lattice.n();
    fl.in_Omega = fl.offending_negative <= lim && fl.offending_positive <= lim;
    return fl;
}

bool is_blocking(const LatticeDomain& lattice, const RegionMask& set) {
    const auto [labels, count] = complement_components(lattice.graph(), set);
    if (count < 2) return false;
    const auto t1 = touched(labels, count, lattice.blob(1));
    const auto t2 = touched(labels, count, lattice.blob(2));
    bool any1 = false, any2 = false;
    for (int c = 0; c < count; ++c) {
        if (t1[c] && t2[c]) return false;
        any1 = any1 || t1[c];
        any2 = any2 || t2[c];
    }
    return any1 && any2;
}

bool is_over(const LatticeDomain& lattice, const RegionMask& a, const RegionMask& b) {
    const Graph& g = lattice.graph();
    {
        const auto [labels, count] = complement_components(g, b);
        const auto ta = touched(labels, count, a);
        const auto t1 = touched(labels, count, lattice.blob(1));
        for (int c = 0; c < count; ++c)
            if (ta[c] && t1[c]) return false;
    }
    {
        const auto [labels, count] = complement_components(g, a);
        const auto tb = touched(labels, count, b);
        const auto t2 = touched(labels, count, lattice.blob(2));
        for (int c = 0; c < count; ++c)
            if (tb[c] && t2[c]) return false;
    }
    return true;
}

std::optional<BlockingCertificate> detect_blue_over_red(const LatticeDomain& lattice,
                                                        const Configuration& config) {
    if (config.size() != lattice.size()) throw ArgumentError("configuration size mismatch");
    const Graph& star = lattice.star_graph();
    std::vector<RegionMask> blues, reds;
    for (int colour : {1, 2}) {
        std::vector<char> keep(static_cast<std::size_t>(lattice.size()));
        for (int v = 0; v < lattice.size(); ++v) keep[v] = config.color[v] == colour;
        const auto [labels, count] = star.components(keep);
        std::vector<std::vector<char>> bits(static_cast<std::size_t>(count),
                                            std::vector<char>(keep.size(), 0));
        for (int v = 0; v < lattice.size(); ++v)
            if (labels[v] >= 0) bits[labels[v]][v] = 1;
        for (auto& b : bits) {
            RegionMask m(std::move(b));
            if (is_blocking(lattice, m)) (colour == 1 ? blues : reds).push_back(std::move(m));
        }
    }
    for (const auto& b : blues)
        for (const auto& a : reds)
            if (is_over(lattice, b, a)) return BlockingCertificate{b, a};
    return std::nullopt;
}

} // namespace erosion
