#include "erosion/idla.hpp"

#include "erosion/conformal_domain.hpp"
#include "erosion/erosion.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <string>

namespace erosion {

Rng particle_stream(const Rng& base, std::uint64_t index) {
    static constexpr std::uint64_t kTag = Rng::tag("particle");
    return base.split(index, kTag);
}

PausedBatch idla_batch_paused(const Graph& g, Aggregate agg, const std::vector<int>& starts,
                              const RegionMask& t, const Rng& base, std::uint64_t first_index) {
    PausedBatch out;
    out.aggregate = std::move(agg);
    for (std::size_t j = 0; j < starts.size(); ++j) {
        Rng rng = particle_stream(base, first_index + j);
        const auto r = idla_add_paused(g, out.aggregate, starts[j], t, rng);
        if (r.paused != kAbsorbed) out.paused.push_back(r.paused);
    }
    return out;
}

Aggregate idla_batch(const Graph& g, Aggregate agg, const std::vector<int>& starts, const Rng& base,
                     std::uint64_t first_index) {
    for (std::size_t j = 0; j < starts.size(); ++j) {
        Rng rng = particle_stream(base, first_index + j);
        idla_add(g, agg, starts[j], rng);
    }
    return agg;
}

ChiSquareResult chi_square_homogeneity(const std::vector<std::uint64_t>& a,
                                       const std::vector<std::uint64_t>& b) {
    if (a.empty() || b.empty()) throw ArgumentError("chi-square needs two nonempty samples");
    std::map<std::uint64_t, std::pair<long, long>> counts;
    for (auto k : a) ++counts[k].first;
    for (auto k : b) ++counts[k].second;
    ChiSquareResult res;
    res.raw_cells = static_cast<int>(counts.size());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double n = na + nb;
    const double share = std::min(na, nb) / n;
    auto enough = [&](long total) { return total * share >= 5.0; };

    std::vector<std::pair<long, long>> cells;
    std::pair<long, long> other{0, 0};
    for (const auto& [key, c] : counts) {
        if (enough(c.first + c.second)) cells.push_back(c);
        else {
            other.first += c.first;
            other.second += c.second;
        }
    }
    std::sort(cells.begin(), cells.end(), [](const auto& x, const auto& y) {
        return x.first + x.second > y.first + y.second;
    });
    while (other.first + other.second > 0 && !enough(other.first + other.second) && !cells.empty()) {
        other.first += cells.back().first;
        other.second += cells.back().second;
        cells.pop_back();
    }
    if (other.first + other.second > 0) {
        if (!enough(other.first + other.second))
            throw ArgumentError("chi-square refused: expected counts below 5 even after pooling");
        cells.push_back(other);
    }
    res.cells = static_cast<int>(cells.size());
    if (res.cells < 2) return res;
    for (const auto& [ca, cb] : cells) {
        const double tot = static_cast<double>(ca + cb);
        const double ea = tot * na / n, eb = tot * nb / n;
        res.statistic += (ca - ea) * (ca - ea) / ea + (cb - eb) * (cb - eb) / eb;
    }
    res.dof = res.cells - 1;
    const boost::math::chi_squared dist(res.dof);
    res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
    return res;
}

namespace {

std::uint64_t mask_key(const RegionMask& m) {
    std::uint64_t k = 0;
    for (int v = 0; v < m.size(); ++v)
        if (m.test(v)) k |= std::uint64_t{1} << v;
    return k;
}

std::uint64_t sequence_tag(std::string_view purpose, const std::vector<int>& seq) {
    std::uint64_t h = Rng::tag(purpose);
    for (int x : seq) h = Rng::mix(h ^ static_cast<std::uint64_t>(x + 1));
    return h;
}

void check_small(const Graph& g, const RegionMask& initial, const std::vector<int>& starts) {
    if (g.num_vertices() > 60) throw ArgumentError("abelian test needs at most 60 vertices");
    if (starts.size() > 6) throw ArgumentError("abelian test needs at most 6 particles");
    if (initial.size() != g.num_vertices()) throw ArgumentError("initial aggregate size mismatch");
    if (initial.count() + static_cast<int>(starts.size()) > g.num_vertices())
        throw ArgumentError("saturated: too many particles for the free vertices");
}

} // namespace

ChiSquareResult abelian_test(const Graph& g, const RegionMask& initial, const std::vector<int>& starts,
                             const std::vector<int>& permutation, int trials, std::uint64_t seed) {
    check_small(g, initial, starts);
    if (permutation.size() != starts.size()) throw ArgumentError("permutation length mismatch");
    std::vector<int> seen = permutation;
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (seen[i] != static_cast<int>(i)) throw ArgumentError("not a permutation");
    std::vector<int> other(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) other[i] = starts[static_cast<std::size_t>(permutation[i])];
    const auto ta = sequence_tag("abelian", starts), tb = sequence_tag("abelian", other);
    std::vector<std::uint64_t> a, b;
    a.reserve(static_cast<std::size_t>(trials));
    b.reserve(static_cast<std::size_t>(trials));
    for (int r = 0; r < trials; ++r) {
        a.push_back(mask_key(idla_batch(g, Aggregate(initial), starts, Rng(seed, r, ta)).occupied));
        b.push_back(mask_key(idla_batch(g, Aggregate(initial), other, Rng(seed, r, tb)).occupied));
    }
    return chi_square_homogeneity(a, b);
}

ChiSquareResult pause_release_test(const Graph& g, const RegionMask& initial,
                                   const std::vector<int>& starts, const RegionMask& t, int trials,
                                   std::uint64_t seed) {
    check_small(g, initial, starts);
    const auto ta = sequence_tag("unpaused", starts), tb = sequence_tag("paused", starts);
    std::vector<std::uint64_t> a, b;
    for (int r = 0; r < trials; ++r) {
        a.push_back(mask_key(idla_batch(g, Aggregate(initial), starts, Rng(seed, r, ta)).occupied));
        const Rng base(seed, r, tb);
        auto pb = idla_batch_paused(g, Aggregate(initial), starts, t, base);
        b.push_back(mask_key(
            idla_batch(g, std::move(pb.aggregate), pb.paused, base, starts.size()).occupied));
    }
    return chi_square_homogeneity(a, b);
}

namespace {

// Vertices with h below the level m shells past the interface.
RegionMask pausing_set(const LatticeDomain& lattice, const ShellDecomposition& shells, int m) {
    RegionMask t(lattice.size());
    if (-m < shells.first_index) return t.complement();
    const double level = shells.level(-m);
    for (int v = 0; v < lattice.size(); ++v)
        if (lattice.h(v) < level) t.set(v);
    return t;
}

std::vector<StageRecord> staged_run(const LatticeDomain& lattice, const ShellDecomposition& shells,
                                    const RegionMask& initial, const std::vector<int>& idx,
                                    int particles, double eps, double fraction, const Rng& base) {
    const Graph& g = lattice.graph();
    const int n = lattice.n();
    const auto& b2 = lattice.blob(2);
    std::vector<char> filled_shell;
    const int depth_cap = -shells.first_index + 1;
    filled_shell.assign(static_cast<std::size_t>(depth_cap + 1), 0);
    for (int v = 0; v < lattice.size(); ++v) {
        const int i = idx[v];
        if (i == std::numeric_limits<int>::min() || i >= 0 || !initial.test(v)) continue;
        if (-i <= depth_cap) filled_shell[static_cast<std::size_t>(-i)] = 1;
    }
    auto crowded = [&](int lo, int hi) {
        int total = 0, hit = 0;
        for (int s = lo + 1; s <= hi && s <= depth_cap; ++s) {
            ++total;
            hit += filled_shell[static_cast<std::size_t>(s)];
        }
        return total > 0 && hit > fraction * total;
    };

    std::vector<StageRecord> log;
    Aggregate agg(initial);
    Rng pick = base.split(0, Rng::tag("stage-starts"));
    std::vector<int> walkers;
    for (int p = 0; p < particles; ++p)
        walkers.push_back(b2[static_cast<std::size_t>(pick.uniform_index(b2.size()))]);
    int m = static_cast<int>(std::ceil(std::sqrt(eps) * n));
    const double small = std::cbrt(static_cast<double>(n));
    std::uint64_t stream = 0;
    for (int j = 1; !walkers.empty(); ++j) {
        const bool last = walkers.size() <= small && j > 1;
        RegionMask t = last ? RegionMask(lattice.size()).complement() : pausing_set(lattice, shells, m);
        if (!last) {
            for (int w : walkers) {
                while (!t.test(w)) t = pausing_set(lattice, shells, ++m);
            }
        }
        auto pb = idla_batch_paused(g, std::move(agg), walkers, t, base.split(j, Rng::tag("stage")),
                                    stream);
        stream += walkers.size();
        StageRecord rec;
        rec.j = j;
        rec.m = last ? -1 : m;
        rec.released = static_cast<int>(walkers.size());
        rec.k = static_cast<int>(pb.paused.size());
        log.push_back(rec);
        agg = std::move(pb.aggregate);
        walkers = std::move(pb.paused);
        if (walkers.empty()) break;
        const int step = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(walkers.size())))));
        int ell = 1;
        while (crowded(m + (ell - 1) * step, m + ell * step)) ++ell;
        m += ell * step;
    }
    return log;
}

} // namespace

AnnulusReport annulus_experiment(const LatticeDomain& lattice, double alpha, double eps,
                                 double eps_prime, const std::vector<std::uint64_t>& seeds,
                                 const AnnulusOptions& opts) {
    if (!(alpha > 0 && alpha < 1)) throw ArgumentError("alpha must lie in (0, 1)");
    if (!(eps > 0) || eps_prime < 0) throw ArgumentError("eps must be positive and eps' non-negative");
    if (eps_prime > eps / opts.D) throw ArgumentError("eps' must not exceed eps / D");
    const SmoothDomain& dom = lattice.domain();
    const int n = lattice.n();
    AnnulusReport rep;
    rep.n = n;
    rep.alpha = alpha;
    rep.eps = eps;
    rep.eps_prime = eps_prime;
    rep.C = opts.C;
    rep.D = opts.D;
    rep.particles = static_cast<int>(std::floor(eps * n * n));
    rep.initial_shells = static_cast<int>(std::floor(eps_prime * n));

    const double beta = beta_of_alpha(dom, alpha);
    const auto shells = build_shells(dom, n, beta, -1);
    const auto idx = shell_index(lattice, shells);
    RegionMask initial = level_region_mask(lattice, beta).complement();
    for (int v = 0; v < lattice.size(); ++v) {
        const int i = idx[v];
        if (i != std::numeric_limits<int>::min() && i < 0 && -i <= rep.initial_shells) initial.set(v);
    }
    const double inner = alpha - opts.C * std::sqrt(eps);
    const double limit = inner > 0 ? beta_of_alpha(dom, inner) : std::numeric_limits<double>::infinity();
    const auto& b2 = lattice.blob(2);
    const double area = dom.area();

    for (auto seed : seeds) {
        AnnulusSeed s;
        s.seed = seed;
        const Rng base(seed, 0, Rng::tag("annulus"));
        Rng pick = base.split(0, Rng::tag("starts"));
        Aggregate agg(initial);
        for (int p = 0; p < rep.particles; ++p) {
            if (agg.full()) break;
            const int start = b2[static_cast<std::size_t>(pick.uniform_index(b2.size()))];
            Rng rng = particle_stream(base, static_cast<std::uint64_t>(p));
            idla_add(lattice.graph(), agg, start, rng);
        }
        s.new_sites = static_cast<int>(agg.history.size());
        if (s.new_sites > 0) {
            s.deepest_h = -std::numeric_limits<double>::infinity();
            for (int v : agg.history) {
                s.deepest_h = std::max(s.deepest_h, lattice.h(v));
                if (!(lattice.h(v) < limit)) s.contained = false;
            }
            s.deepest_fraction = area_of_level_region(dom, s.deepest_h) / area;
            s.depth = alpha - s.deepest_fraction;
            s.statistic = s.depth / std::sqrt(eps);
        } else {
            s.deepest_h = beta;
            s.deepest_fraction = alpha;
        }
        if (opts.record_stages)
            s.stages = staged_run(lattice, shells, initial, idx, rep.particles, eps, opts.stage_fraction,
                                  base.split(1, Rng::tag("staged")));
        rep.max_statistic = std::max(rep.max_statistic, s.statistic);
        rep.contained = rep.contained && s.contained;
        rep.seeds.push_back(std::move(s));
    }
    return rep;
}

CouplingReport erosion_idla_coupling(const LatticeDomain& lattice, const Configuration& start,
                                     int steps, std::uint64_t seed) {
    const Graph& g = lattice.graph();
    Configuration cfg = start;
    Aggregate idla(cfg.red_mask());
    Rng blue(seed, 0, Rng::tag("coupling-blue"));
    Rng red(seed, 0, Rng::tag("coupling-red"));
    const auto& b2 = lattice.blob(2);
    CouplingReport rep;
    for (int t = 0; t < steps; ++t) {
        blue_half_step(lattice, cfg, blue);
        int v = b2[static_cast<std::size_t>(red.uniform_index(b2.size()))];
        std::int64_t k = 0;
        while (cfg.is_red(v)) {
            v = random_neighbor(g, v, red);
            if (++k > kWalkGuard) throw NumericalError("random walk exceeded step guard");
        }
        cfg.set(v, kRed);
        if (!idla.full()) {
            while (idla.contains(v)) {
                v = random_neighbor(g, v, red);
                if (++k > kWalkGuard) throw NumericalError("random walk exceeded step guard");
            }
            idla.add(v);
        }
        ++rep.steps;
        if (rep.dominated && !cfg.red_mask().subset_of(idla.occupied)) {
            rep.dominated = false;
            rep.first_violation = t;
        }
    }
    rep.red_size = cfg.size() - cfg.blue_count;
    rep.idla_size = idla.size();
    return rep;
}

void write_aggregate_csv(const LatticeDomain& lattice, const Aggregate& agg, std::ostream& out) {
    std::vector<int> order(static_cast<std::size_t>(lattice.size()), -1);
    for (std::size_t i = 0; i < agg.history.size(); ++i) order[agg.history[i]] = static_cast<int>(i);
    out << "ix,iy,occupied,order\n";
    for (int v = 0; v < lattice.size(); ++v) {
        const auto c = lattice.coord(v);
        out << c.ix << ',' << c.iy << ',' << (agg.contains(v) ? 1 : 0) << ',' << order[v] << '\n';
    }
}

void write_stage_csv(const AnnulusReport& report, std::ostream& out) {
    out << "seed,j,m,released,k\n";
    for (const auto& s : report.seeds)
        for (const auto& r : s.stages)
            out << s.seed << ',' << r.j << ',' << r.m << ',' << r.released << ',' << r.k << '\n';
}

} // namespace erosion
