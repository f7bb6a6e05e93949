#include "erosion/flows.hpp"

#include "erosion/errors.hpp"
#include "erosion/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <string>

namespace erosion {

double Flow::along(int e, int from) const {
    const auto& ed = graph->edge(e);
    if (ed[0] == ed[1]) return 0.0;
    return ed[0] == from ? value[e] : -value[e];
}

Flow& Flow::operator+=(const Flow& o) {
    if (o.value.size() != value.size()) throw ArgumentError("flows live on different graphs");
    for (std::size_t e = 0; e < value.size(); ++e) value[e] += o.value[e];
    return *this;
}

Flow& Flow::operator*=(double s) {
    for (double& x : value) x *= s;
    return *this;
}

Flow zero_flow(const Graph& g) {
    return Flow{&g, std::vector<double>(static_cast<std::size_t>(g.num_edges()), 0.0)};
}

Flow gradient(const Graph& g, const std::vector<double>& f) {
    if (static_cast<int>(f.size()) != g.num_vertices()) throw ArgumentError("function size mismatch");
    Flow fl = zero_flow(g);
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        fl.value[e] = ed[0] == ed[1] ? 0.0 : f[ed[1]] - f[ed[0]];
    }
    return fl;
}

std::vector<double> divergence(const Flow& flow) {
    const Graph& g = *flow.graph;
    std::vector<double> div(static_cast<std::size_t>(g.num_vertices()), 0.0);
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        if (ed[0] == ed[1]) continue;
        div[ed[1]] += flow.value[e];
        div[ed[0]] -= flow.value[e];
    }
    return div;
}

double energy(const Flow& flow) {
    const Graph& g = *flow.graph;
    double s = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        if (ed[0] != ed[1]) s += flow.value[e] * flow.value[e];
    }
    return s;
}

double inner_product(const Flow& a, const Flow& b) {
    if (a.value.size() != b.value.size()) throw ArgumentError("flows live on different graphs");
    const Graph& g = *a.graph;
    double s = 0.0;
    for (int e = 0; e < g.num_edges(); ++e) {
        const auto& ed = g.edge(e);
        if (ed[0] != ed[1]) s += a.value[e] * b.value[e];
    }
    return s;
}

double check_summation_by_parts(const Graph& g, const std::vector<double>& f) {
    const double e = energy(gradient(g, f));
    std::vector<double> lf;
    g.apply_laplacian(f, lf);
    double s = 0.0;
    for (std::size_t v = 0; v < f.size(); ++v) s += f[v] * lf[v];
    return std::abs(e - s);
}

namespace {

int edge_between(const Graph& g, int u, int v) {
    const auto nb = g.neighbors(u);
    const auto ids = g.incident_edges(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
        if (nb[k] == v) return ids[k];
    }
    return -1;
}

void add_along(Flow& fl, int e, int from, double amount) {
    const auto& ed = fl.graph->edge(e);
    if (ed[0] == ed[1]) return;
    fl.value[e] += ed[0] == from ? amount : -amount;
}

std::vector<std::array<int, 2>> full_squares(const LatticeDomain& lattice) {
    std::vector<std::array<int, 2>> out;
    for (int v = 0; v < lattice.size(); ++v) {
        const auto c = lattice.coord(v);
        const int b = lattice.vertex_at(c.ix + 1, c.iy);
        const int cc = lattice.vertex_at(c.ix + 1, c.iy + 1);
        const int d = lattice.vertex_at(c.ix, c.iy + 1);
        if (b < 0 || cc < 0 || d < 0) continue;
        const Graph& g = lattice.graph();
        if (edge_between(g, v, b) < 0 || edge_between(g, b, cc) < 0 || edge_between(g, cc, d) < 0 ||
            edge_between(g, d, v) < 0)
            continue;
        out.push_back({c.ix, c.iy});
    }
    return out;
}

} // namespace

Flow square_circulation(const LatticeDomain& lattice, int ix, int iy) {
    const Graph& g = lattice.graph();
    const int cyc[4] = {lattice.vertex_at(ix, iy), lattice.vertex_at(ix + 1, iy),
                        lattice.vertex_at(ix + 1, iy + 1), lattice.vertex_at(ix, iy + 1)};
    Flow fl = zero_flow(g);
    for (int k = 0; k < 4; ++k) {
        const int a = cyc[k], b = cyc[(k + 1) % 4];
        const int e = a < 0 || b < 0 ? -1 : edge_between(g, a, b);
        if (e < 0) throw ArgumentError("lattice square is not fully present");
        add_along(fl, e, a, 1.0);
    }
    return fl;
}

Flow random_circulation(const LatticeDomain& lattice, int count, Rng& rng) {
    const auto squares = full_squares(lattice);
    if (squares.empty()) throw ArgumentError("lattice has no full squares");
    Flow fl = zero_flow(lattice.graph());
    for (int k = 0; k < count; ++k) {
        const auto& s = squares[static_cast<std::size_t>(rng.uniform_index(squares.size()))];
        Flow c = square_circulation(lattice, s[0], s[1]);
        c *= 2.0 * rng.uniform01() - 1.0;
        fl += c;
    }
    return fl;
}

std::vector<double> green_divergence(const LatticeDomain& lattice) {
    auto f = green_source(lattice);
    for (int v = 0; v < lattice.size(); ++v) f[v] *= lattice.degree(v);
    return f;
}

std::vector<ThomsonVerdict> thomson_check(const LatticeDomain& lattice, const GreenField& field,
                                          const std::vector<Flow>& trials, double tol) {
    const Graph& g = lattice.graph();
    const auto target = green_divergence(lattice);
    const double e0 = energy(gradient(g, field.values));
    std::vector<ThomsonVerdict> out;
    out.reserve(trials.size());
    for (const auto& t : trials) {
        ThomsonVerdict v;
        if (t.value.size() != static_cast<std::size_t>(g.num_edges())) {
            v.diagnostic = "trial flow has the wrong number of edges";
            out.push_back(v);
            continue;
        }
        const auto div = divergence(t);
        int worst = -1;
        for (int x = 0; x < g.num_vertices(); ++x) {
            const double err = std::abs(div[x] - target[x]);
            if (err > v.divergence_error) {
                v.divergence_error = err;
                worst = x;
            }
        }
        v.energy = energy(t);
        v.excess = v.energy - e0;
        if (v.divergence_error > tol) {
            const auto c = lattice.coord(worst);
            v.diagnostic = "divergence mismatch " + std::to_string(v.divergence_error) + " at (" +
                           std::to_string(c.ix) + "," + std::to_string(c.iy) + ")";
        } else {
            v.accepted = true;
            v.holds = v.excess >= -tol * std::max(1.0, e0);
        }
        out.push_back(v);
    }
    return out;
}

StoppedGreen stopped_green(const LatticeDomain& lattice, const RegionStructure& regions, int blob,
                           GreenVariant variant, double tol) {
    if (blob != 1 && blob != 2) throw ArgumentError("blob must be 1 or 2");
    const Graph& g = lattice.graph();
    const RegionMask& r = blob == 1 ? regions.r1 : regions.r2;
    const RegionMask& other = lattice.blob_mask(blob == 1 ? 2 : 1);
    if (!(r & other).empty())
        throw ArgumentError("assumption violated: region of blob " + std::to_string(blob) +
                            " meets the other source, so f differs from f_" + std::to_string(blob) +
                            " on it");
    RegionMask interior = r;
    if (variant == GreenVariant::Star) interior = r - (blob == 1 ? regions.inner1 : regions.inner2);

    StoppedGreen sg;
    sg.variant = variant;
    sg.blob = blob;
    sg.absorbing = interior.complement();
    const double scale = 1.0 / lattice.blob_size();
    std::vector<double> rhs(static_cast<std::size_t>(lattice.size()), 0.0);
    const RegionMask& src = lattice.blob_mask(blob);
    for (int v = 0; v < lattice.size(); ++v) {
        if (src.test(v)) rhs[v] = lattice.degree(v) * scale;
    }
    std::vector<double> zero(rhs.size(), 0.0);
    sg.values = solve_dirichlet(g, interior.bits(), rhs, zero, tol);
    const auto lap = normalized_laplacian(g, sg.values);
    for (int v = 0; v < lattice.size(); ++v) {
        if (!interior.test(v)) continue;
        const double want = src.test(v) ? scale : 0.0;
        sg.max_residual = std::max(sg.max_residual, std::abs(lap[v] - want));
    }
    return sg;
}

GluedGraph glue(const Graph& g, const std::vector<RegionMask>& sets) {
    const int nv = g.num_vertices();
    GluedGraph gl;
    gl.base = &g;
    std::vector<int> owner(static_cast<std::size_t>(nv), -1);
    for (std::size_t s = 0; s < sets.size(); ++s) {
        if (sets[s].size() != nv) throw ArgumentError("glued set size mismatch");
        for (int v : sets[s].members()) {
            if (owner[v] >= 0) throw ArgumentError("glued sets must be disjoint");
            owner[v] = static_cast<int>(s);
        }
    }
    gl.cls.assign(static_cast<std::size_t>(nv), -1);
    int next = 0;
    for (int v = 0; v < nv; ++v) {
        if (owner[v] < 0) gl.cls[v] = next++;
    }
    gl.super_vertices.assign(sets.size(), -1);
    for (std::size_t s = 0; s < sets.size(); ++s) {
        if (!sets[s].empty()) gl.super_vertices[s] = next++;
    }
    for (int v = 0; v < nv; ++v) {
        if (owner[v] >= 0) gl.cls[v] = gl.super_vertices[static_cast<std::size_t>(owner[v])];
    }
    std::vector<std::array<int, 2>> edges;
    edges.reserve(static_cast<std::size_t>(g.num_edges()));
    for (const auto& e : g.edges()) edges.push_back({gl.cls[e[0]], gl.cls[e[1]]});
    gl.quotient = Graph::from_edges(next, edges);
    return gl;
}

std::vector<double> push_forward(const GluedGraph& glued, const std::vector<double>& base_values) {
    std::vector<double> out(static_cast<std::size_t>(glued.quotient.num_vertices()), 0.0);
    for (std::size_t v = 0; v < base_values.size(); ++v) out[glued.cls[v]] += base_values[v];
    return out;
}

MinEnergyFlow min_energy_flow(const GluedGraph& glued, std::vector<double> div, int implied,
                              double tol) {
    const Graph& q = glued.quotient;
    if (static_cast<int>(div.size()) != q.num_vertices())
        throw ArgumentError("divergence prescription size mismatch");
    if (implied >= q.num_vertices()) throw ArgumentError("implied vertex out of range");
    if (implied >= 0) {
        div[implied] = 0.0;
        div[implied] = -std::accumulate(div.begin(), div.end(), 0.0);
    }
    double total = 0.0, scale = 0.0;
    for (double d : div) {
        total += d;
        scale += std::abs(d);
    }
    if (std::abs(total) > 1e-10 * std::max(1.0, scale))
        throw ArgumentError("inconsistent divergence prescription: total " + std::to_string(total));
    if (!q.connected()) throw ArgumentError("glued graph is disconnected");
    MinEnergyFlow out;
    out.potential = solve_neumann(q, div, tol);
    out.flow = gradient(q, out.potential);
    out.energy = energy(out.flow);
    return out;
}

AssumptionCase assumption_case(const LatticeDomain& lattice, const RegionStructure& regions,
                               AssumptionExponents exps) {
    const double d1 = std::pow(lattice.delta(), exps.a1);
    const double d2 = std::pow(lattice.delta(), exps.a2);
    const cplx z1 = lattice.position(lattice.blob_center(1));
    const cplx z2 = lattice.position(lattice.blob_center(2));
    auto reach = [&](const RegionMask& r, cplx z) {
        double far = 0.0;
        for (int v : r.members()) far = std::max(far, std::abs(lattice.position(v) - z));
        return far;
    };
    auto nearest = [&](const RegionMask& r, cplx z) {
        double near = std::numeric_limits<double>::infinity();
        for (int v : r.members()) near = std::min(near, std::abs(lattice.position(v) - z));
        return near;
    };
    if (reach(regions.r1, z1) < d2) return AssumptionCase::SmallR1;
    if (nearest(regions.r2, z1) < d1) return AssumptionCase::R2NearZ1;
    if (reach(regions.r2, z2) < d2) return AssumptionCase::SmallR2;
    if (nearest(regions.r1, z2) < d1) return AssumptionCase::R1NearZ2;
    return AssumptionCase::Holds;
}

const char* to_string(AssumptionCase c) {
    switch (c) {
    case AssumptionCase::Holds: return "holds";
    case AssumptionCase::SmallR1: return "case i";
    case AssumptionCase::R2NearZ1: return "case ii";
    case AssumptionCase::SmallR2: return "case iii";
    case AssumptionCase::R1NearZ2: return "case iv";
    }
    return "?";
}

namespace {

// Lexicographically smallest outer-boundary neighbour of y.
int chosen_outer(const LatticeDomain& lattice, const RegionMask& outer, int y) {
    int best = -1;
    for (int x : lattice.graph().neighbors(y)) {
        if (!outer.test(x)) continue;
        if (best < 0) {
            best = x;
            continue;
        }
        const auto a = lattice.coord(x), b = lattice.coord(best);
        if (a.ix < b.ix || (a.ix == b.ix && a.iy < b.iy)) best = x;
    }
    return best;
}

} // namespace

EnergyReport energy_decomposition_check(const LatticeDomain& lattice, const Configuration& config,
                                        const GreenField& field, AssumptionExponents exps,
                                        double tol) {
    const Graph& g = lattice.graph();
    const RegionStructure rs = region_structure(lattice, config);
    EnergyReport r;
    r.regime = assumption_case(lattice, rs, exps);
    r.E = energy(gradient(g, field.values));
    r.drift_exact = drift_exact(lattice, config, field).value;
    r.disjoint = (rs.r1 & lattice.blob_mask(2)).empty() && (rs.r2 & lattice.blob_mask(1)).empty();

    // Wired graph: inner boundary of the filled blue region, red inside it and
    // blue outside it, all glued to one vertex.
    RegionMask wired = rs.inner1;
    for (int v = 0; v < lattice.size(); ++v) {
        const bool inside = rs.filled1.test(v);
        if ((inside && config.is_red(v)) || (!inside && config.is_blue(v))) wired.set(v);
    }
    const GluedGraph wg = glue(g, {wired});
    r.Ewired = min_energy_flow(wg, push_forward(wg, green_divergence(lattice)), wg.super_vertices[0])
                   .energy;
    r.wired_monotone = r.Ewired <= r.E + tol * std::max(1.0, r.E);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (!r.disjoint) {
        r.E1 = r.E2 = r.E1star = r.E2star = r.bound = r.theta1_energy = nan;
        r.theta1_divergence_error = r.boundary_flux1 = nan;
        return r;
    }
    const auto g1 = stopped_green(lattice, rs, 1, GreenVariant::Plain);
    const auto g2 = stopped_green(lattice, rs, 2, GreenVariant::Plain);
    const auto s1 = stopped_green(lattice, rs, 1, GreenVariant::Star);
    const auto s2 = stopped_green(lattice, rs, 2, GreenVariant::Star);
    r.E1 = energy(gradient(g, g1.values));
    r.E2 = energy(gradient(g, g2.values));
    r.E1star = energy(gradient(g, s1.values));
    r.E2star = energy(gradient(g, s2.values));
    r.bound = 0.25 * (r.E - r.E1 - r.E2);
    const double slack = tol * std::max(1.0, r.E);
    r.star_monotone = r.E1star <= r.E1 + slack && r.E2star <= r.E2 + slack;
    r.splits = r.E + slack >= r.E1star + r.E2;
    r.drift_bound = r.drift_exact >= r.bound - 1e-8;

    // Boundary extension of theta_* = grad G*_1: for each inner-boundary vertex
    // of R_1 route the inflow through one outward edge, zero on the others.
    const Flow theta_star = gradient(g, s1.values);
    Flow theta1 = theta_star;
    const RegionMask core = rs.r1 - rs.inner1;
    for (int y : rs.inner1.members()) {
        const auto nb = g.neighbors(y);
        const auto ids = g.incident_edges(y);
        double inflow = 0.0;
        for (std::size_t k = 0; k < nb.size(); ++k) {
            if (rs.outer1.test(nb[k])) theta1.value[ids[k]] = 0.0;
            if (rs.r1.test(nb[k])) inflow += theta_star.along(ids[k], nb[k]);
            if (core.test(nb[k])) r.boundary_flux1 += theta_star.along(ids[k], y);
        }
        if (!rs.r1.test(y)) continue;
        const int x = chosen_outer(lattice, rs.outer1, y);
        if (x < 0) continue;
        const int e = edge_between(g, y, x);
        theta1.value[e] = 0.0;
        add_along(theta1, e, y, inflow);
    }
    r.theta1_energy = energy(theta1);
    const auto div1 = divergence(theta1);
    const double scale = 1.0 / lattice.blob_size();
    for (int v : rs.r1.members()) {
        const double want = lattice.blob_mask(1).test(v) ? lattice.degree(v) * scale : 0.0;
        r.theta1_divergence_error = std::max(r.theta1_divergence_error, std::abs(div1[v] - want));
    }
    return r;
}

void write_energy_csv_header(std::ostream& out) {
    out << "config_id,E,E1,E2,E1star,E2star,Ewired,bound,drift_exact\n";
}

void write_energy_csv_row(std::ostream& out, int config_id, const EnergyReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", config_id,
                  r.E, r.E1, r.E2, r.E1star, r.E2star, r.Ewired, r.bound, r.drift_exact);
    out << buf;
}

GainBound gain_bound(const LatticeDomain& lattice, const GreenField& field,
                     const std::vector<std::vector<int>>& paths) {
    const Graph& g = lattice.graph();
    GainBound gb;
    const Flow base = gradient(g, field.values);
    gb.base_energy = energy(base);
    Flow gamma = zero_flow(g);
    std::vector<int> uses(static_cast<std::size_t>(g.num_edges()), 0);
    for (const auto& p : paths) {
        if (p.size() < 2) throw ArgumentError("path needs at least two vertices");
        std::vector<int> seen = p;
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            throw ArgumentError("path is not simple");
        const bool forward = field[p.back()] >= field[p.front()];
        gb.gap_sum += std::abs(field[p.back()] - field[p.front()]);
        gb.total_length += static_cast<long>(p.size()) - 1;
        for (std::size_t k = 0; k + 1 < p.size(); ++k) {
            const int e = edge_between(g, p[k], p[k + 1]);
            if (e < 0) throw ArgumentError("path uses a non-edge");
            ++uses[e];
            add_along(gamma, e, forward ? p[k] : p[k + 1], 1.0);
        }
    }
    gb.D = uses.empty() ? 0 : *std::max_element(uses.begin(), uses.end());
    if (gb.total_length == 0 || gb.gap_sum == 0.0) {
        gb.augmented_energy = gb.base_energy;
        gb.verified = true;
        return gb;
    }
    gb.bound = gb.gap_sum * gb.gap_sum /
               (static_cast<double>(gb.D) * gb.D * static_cast<double>(gb.total_length));
    const double cross = inner_product(base, gamma);
    const double eg = energy(gamma);
    gb.beta = eg > 0 ? -cross / eg : 0.0;
    Flow theta_a = gamma;
    theta_a *= gb.beta;
    theta_a += base;
    gb.augmented_energy = energy(theta_a);
    gb.verified = gb.augmented_energy <= gb.base_energy - gb.bound + 1e-10 * std::max(1.0, gb.base_energy);
    return gb;
}

ShellPairing shell_pairing(const LatticeDomain& lattice, const ShellDecomposition& shells,
                           const RegionMask& a) {
    const Graph& g = lattice.graph();
    const auto idx = shell_index(lattice, shells);
    std::map<int, int> rep;
    for (int v : a.members()) {
        const int i = idx[v];
        if (i == std::numeric_limits<int>::min()) continue;
        rep.emplace(i, v);
    }
    ShellPairing sp;
    sp.occupied_shells = static_cast<int>(rep.size());
    std::vector<int> chosen;
    int last = std::numeric_limits<int>::min();
    for (const auto& [i, v] : rep) {
        if (last != std::numeric_limits<int>::min() && i == last + 1) continue;
        chosen.push_back(v);
        last = i;
    }
    const int half = static_cast<int>(chosen.size()) / 2;
    const int needed = std::max(1, (sp.occupied_shells + 9) / 10);
    if (half < needed)
        throw ArgumentError("pairing infeasible: " + std::to_string(sp.occupied_shells) +
                            " occupied shells");

    const int nv = g.num_vertices();
    const long max_len = 4L * lattice.n();
    std::vector<int> uses(static_cast<std::size_t>(g.num_edges()), 0);
    std::vector<double> dist(static_cast<std::size_t>(nv));
    std::vector<int> via(static_cast<std::size_t>(nv));
    for (int j = 0; j < half; ++j) {
        const int s = chosen[static_cast<std::size_t>(j)];
        const int t = chosen[static_cast<std::size_t>(j + half)];
        std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
        std::fill(via.begin(), via.end(), -1);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[s] = 0.0;
        pq.push({0.0, s});
        while (!pq.empty()) {
            const auto [d, v] = pq.top();
            pq.pop();
            if (d > dist[v]) continue;
            if (v == t) break;
            const auto nb = g.neighbors(v);
            const auto ids = g.incident_edges(v);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                const int e = ids[k];
                if (uses[e] >= 2 || nb[k] == v) continue;
                const double nd = d + 1.0 + 0.5 * uses[e];
                if (nd < dist[nb[k]]) {
                    dist[nb[k]] = nd;
                    via[nb[k]] = e;
                    pq.push({nd, nb[k]});
                }
            }
        }
        if (via[t] < 0) continue;
        std::vector<int> path{t};
        for (int v = t; v != s;) {
            const auto& ed = g.edge(via[v]);
            v = ed[0] == v ? ed[1] : ed[0];
            path.push_back(v);
        }
        if (static_cast<long>(path.size()) - 1 > max_len) continue;
        std::reverse(path.begin(), path.end());
        for (std::size_t k = 0; k + 1 < path.size(); ++k) ++uses[edge_between(g, path[k], path[k + 1])];
        sp.max_length = std::max(sp.max_length, static_cast<int>(path.size()) - 1);
        sp.pairs.emplace_back(s, t);
        sp.paths.push_back(std::move(path));
    }
    if (static_cast<int>(sp.pairs.size()) < needed)
        throw ArgumentError("pairing infeasible: only " + std::to_string(sp.pairs.size()) +
                            " pairs routed");
    sp.max_multiplicity = uses.empty() ? 0 : *std::max_element(uses.begin(), uses.end());
    return sp;
}

} // namespace erosion
