#include "erosion/lattice.hpp"

#include "erosion/errors.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <tuple>

namespace erosion {

int LatticeDomain::vertex_at(int ix, int iy) const {
    if (ix < ixmin_ || ix > ixmax_ || iy < iymin_ || iy > iymax_) return -1;
    const int w = ixmax_ - ixmin_ + 1;
    return grid_[static_cast<std::size_t>((iy - iymin_) * w + (ix - ixmin_))];
}

int LatticeDomain::blob_label(int v) const {
    if (blob1_mask_.test(v)) return 1;
    if (blob2_mask_.test(v)) return 2;
    return 0;
}

int LatticeDomain::nearest_vertex(cplx z) const {
    const double fx = z.real() * n_, fy = z.imag() * n_;
    const int cx = static_cast<int>(std::lround(fx));
    const int cy = static_cast<int>(std::lround(fy));
    int best = -1;
    double best_d2 = 0.0;
    const int rmax = std::max(ixmax_ - ixmin_, iymax_ - iymin_) + 2 +
                     static_cast<int>(std::abs(cx) + std::abs(cy));
    for (int r = 0; r <= rmax; ++r) {
        for (int dx = -r; dx <= r; ++dx) {
            for (int dy = -r; dy <= r; ++dy) {
                if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                const int v = vertex_at(cx + dx, cy + dy);
                if (v < 0) continue;
                const double ex = (cx + dx) - fx, ey = (cy + dy) - fy;
                const double d2 = ex * ex + ey * ey;
                if (best < 0 || d2 < best_d2 ||
                    (d2 == best_d2 && std::tie(coords_[v].ix, coords_[v].iy) <
                                          std::tie(coords_[best].ix, coords_[best].iy))) {
                    best = v;
                    best_d2 = d2;
                }
            }
        }
        // Points in later rings are at least r - 0.5 away.
        if (best >= 0 && (r - 0.5) * (r - 0.5) > best_d2) break;
    }
    return best;
}

namespace {

bool segment_inside(const SmoothDomain& d, cplx a, cplx b) {
    for (int k = 1; k <= 16; ++k) {
        if (!d.contains(a + (b - a) * (k / 17.0))) return false;
    }
    return true;
}

void trim_blob(std::vector<int>& blob, const std::vector<LatticePoint>& coords, int centre,
               std::size_t target) {
    const LatticePoint c = coords[centre];
    std::sort(blob.begin(), blob.end(), [&](int a, int b) {
        const auto da = (coords[a].ix - c.ix) * (coords[a].ix - c.ix) +
                        (coords[a].iy - c.iy) * (coords[a].iy - c.iy);
        const auto db = (coords[b].ix - c.ix) * (coords[b].ix - c.ix) +
                        (coords[b].iy - c.iy) * (coords[b].iy - c.iy);
        if (da != db) return da > db;
        return std::tie(coords[a].ix, coords[a].iy) < std::tie(coords[b].ix, coords[b].iy);
    });
    blob.erase(blob.begin(), blob.begin() + static_cast<std::ptrdiff_t>(blob.size() - target));
    std::sort(blob.begin(), blob.end());
}

} // namespace

LatticeDomain discretize(const SmoothDomain& domain, int m, double delta, SourceMode sources) {
    if (m < 3 || m > 12) throw ArgumentError("mesh exponent m must lie in [3, 12]");
    LatticeDomain lat = discretize_n(domain, 1 << m, delta, sources);
    return lat;
}

LatticeDomain discretize_n(const SmoothDomain& domain, int n, double delta, SourceMode sources) {
    if (n < 8) throw ArgumentError("mesh size n must be at least 8");
    if (!(delta > 0)) throw ArgumentError("delta must be positive");
    LatticeDomain lat(domain);
    lat.n_ = n;
    for (int k = 3; k <= 12; ++k)
        if (n == (1 << k)) lat.m_ = k;
    lat.delta_ = delta;
    lat.sources_ = sources;

    const auto box = domain.bounding_box();
    lat.ixmin_ = static_cast<int>(std::floor(box[0] * n)) - 1;
    lat.ixmax_ = static_cast<int>(std::ceil(box[1] * n)) + 1;
    lat.iymin_ = static_cast<int>(std::floor(box[2] * n)) - 1;
    lat.iymax_ = static_cast<int>(std::ceil(box[3] * n)) + 1;
    const int w = lat.ixmax_ - lat.ixmin_ + 1;
    const int hgt = lat.iymax_ - lat.iymin_ + 1;
    lat.grid_.assign(static_cast<std::size_t>(w * hgt), -1);
    for (int iy = lat.iymin_; iy <= lat.iymax_; ++iy) {
        for (int ix = lat.ixmin_; ix <= lat.ixmax_; ++ix) {
            const cplx z(static_cast<double>(ix) / n, static_cast<double>(iy) / n);
            if (!domain.contains(z)) continue;
            lat.grid_[static_cast<std::size_t>((iy - lat.iymin_) * w + (ix - lat.ixmin_))] =
                static_cast<int>(lat.coords_.size());
            lat.coords_.push_back({ix, iy});
            lat.positions_.push_back(z);
        }
    }
    const int nv = static_cast<int>(lat.coords_.size());
    if (nv == 0) throw DomainError("mesh too coarse");

    std::vector<std::array<int, 2>> edges;
    std::vector<char> right(static_cast<std::size_t>(nv), 0), up(static_cast<std::size_t>(nv), 0);
    for (int v = 0; v < nv; ++v) {
        const auto [ix, iy] = lat.coords_[v];
        const int r = lat.vertex_at(ix + 1, iy);
        if (r >= 0 && segment_inside(domain, lat.positions_[v], lat.positions_[r])) {
            edges.push_back({v, r});
            right[v] = 1;
        }
        const int u = lat.vertex_at(ix, iy + 1);
        if (u >= 0 && segment_inside(domain, lat.positions_[v], lat.positions_[u])) {
            edges.push_back({v, u});
            up[v] = 1;
        }
    }
    lat.graph_ = Graph::from_edges(nv, edges);
    if (!lat.graph_.connected()) throw DomainError("mesh too coarse");

    std::vector<std::array<int, 2>> star_edges = edges;
    for (int v = 0; v < nv; ++v) {
        if (!right[v] || !up[v]) continue;
        const auto [ix, iy] = lat.coords_[v];
        const int r = lat.vertex_at(ix + 1, iy);
        const int u = lat.vertex_at(ix, iy + 1);
        const int d = lat.vertex_at(ix + 1, iy + 1);
        if (d < 0 || !up[r] || !right[u]) continue;
        star_edges.push_back({v, d});
        star_edges.push_back({r, u});
    }
    lat.star_ = Graph::from_edges(nv, star_edges);

    lat.h_.resize(static_cast<std::size_t>(nv));
    for (int v = 0; v < nv; ++v) lat.h_[v] = hyperbolic_potential(domain, lat.positions_[v]);

    const cplx marks[2] = {domain.x1(), domain.x2()};
    std::vector<int>* blobs[2] = {&lat.blob1_, &lat.blob2_};
    int centres[2] = {-1, -1};
    cplx ys[2];
    for (int i = 0; i < 2; ++i) {
        if (sources == SourceMode::Point) {
            int best = -1;
            double best_d = 0.0;
            for (int v = 0; v < nv; ++v) {
                if (lat.graph_.degree(v) != 4) continue;
                const double d = std::abs(lat.positions_[v] - marks[i]);
                if (best < 0 || d < best_d ||
                    (d == best_d && std::tie(lat.coords_[v].ix, lat.coords_[v].iy) <
                                        std::tie(lat.coords_[best].ix, lat.coords_[best].iy))) {
                    best = v;
                    best_d = d;
                }
            }
            if (best < 0) throw DomainError("delta too small for mesh");
            centres[i] = best;
            ys[i] = lat.positions_[best];
            blobs[i]->push_back(best);
            continue;
        }
        ys[i] = inward_point(domain, marks[i], delta);
        const double fx = ys[i].real() * n, fy = ys[i].imag() * n;
        int best = -1;
        double best_d2 = 0.0;
        for (int cx : {static_cast<int>(std::floor(fx)), static_cast<int>(std::floor(fx)) + 1}) {
            for (int cy : {static_cast<int>(std::floor(fy)), static_cast<int>(std::floor(fy)) + 1}) {
                const double d2 = (cx - fx) * (cx - fx) + (cy - fy) * (cy - fy);
                const int v = lat.vertex_at(cx, cy);
                if (v < 0) continue;
                if (best < 0 || d2 < best_d2) {
                    best = v;
                    best_d2 = d2;
                }
            }
        }
        if (best < 0) throw DomainError("delta too small for mesh");
        centres[i] = best;
        const auto c = lat.coords_[best];
        const double rad = 0.25 * delta * n;
        const int reach = static_cast<int>(std::ceil(rad)) + 1;
        for (int dy = -reach; dy <= reach; ++dy) {
            for (int dx = -reach; dx <= reach; ++dx) {
                if (dx * dx + dy * dy >= rad * rad) continue;
                const int v = lat.vertex_at(c.ix + dx, c.iy + dy);
                if (v >= 0) blobs[i]->push_back(v);
            }
        }
        std::sort(blobs[i]->begin(), blobs[i]->end());
    }
    for (int v : lat.blob1_) {
        if (std::binary_search(lat.blob2_.begin(), lat.blob2_.end(), v)) {
            throw DomainError("blobs overlap");
        }
    }
    if (lat.blob1_.size() > lat.blob2_.size()) {
        trim_blob(lat.blob1_, lat.coords_, centres[0], lat.blob2_.size());
    } else if (lat.blob2_.size() > lat.blob1_.size()) {
        trim_blob(lat.blob2_, lat.coords_, centres[1], lat.blob1_.size());
    }
    for (const auto* b : blobs) {
        for (int v : *b) {
            if (lat.graph_.degree(v) != 4) throw DomainError("delta too small for mesh");
        }
    }
    lat.z1_ = centres[0];
    lat.z2_ = centres[1];
    lat.y1_ = ys[0];
    lat.y2_ = ys[1];
    lat.blob1_mask_ = RegionMask(nv);
    lat.blob2_mask_ = RegionMask(nv);
    for (int v : lat.blob1_) lat.blob1_mask_.set(v);
    for (int v : lat.blob2_) lat.blob2_mask_.set(v);
    return lat;
}

RegionMask level_region_mask(const LatticeDomain& lattice, double beta) {
    RegionMask mask(lattice.size());
    for (int v = 0; v < lattice.size(); ++v)
        if (lattice.h(v) >= beta) mask.set(v);
    return mask;
}

std::vector<int> shell_index(const LatticeDomain& lattice, const ShellDecomposition& shells) {
    std::vector<int> idx(static_cast<std::size_t>(lattice.size()), INT_MIN);
    for (int v = 0; v < lattice.size(); ++v) {
        if (auto s = shells.shell_of(lattice.h(v))) idx[v] = *s;
    }
    return idx;
}

std::vector<RegionMask> shell_masks(const LatticeDomain& lattice, const ShellDecomposition& shells) {
    if (shells.n != lattice.n()) throw ArgumentError("shells were built for a different n");
    std::vector<RegionMask> masks(static_cast<std::size_t>(std::max(0, shells.shell_count())),
                                  RegionMask(lattice.size()));
    const auto idx = shell_index(lattice, shells);
    for (int v = 0; v < lattice.size(); ++v) {
        if (idx[v] == INT_MIN) continue;
        masks[static_cast<std::size_t>(idx[v] - shells.first_shell())].set(v);
    }
    return masks;
}

RegionMask band_mask(const LatticeDomain& lattice, const ShellDecomposition& shells) {
    RegionMask mask(lattice.size());
    for (int v = 0; v < lattice.size(); ++v)
        if (shells.shell_of(lattice.h(v))) mask.set(v);
    return mask;
}

void write_lattice_csv(const LatticeDomain& lattice, std::ostream& out) {
    out << "ix,iy,x,y,degree,blob\n";
    char buf[160];
    for (int v = 0; v < lattice.size(); ++v) {
        const auto c = lattice.coord(v);
        const cplx z = lattice.position(v);
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%d,%d\n", c.ix, c.iy, z.real(),
                      z.imag(), lattice.degree(v), lattice.blob_label(v));
        out << buf;
    }
}

} // namespace erosion
