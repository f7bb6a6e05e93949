#pragma once

#include "erosion/conformal_domain.hpp"
#include "erosion/graph.hpp"

#include <iosfwd>
#include <vector>

namespace erosion {

enum class SourceMode {
    Blob,   // B(z_{i,n}, delta/4) around the lattice point nearest to the inward point y_i
    Point,  // the single degree-4 vertex nearest to the mark x_i
};

struct LatticePoint {
    int ix = 0;
    int iy = 0;
};

class LatticeDomain {
public:
    const SmoothDomain& domain() const { return domain_; }
    int n() const { return n_; }
    // Mesh exponent, or -1 for a non-dyadic mesh.
    int m() const { return m_; }
    double delta() const { return delta_; }
    SourceMode sources() const { return sources_; }

    int size() const { return graph_.num_vertices(); }
    const Graph& graph() const { return graph_; }
    // Graph with the diagonals of fully present lattice squares added.
    const Graph& star_graph() const { return star_; }
    int degree(int v) const { return graph_.degree(v); }

    const LatticePoint& coord(int v) const { return coords_[v]; }
    const std::vector<LatticePoint>& coords() const { return coords_; }
    cplx position(int v) const { return positions_[v]; }
    double h(int v) const { return h_[v]; }
    const std::vector<double>& h_values() const { return h_; }

    // Vertex id of lattice point (ix, iy), or -1.
    int vertex_at(int ix, int iy) const;
    // Nearest vertex to z, ties broken by lexicographic (ix, iy).
    int nearest_vertex(cplx z) const;

    // Blob i in {1, 2}: sorted vertex ids.
    const std::vector<int>& blob(int i) const { return i == 1 ? blob1_ : blob2_; }
    const RegionMask& blob_mask(int i) const { return i == 1 ? blob1_mask_ : blob2_mask_; }
    int blob_size() const { return static_cast<int>(blob1_.size()); }
    // 0 for ordinary vertices, 1 or 2 for blob vertices.
    int blob_label(int v) const;
    int blob_center(int i) const { return i == 1 ? z1_ : z2_; }
    cplx inward_point_of(int i) const { return i == 1 ? y1_ : y2_; }

    std::array<int, 4> index_box() const { return {ixmin_, ixmax_, iymin_, iymax_}; }

private:
    friend LatticeDomain discretize_n(const SmoothDomain&, int, double, SourceMode);
    explicit LatticeDomain(const SmoothDomain& d) : domain_(d) {}

    SmoothDomain domain_;
    int n_ = 0;
    int m_ = -1;
    double delta_ = 0.0;
    SourceMode sources_ = SourceMode::Blob;
    std::vector<LatticePoint> coords_;
    std::vector<cplx> positions_;
    std::vector<double> h_;
    Graph graph_;
    Graph star_;
    std::vector<int> grid_;
    int ixmin_ = 0, ixmax_ = 0, iymin_ = 0, iymax_ = 0;
    std::vector<int> blob1_, blob2_;
    RegionMask blob1_mask_, blob2_mask_;
    int z1_ = -1, z2_ = -1;
    cplx y1_, y2_;
};

// n = 2^m with m >= 3.
LatticeDomain discretize(const SmoothDomain& domain, int m, double delta,
                         SourceMode sources = SourceMode::Blob);
// Arbitrary mesh size n >= 8.
LatticeDomain discretize_n(const SmoothDomain& domain, int n, double delta,
                           SourceMode sources = SourceMode::Blob);

RegionMask level_region_mask(const LatticeDomain& lattice, double beta);

// One mask per shell, in index order first_shell() .. last_shell().
std::vector<RegionMask> shell_masks(const LatticeDomain& lattice, const ShellDecomposition& shells);
// Vertices lying in some shell.
RegionMask band_mask(const LatticeDomain& lattice, const ShellDecomposition& shells);
// Shell index per vertex, or INT_MIN outside the band.
std::vector<int> shell_index(const LatticeDomain& lattice, const ShellDecomposition& shells);

void write_lattice_csv(const LatticeDomain& lattice, std::ostream& out);

} // namespace erosion
