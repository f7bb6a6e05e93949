#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace erosion {

// Undirected multigraph in CSR form. Parallel edges and self-loops are
// allowed (a loop appears twice in its vertex's neighbour list, so it adds 2
// to the degree as usual).
class Graph {
public:
    Graph() = default;
    static Graph from_edges(int num_vertices, const std::vector<std::array<int, 2>>& edges);

    int num_vertices() const { return num_vertices_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    int degree(int v) const { return offsets_[v + 1] - offsets_[v]; }

    std::span<const int> neighbors(int v) const {
        return {nbrs_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
    }
    // Edge id of each neighbour slot of v.
    std::span<const int> incident_edges(int v) const {
        return {nbr_edges_.data() + offsets_[v], static_cast<std::size_t>(degree(v))};
    }
    const std::array<int, 2>& edge(int e) const { return edges_[e]; }
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }

    // y = (D - A) x.
    void apply_laplacian(const std::vector<double>& x, std::vector<double>& y) const;

    // Connected components of the subgraph induced by keep (all vertices when
    // keep is empty). Returns the label per vertex (-1 when excluded) and the
    // number of components.
    std::pair<std::vector<int>, int> components(const std::vector<char>& keep = {}) const;
    bool connected() const { return components().second <= 1; }

private:
    int num_vertices_ = 0;
    std::vector<int> offsets_{0};
    std::vector<int> nbrs_;
    std::vector<int> nbr_edges_;
    std::vector<std::array<int, 2>> edges_;
};

// Bit set over the vertices of a graph.
class RegionMask {
public:
    RegionMask() = default;
    explicit RegionMask(int size) : bits_(static_cast<std::size_t>(size), 0) {}
    explicit RegionMask(std::vector<char> bits);

    int size() const { return static_cast<int>(bits_.size()); }
    int count() const { return count_; }
    bool empty() const { return count_ == 0; }
    bool test(int v) const { return bits_[static_cast<std::size_t>(v)] != 0; }
    bool operator[](int v) const { return test(v); }
    void set(int v, bool on = true);
    const std::vector<char>& bits() const { return bits_; }
    std::vector<int> members() const;

    RegionMask operator|(const RegionMask& o) const;
    RegionMask operator&(const RegionMask& o) const;
    RegionMask operator-(const RegionMask& o) const;
    RegionMask complement() const;
    bool subset_of(const RegionMask& o) const;
    bool operator==(const RegionMask& o) const { return bits_ == o.bits_; }

private:
    std::vector<char> bits_;
    int count_ = 0;
};

} // namespace erosion
