#include "erosion/graph.hpp"

#include "erosion/errors.hpp"

#include <algorithm>

namespace erosion {

Graph Graph::from_edges(int num_vertices, const std::vector<std::array<int, 2>>& edges) {
    Graph g;
    g.num_vertices_ = num_vertices;
    g.edges_ = edges;
    std::vector<int> deg(static_cast<std::size_t>(num_vertices), 0);
    for (const auto& e : edges) {
        if (e[0] < 0 || e[1] < 0 || e[0] >= num_vertices || e[1] >= num_vertices) {
            throw ArgumentError("edge endpoint out of range");
        }
        ++deg[e[0]];
        ++deg[e[1]];
    }
    g.offsets_.assign(static_cast<std::size_t>(num_vertices) + 1, 0);
    for (int v = 0; v < num_vertices; ++v) g.offsets_[v + 1] = g.offsets_[v] + deg[v];
    g.nbrs_.assign(static_cast<std::size_t>(g.offsets_.back()), -1);
    g.nbr_edges_.assign(g.nbrs_.size(), -1);
    std::vector<int> fill(g.offsets_.begin(), g.offsets_.end() - 1);
    for (int id = 0; id < static_cast<int>(edges.size()); ++id) {
        const int a = edges[id][0], b = edges[id][1];
        g.nbrs_[fill[a]] = b;
        g.nbr_edges_[fill[a]++] = id;
        g.nbrs_[fill[b]] = a;
        g.nbr_edges_[fill[b]++] = id;
    }
    return g;
}

void Graph::apply_laplacian(const std::vector<double>& x, std::vector<double>& y) const {
    y.resize(x.size());
    for (int v = 0; v < num_vertices_; ++v) {
        double s = degree(v) * x[v];
        for (int k = offsets_[v]; k < offsets_[v + 1]; ++k) s -= x[nbrs_[k]];
        y[v] = s;
    }
}

std::pair<std::vector<int>, int> Graph::components(const std::vector<char>& keep) const {
    std::vector<int> label(static_cast<std::size_t>(num_vertices_), -1);
    int count = 0;
    std::vector<int> stack;
    for (int s = 0; s < num_vertices_; ++s) {
        if (label[s] >= 0 || (!keep.empty() && !keep[s])) continue;
        label[s] = count;
        stack.push_back(s);
        while (!stack.empty()) {
            const int v = stack.back();
            stack.pop_back();
            for (int w : neighbors(v)) {
                if (label[w] >= 0 || (!keep.empty() && !keep[w])) continue;
                label[w] = count;
                stack.push_back(w);
            }
        }
        ++count;
    }
    return {std::move(label), count};
}

RegionMask::RegionMask(std::vector<char> bits) : bits_(std::move(bits)) {
    for (char& b : bits_) b = b ? 1 : 0;
    count_ = static_cast<int>(std::count(bits_.begin(), bits_.end(), 1));
}

void RegionMask::set(int v, bool on) {
    char& b = bits_[static_cast<std::size_t>(v)];
    if (b && !on) --count_;
    if (!b && on) ++count_;
    b = on ? 1 : 0;
}

std::vector<int> RegionMask::members() const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(count_));
    for (int v = 0; v < size(); ++v)
        if (bits_[v]) out.push_back(v);
    return out;
}

RegionMask RegionMask::operator|(const RegionMask& o) const {
    std::vector<char> b(bits_.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = bits_[i] | o.bits_[i];
    return RegionMask(std::move(b));
}

RegionMask RegionMask::operator&(const RegionMask& o) const {
    std::vector<char> b(bits_.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = bits_[i] & o.bits_[i];
    return RegionMask(std::move(b));
}

RegionMask RegionMask::operator-(const RegionMask& o) const {
    std::vector<char> b(bits_.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = bits_[i] && !o.bits_[i];
    return RegionMask(std::move(b));
}

RegionMask RegionMask::complement() const {
    std::vector<char> b(bits_.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = !bits_[i];
    return RegionMask(std::move(b));
}

bool RegionMask::subset_of(const RegionMask& o) const {
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i] && !o.bits_[i]) return false;
    return true;
}

} // namespace erosion
