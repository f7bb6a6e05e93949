#pragma once

#include "erosion/graph.hpp"

#include <vector>

namespace erosion {

struct SolveInfo {
    int iterations = 0;
    double relative_residual = 0.0;
};

// Solves (D - A) u = rhs on the vertices flagged interior, with u fixed to
// boundary[v] elsewhere. D is the degree in the full graph. Every component of
// the interior must touch a fixed vertex.
std::vector<double> solve_dirichlet(const Graph& g, const std::vector<char>& interior,
                                    const std::vector<double>& rhs,
                                    const std::vector<double>& boundary, double tol = 1e-12,
                                    SolveInfo* info = nullptr);

// Solves (D - A) u = rhs on a connected graph in the mean-zero subspace.
// rhs must sum to zero.
std::vector<double> solve_neumann(const Graph& g, const std::vector<double>& rhs,
                                  double tol = 1e-10, SolveInfo* info = nullptr);

} // namespace erosion
