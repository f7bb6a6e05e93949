#include "erosion/linalg.hpp"

#include "erosion/errors.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace erosion {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void remove_mean(std::vector<double>& v) {
    if (v.empty()) return;
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

// Preconditioned CG for an SPD (or, with project set, PSD with constant
// kernel) operator.
template <class Apply>
SolveInfo pcg(Apply&& apply, const std::vector<double>& diag, const std::vector<double>& b,
              std::vector<double>& x, double tol, bool project) {
    const std::size_t n = b.size();
    SolveInfo info;
    const double bnorm = std::sqrt(dot(b, b));
    x.assign(n, 0.0);
    if (bnorm == 0.0) return info;
    std::vector<double> r = b, z(n), p(n), q(n);
    if (project) remove_mean(r);
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    if (project) remove_mean(z);
    p = z;
    double rz = dot(r, z);
    const int max_iter = 50 * static_cast<int>(n) + 1000;
    double rel = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        apply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0)) break;
        const double a = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += a * p[i];
            r[i] -= a * q[i];
        }
        if (project) remove_mean(r);
        rel = std::sqrt(dot(r, r)) / bnorm;
        info.iterations = it;
        if (rel <= tol) break;
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        if (project) remove_mean(z);
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (project) remove_mean(x);
    // True residual, not the recurrence.
    apply(x, q);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = b[i] - q[i];
        res += d * d;
    }
    if (project) {
        std::vector<double> rr(n);
        for (std::size_t i = 0; i < n; ++i) rr[i] = b[i] - q[i];
        remove_mean(rr);
        res = dot(rr, rr);
    }
    info.relative_residual = std::sqrt(res) / bnorm;
    if (!(info.relative_residual <= std::max(tol * 10.0, 1e-13))) {
        throw NumericalError("conjugate gradient did not converge: relative residual " +
                             std::to_string(info.relative_residual));
    }
    return info;
}

} // namespace

std::vector<double> solve_dirichlet(const Graph& g, const std::vector<char>& interior,
                                    const std::vector<double>& rhs,
                                    const std::vector<double>& boundary, double tol,
                                    SolveInfo* info) {
    const int nv = g.num_vertices();
    std::vector<double> u(boundary.begin(), boundary.end());
    u.resize(static_cast<std::size_t>(nv), 0.0);
    std::vector<int> index(static_cast<std::size_t>(nv), -1);
    std::vector<int> verts;
    for (int v = 0; v < nv; ++v) {
        if (interior[v]) {
            index[v] = static_cast<int>(verts.size());
            verts.push_back(v);
        }
    }
    if (verts.empty()) {
        if (info) *info = SolveInfo{};
        return u;
    }
    {
        auto [label, ncomp] = g.components(interior);
        std::vector<char> anchored(static_cast<std::size_t>(ncomp), 0);
        for (int v : verts) {
            for (int w : g.neighbors(v)) {
                if (!interior[w]) {
                    anchored[label[v]] = 1;
                    break;
                }
            }
        }
        for (char a : anchored) {
            if (!a) throw NumericalError("Dirichlet problem has a component with no fixed vertex");
        }
    }
    const std::size_t k = verts.size();
    std::vector<double> b(k), diag(k);
    for (std::size_t i = 0; i < k; ++i) {
        const int v = verts[i];
        double s = rhs[v];
        double d = 0.0;
        for (int w : g.neighbors(v)) {
            if (w == v) continue;
            d += 1.0;
            if (!interior[w]) s += u[w];
        }
        b[i] = s;
        diag[i] = d;
    }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        y.resize(k);
        for (std::size_t i = 0; i < k; ++i) {
            const int v = verts[i];
            double s = diag[i] * x[i];
            for (int w : g.neighbors(v)) {
                if (w == v) continue;
                const int j = index[w];
                if (j >= 0) s -= x[j];
            }
            y[i] = s;
        }
    };
    std::vector<double> x;
    SolveInfo local = pcg(apply, diag, b, x, tol, false);
    for (std::size_t i = 0; i < k; ++i) u[verts[i]] = x[i];
    if (info) *info = local;
    return u;
}

std::vector<double> solve_neumann(const Graph& g, const std::vector<double>& rhs, double tol,
                                  SolveInfo* info) {
    const int nv = g.num_vertices();
    const double total = std::accumulate(rhs.begin(), rhs.end(), 0.0);
    double scale = 0.0;
    for (double r : rhs) scale += std::abs(r);
    if (std::abs(total) > 1e-10 * std::max(1.0, scale)) {
        throw ArgumentError("Neumann right-hand side does not sum to zero");
    }
    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        g.apply_laplacian(x, y);
    };
    std::vector<double> x;
    std::vector<double> ones(static_cast<std::size_t>(nv), 1.0);
    SolveInfo local = pcg(apply, ones, rhs, x, tol, true);
    if (info) *info = local;
    return x;
}

} // namespace erosion
