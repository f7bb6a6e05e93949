#include "erosion/green.hpp"

#include "erosion/errors.hpp"
#include "erosion/rng.hpp"
#include "erosion/walk.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <ostream>

namespace erosion {

namespace {

constexpr int kBoundarySamples = 1024;
constexpr int kRadialNodes = 24;
constexpr int kAngularNodes = 64;

// Full Gauss-Legendre rule on [-1, 1].
template <int N>
std::vector<std::pair<double, double>> legendre_rule() {
    using rule = boost::math::quadrature::gauss<double, N>;
    std::vector<std::pair<double, double>> out;
    const auto& x = rule::abscissa();
    const auto& w = rule::weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            out.emplace_back(0.0, w[i]);
        } else {
            out.emplace_back(x[i], w[i]);
            out.emplace_back(-x[i], w[i]);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

const std::vector<std::pair<double, double>>& radial_rule() {
    static const auto r = legendre_rule<kRadialNodes>();
    return r;
}

const std::vector<std::pair<double, double>>& angular_rule() {
    static const auto r = legendre_rule<32>();
    return r;
}

double kernel(cplx pw, cplx pz) {
    return 2.0 * std::log(std::abs(pw - pz)) + 2.0 * std::log(std::abs(1.0 - std::conj(pw) * pz));
}

// Radial integral over t in [t0, t1] of K(z + t e) t dt, where the singular
// part 2 log t of 2 log|psi(w) - psi(z)| is integrated exactly.
double ray_integral(const SmoothDomain& d, cplx z, cplx pz, cplx dpz, cplx e, double t0, double t1) {
    if (!(t1 > t0)) return 0.0;
    auto prim = [](double t) { return t > 0.0 ? t * t * std::log(t) - 0.5 * t * t : 0.0; };
    double s = prim(t1) - prim(t0);
    const double half = 0.5 * (t1 - t0), mid = 0.5 * (t1 + t0);
    double acc = 0.0;
    for (const auto& [x, w] : radial_rule()) {
        const double t = mid + half * x;
        const cplx wpt = z + t * e;
        const cplx pw = d.psi(wpt);
        const cplx diff = pw - pz;
        double smooth;
        if (t < 1e-13) smooth = 2.0 * std::log(std::abs(dpz));
        else smooth = 2.0 * std::log(std::abs(diff) / t);
        smooth += 2.0 * std::log(std::abs(1.0 - std::conj(pw) * pz));
        acc += w * smooth * t;
    }
    return s + half * acc;
}

} // namespace

std::vector<double> green_source(const LatticeDomain& lattice) {
    std::vector<double> f(static_cast<std::size_t>(lattice.size()), 0.0);
    const double inv = 1.0 / lattice.blob_size();
    for (int v : lattice.blob(1)) f[v] += inv;
    for (int v : lattice.blob(2)) f[v] -= inv;
    return f;
}

std::vector<double> normalized_laplacian(const Graph& g, const std::vector<double>& f) {
    std::vector<double> out(f.size());
    for (int v = 0; v < g.num_vertices(); ++v) {
        double s = 0.0;
        for (int w : g.neighbors(v)) s += f[w];
        out[v] = f[v] - s / g.degree(v);
    }
    return out;
}

GreenField solve_green(const LatticeDomain& lattice, double tol) {
    const Graph& g = lattice.graph();
    const auto f = green_source(lattice);
    std::vector<double> b(f.size());
    double total = 0.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        b[v] = g.degree(v) * f[v];
        total += b[v];
    }
    if (std::abs(total) > 1e-12 || lattice.blob(1).size() != lattice.blob(2).size())
        throw DomainError("blob touches boundary");

    GreenField field;
    auto u = solve_neumann(g, b, tol, &field.info);

    double dsum = 0.0, wsum = 0.0;
    for (int v = 0; v < g.num_vertices(); ++v) {
        dsum += g.degree(v);
        wsum += g.degree(v) * u[v];
    }
    for (double& x : u) x -= wsum / dsum;

    double c = 0.0;
    for (int j = 0; j < kBoundarySamples; ++j) {
        const cplx p = lattice.domain().boundary_point(2.0 * kPi * j / kBoundarySamples);
        c += u[lattice.nearest_vertex(p)];
    }
    c /= kBoundarySamples;
    for (double& x : u) x -= c;
    field.values = std::move(u);
    field.centering = c;

    const auto lap = normalized_laplacian(g, field.values);
    for (std::size_t v = 0; v < f.size(); ++v)
        field.max_residual = std::max(field.max_residual, std::abs(lap[v] - f[v]));
    return field;
}

std::int64_t occupation_horizon(int n) {
    return static_cast<std::int64_t>(std::ceil(10.0 * n * n * std::log(static_cast<double>(n))));
}

McEstimate occupation_green_mc(const LatticeDomain& lattice, int x, std::int64_t trials,
                               std::int64_t horizon, std::uint64_t seed) {
    if (x < 0 || x >= lattice.size()) throw ArgumentError("probe vertex out of range");
    if (trials < 2) throw ArgumentError("occupation estimate needs at least two trials");
    if (horizon < occupation_horizon(lattice.n()))
        throw ArgumentError("horizon below 10 n^2 ln n");
    const Graph& g = lattice.graph();
    std::vector<signed char> label(static_cast<std::size_t>(lattice.size()), 0);
    for (int v : lattice.blob(1)) label[v] = 1;
    for (int v : lattice.blob(2)) label[v] = -1;
    const double inv = 1.0 / lattice.blob_size();
    const auto tag = Rng::tag("occupation");
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) {
        Rng rng(seed, static_cast<std::uint64_t>(t), tag);
        int v = x;
        std::int64_t occ = 0;
        for (std::int64_t k = 0; k < horizon; ++k) {
            occ += label[v];
            v = random_neighbor(g, v, rng);
        }
        const double val = occ * inv;
        sum += val;
        sum2 += val * val;
    }
    McEstimate est;
    est.samples = trials;
    est.estimate = sum / trials;
    const double var = std::max(0.0, (sum2 - trials * est.estimate * est.estimate) / (trials - 1));
    est.stderr_ = std::sqrt(var / trials);
    return est;
}

ContinuumGreen::ContinuumGreen(const SmoothDomain& domain, cplx y1, cplx y2, double radius)
    : domain_(domain), y1_(y1), y2_(y2), radius_(radius), area_(kPi * radius * radius) {
    if (!(radius > 0)) throw ArgumentError("source radius must be positive");
    const double dth = 2.0 * kPi / kAngularNodes;
    for (int i = 0; i < 2; ++i) {
        const cplx y = i == 0 ? y1_ : y2_;
        for (int a = 0; a < kAngularNodes; ++a) {
            const cplx e = std::polar(1.0, (a + 0.5) * dth);
            for (const auto& [x, w] : radial_rule()) {
                const double r = 0.5 * radius * (x + 1.0);
                nodes_[i].push_back(domain_.psi(y + r * e));
                weights_[i].push_back(0.5 * radius * w * r * dth);
            }
        }
    }
}

ContinuumGreen ContinuumGreen::for_lattice(const LatticeDomain& lattice) {
    return ContinuumGreen(lattice.domain(), lattice.inward_point_of(1), lattice.inward_point_of(2),
                          lattice.delta() / 4.0);
}

double ContinuumGreen::source_density(cplx w) const {
    double v = 0.0;
    if (std::abs(w - y2_) < radius_) v += 16.0 / area_;
    if (std::abs(w - y1_) < radius_) v -= 16.0 / area_;
    return v;
}

double ContinuumGreen::far_integral(int i, cplx pz) const {
    double s = 0.0;
    const auto& nd = nodes_[i - 1];
    const auto& wt = weights_[i - 1];
    for (std::size_t k = 0; k < nd.size(); ++k) s += wt[k] * kernel(nd[k], pz);
    return s;
}

double ContinuumGreen::near_integral(int i, cplx z, cplx pz) const {
    const cplx y = center(i);
    const cplx dvec = z - y;
    const double dist = std::abs(dvec);
    const double rho = radius_;
    // Derivative of psi at z by a centred difference, only used at t = 0.
    const double hstep = 1e-6;
    const cplx dpz = (domain_.psi(z + hstep) - domain_.psi(z - hstep)) / (2.0 * hstep);
    auto chord = [&](double theta, double& t0, double& t1) {
        const cplx e = std::polar(1.0, theta);
        const double b = std::real(dvec * std::conj(e));
        const double disc = b * b - (dist * dist - rho * rho);
        if (disc <= 0.0) {
            t0 = t1 = 0.0;
            return e;
        }
        const double sq = std::sqrt(disc);
        t0 = std::max(0.0, -b - sq);
        t1 = -b + sq;
        return e;
    };
    auto integrand = [&](double theta) {
        double t0, t1;
        const cplx e = chord(theta, t0, t1);
        return ray_integral(domain_, z, pz, dpz, e, t0, t1);
    };
    if (dist < rho) {
        // Kinks of the chord length sit where the ray is orthogonal to z - y.
        const double base = dist > 0 ? std::arg(dvec) + kPi / 2 : 0.0;
        double total = 0.0;
        for (int q = 0; q < 2; ++q) {
            const double a = base + q * kPi, b = a + kPi;
            total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, a, b,
                                                                                   12, 1e-11);
        }
        return total;
    }
    // Outside the disk: the rays meeting it span theta_c +- theta_max.
    const double thc = std::arg(-dvec);
    const double thmax = std::asin(std::min(1.0, rho / dist));
    double total = 0.0;
    for (const auto& [x, w] : angular_rule()) {
        for (int half = 0; half < 2; ++half) {
            const double u = 0.25 * kPi * (x + 1.0) - (half == 0 ? 0.5 * kPi : 0.0);
            const double wgt = 0.25 * kPi * w;
            const double theta = thc + thmax * std::sin(u);
            total += wgt * thmax * std::cos(u) * integrand(theta);
        }
    }
    return total;
}

double ContinuumGreen::blob_integral(int i, cplx z, cplx pz) const {
    if (std::abs(z - center(i)) >= 2.0 * radius_) return far_integral(i, pz);
    return near_integral(i, z, pz);
}

double ContinuumGreen::operator()(cplx z) const {
    const cplx pz = domain_.psi(z);
    const double i2 = blob_integral(2, z, pz);
    const double i1 = blob_integral(1, z, pz);
    return (16.0 / area_) * (i2 - i1) / kPi;
}

std::vector<double> sample_continuum(const LatticeDomain& lattice, const ContinuumGreen& continuum) {
    std::vector<double> out(static_cast<std::size_t>(lattice.size()));
    for (int v = 0; v < lattice.size(); ++v) out[v] = continuum(lattice.position(v));
    return out;
}

std::vector<GreenComparisonRow> compare_green_continuum(
    const std::vector<const LatticeDomain*>& lattices, const ContinuumGreen& continuum) {
    std::vector<GreenComparisonRow> rows;
    for (const LatticeDomain* lat : lattices) {
        const auto field = solve_green(*lat);
        const auto gs = sample_continuum(*lat, continuum);
        GreenComparisonRow row;
        row.m = lat->m();
        row.n = lat->n();
        double num = 0.0, den = 0.0;
        for (int v = 0; v < lat->size(); ++v) {
            row.supnorm = std::max(row.supnorm, std::abs(field[v] - gs[v]));
            num += field[v] * gs[v];
            den += field[v] * field[v];
        }
        row.fitted_scale = den > 0 ? num / den : 0.0;
        for (int v = 0; v < lat->size(); ++v)
            row.supnorm_fitted =
                std::max(row.supnorm_fitted, std::abs(row.fitted_scale * field[v] - gs[v]));
        const int z0 = lat->nearest_vertex(0.0);
        row.value_at_zero = field[z0];
        rows.push_back(row);
    }
    return rows;
}

double weight(const Configuration& config, const GreenField& field) {
    if (config.size() != field.size()) throw ArgumentError("configuration and field sizes differ");
    double s = 0.0;
    for (int v = 0; v < config.size(); ++v)
        if (config.is_blue(v)) s += field[v];
    return s;
}

double weight_max(const GreenField& field, int k) {
    if (k < 0 || k > field.size()) throw ArgumentError("blue count out of range");
    std::vector<double> vals = field.values;
    std::nth_element(vals.begin(), vals.begin() + k, vals.end(), std::greater<>());
    return std::accumulate(vals.begin(), vals.begin() + k, 0.0);
}

std::vector<double> blue_exit_distribution(const LatticeDomain& lattice, const Configuration& config) {
    const Graph& g = lattice.graph();
    const auto r1 = monochromatic_region(lattice, config, 1);
    const std::size_t nv = static_cast<std::size_t>(lattice.size());
    std::vector<double> mu(nv, 0.0);
    for (int v : lattice.blob(1)) mu[v] = 1.0 / lattice.blob_size();
    std::vector<double> p(nv, 0.0);
    for (std::size_t v = 0; v < nv; ++v)
        if (!r1.test(static_cast<int>(v))) p[v] = mu[v];
    if (!r1.empty()) {
        const std::vector<double> zero(nv, 0.0);
        const auto gv = solve_dirichlet(g, r1.bits(), mu, zero, 1e-13);
        for (int x = 0; x < lattice.size(); ++x) {
            if (!r1.test(x)) continue;
            for (int w : g.neighbors(x))
                if (!r1.test(w)) p[w] += gv[x];
        }
    }
    return p;
}

namespace {

double harmonic_average(const LatticeDomain& lattice, const RegionMask& region,
                        const std::vector<double>& boundary, int blob) {
    std::vector<double> u;
    if (region.empty()) {
        u = boundary;
    } else {
        const std::vector<double> zero(boundary.size(), 0.0);
        u = solve_dirichlet(lattice.graph(), region.bits(), zero, boundary, 1e-13);
    }
    double s = 0.0;
    for (int v : lattice.blob(blob)) s += u[v];
    return s / lattice.blob_size();
}

} // namespace

DriftResult drift_exact(const LatticeDomain& lattice, const Configuration& config,
                        const GreenField& field, std::int64_t fallback_replicas,
                        std::uint64_t fallback_seed) {
    if (config.size() != lattice.size() || field.size() != lattice.size())
        throw ArgumentError("configuration, field and lattice sizes differ");
    DriftResult res;
    const auto p = blue_exit_distribution(lattice, config);
    std::vector<int> support;
    for (int v = 0; v < lattice.size(); ++v)
        if (p[v] > 0.0) support.push_back(v);
    res.exit_support = static_cast<int>(support.size());
    if (res.exit_support > kExitSupportLimit) {
        const auto mc = drift_mc(lattice, config, field, fallback_replicas, fallback_seed);
        res.value = mc.estimate;
        res.stderr_ = mc.stderr_;
        res.fallback = true;
        return res;
    }
    const auto r1 = monochromatic_region(lattice, config, 1);
    res.blue_term = harmonic_average(lattice, r1, field.values, 1);

    const auto r2 = monochromatic_region(lattice, config, 2);
    double shared = 0.0;
    bool have_shared = false;
    Configuration work = config;
    double red = 0.0;
    for (int v : support) {
        double term;
        if (!r2.test(v)) {
            if (!have_shared) {
                shared = harmonic_average(lattice, r2, field.values, 2);
                have_shared = true;
                ++res.red_solves;
            }
            term = shared;
        } else {
            work.set(v, kBlue);
            const auto r2v = monochromatic_region(lattice, work, 2);
            term = harmonic_average(lattice, r2v, field.values, 2);
            work.set(v, kRed);
            ++res.red_solves;
        }
        red += p[v] * term;
    }
    res.red_term = red;
    res.value = res.blue_term - res.red_term;
    return res;
}

McEstimate drift_mc(const LatticeDomain& lattice, const Configuration& config,
                    const GreenField& field, std::int64_t replicas, std::uint64_t seed) {
    if (replicas < 1) throw ArgumentError("replicas must be positive");
    const Graph& g = lattice.graph();
    const auto& b1 = lattice.blob(1);
    const auto& b2 = lattice.blob(2);
    const auto tag = Rng::tag("drift");
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t r = 0; r < replicas; ++r) {
        Rng rng(seed, static_cast<std::uint64_t>(r), tag);
        const int s1 = b1[rng.uniform_index(b1.size())];
        const int x = walk_until(g, s1, [&](int v) { return !config.is_blue(v); }, rng);
        const int s2 = b2[rng.uniform_index(b2.size())];
        const int y = walk_until(g, s2, [&](int v) { return v == x || config.is_blue(v); }, rng);
        const double val = field[x] - field[y];
        sum += val;
        sum2 += val * val;
    }
    McEstimate est;
    est.samples = replicas;
    est.estimate = sum / replicas;
    if (replicas > 1) {
        const double var =
            std::max(0.0, (sum2 - replicas * est.estimate * est.estimate) / (replicas - 1));
        est.stderr_ = std::sqrt(var / replicas);
    }
    return est;
}

void write_green_csv(const LatticeDomain& lattice, const std::vector<double>& values,
                     std::ostream& out) {
    out << "ix,iy,G\n";
    char buf[64];
    for (int v = 0; v < lattice.size(); ++v) {
        std::snprintf(buf, sizeof buf, "%.17g", values[v]);
        out << lattice.coord(v).ix << ',' << lattice.coord(v).iy << ',' << buf << '\n';
    }
}

} // namespace erosion
