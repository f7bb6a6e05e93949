#include "erosion/conformal_domain.hpp"

#include "erosion/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>
#include <sstream>

namespace erosion {

namespace {

constexpr cplx kI{0.0, 1.0};

template <class F>
double gauss_legendre(F&& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 16>::integrate(f, a, b);
}

double min_boundary_distance(const SmoothDomain& d, cplx y, int samples) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < samples; ++j) {
        best = std::min(best, std::abs(d.boundary_point(2.0 * kPi * j / samples) - y));
    }
    return best;
}

} // namespace

SmoothDomain::SmoothDomain(const DomainSpec& spec) : spec_(spec) {
    if (spec_.family == Family::Disc) {
        spec_.c = 0.0;
    } else if (!(std::abs(spec_.c) <= 0.4)) {
        throw ArgumentError("quadratic family requires |c| <= 0.4");
    }
    const cplx p1 = std::polar(1.0, spec_.theta1);
    const cplx p2 = std::polar(1.0, spec_.theta2);
    if (std::abs(p1 - p2) < 1e-9) throw ArgumentError("marks must be distinct");

    const cplx sum = p1 + p2;
    if (std::abs(sum) < 1e-14) {
        a_ = 0.0;
    } else {
        // Point of the geodesic p1-p2 closest to the origin.
        const double cos2 = std::clamp(std::real(p1 * std::conj(p2)), -1.0, 1.0);
        const double half = 0.5 * std::acos(cos2);
        a_ = (sum / std::abs(sum)) * ((1.0 - std::sin(half)) / std::cos(half));
    }
    const cplx m0 = (p1 - a_) / (1.0 - std::conj(a_) * p1);
    rot_ = -kI / m0;
    rot_ /= std::abs(rot_);

    x1_ = family_map(p1);
    x2_ = family_map(p2);

    double kmax = 0.0;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    const int samples = 4096;
    for (int j = 0; j < samples; ++j) {
        const cplx w = std::polar(1.0, 2.0 * kPi * j / samples);
        const cplx d1 = family_dmap(w);
        const cplx d2 = 2.0 * spec_.c;
        const double kappa = (1.0 + std::real(w * d2 / d1)) / std::abs(d1);
        kmax = std::max(kmax, kappa);
        const cplx b = family_map(w);
        xmin = std::min(xmin, b.real());
        xmax = std::max(xmax, b.real());
        ymin = std::min(ymin, b.imag());
        ymax = std::max(ymax, b.imag());
    }
    reach_ = kmax > 0 ? 1.0 / kmax : 1e300;
    bbox_ = {xmin, xmax, ymin, ymax};
}

std::string SmoothDomain::describe() const {
    std::ostringstream os;
    if (spec_.family == Family::Disc) {
        os << "disc";
    } else {
        os << "quad(c=" << spec_.c << ")";
    }
    return os.str();
}

cplx SmoothDomain::family_map(cplx w) const { return w + spec_.c * w * w; }

cplx SmoothDomain::family_dmap(cplx w) const { return 1.0 + 2.0 * spec_.c * w; }

cplx SmoothDomain::family_inverse(cplx z) const {
    const double c = spec_.c;
    if (c == 0.0) return z;
    cplx w = z / (1.0 + std::abs(c));
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
        const cplx r = family_map(w) - z;
        const cplx step = r / family_dmap(w);
        double lambda = 1.0;
        cplx next = w - step;
        while (std::abs(family_map(next) - z) > std::abs(r) && lambda > 1e-6) {
            lambda *= 0.5;
            next = w - lambda * step;
        }
        w = next;
        if (std::abs(lambda * step) < 1e-12) {
            converged = true;
            break;
        }
    }
    const cplx small_root = 2.0 * z / (1.0 + std::sqrt(1.0 + 4.0 * c * z));
    if (!converged || std::abs(w - small_root) > 1e-8 * (1.0 + std::abs(w))) {
        w = small_root;
    }
    return w;
}

cplx SmoothDomain::automorphism(cplx w) const {
    return rot_ * (w - a_) / (1.0 - std::conj(a_) * w);
}

cplx SmoothDomain::automorphism_inverse(cplx zeta) const {
    const cplx v = zeta / rot_;
    return (v + a_) / (1.0 + std::conj(a_) * v);
}

cplx SmoothDomain::automorphism_inverse_derivative(cplx zeta) const {
    const cplx v = zeta / rot_;
    const cplx den = 1.0 + std::conj(a_) * v;
    return (1.0 - std::norm(a_)) / (den * den) / rot_;
}

cplx SmoothDomain::phi(cplx zeta) const { return family_map(automorphism_inverse(zeta)); }

cplx SmoothDomain::dphi(cplx zeta) const {
    return family_dmap(automorphism_inverse(zeta)) * automorphism_inverse_derivative(zeta);
}

cplx SmoothDomain::psi(cplx z) const { return automorphism(family_inverse(z)); }

bool SmoothDomain::contains(cplx z) const {
    const double c = spec_.c;
    if (c == 0.0) return std::norm(z) < 1.0;
    const cplx small_root = 2.0 * z / (1.0 + std::sqrt(1.0 + 4.0 * c * z));
    return std::norm(small_root) < 1.0;
}

double SmoothDomain::area() const { return kPi * (1.0 + 2.0 * spec_.c * spec_.c); }

double potential_of_zeta(cplx zeta) {
    const double num = std::abs(zeta - kI);
    const double den = std::abs(zeta + kI);
    if (num < 1e-14 || den < 1e-14) throw DomainError("potential singularity");
    return kPotentialScale * std::log(num / den);
}

double hyperbolic_potential(const SmoothDomain& domain, cplx z) {
    return potential_of_zeta(domain.psi(z));
}

double area_of_level_region(const SmoothDomain& domain, double beta) {
    if (!std::isfinite(beta)) {
        if (beta > 0) return 0.0;
        return domain.area();
    }
    if (2.0 * beta / kPotentialScale > 700.0) return 0.0;
    // In disc coordinates the region is |zeta - i| >= K |zeta + i| with
    // K = exp(beta / scale); along each ray it is a union of r-intervals.
    const double k2 = std::exp(2.0 * beta / kPotentialScale);
    auto radial = [&](double theta) {
        const double s = std::sin(theta);
        const double qa = 1.0 - k2;
        const double qb = -2.0 * (1.0 + k2) * s;
        const double qc = 1.0 - k2;
        auto q = [&](double r) { return (qa * r + qb) * r + qc; };
        double cuts[4];
        int nc = 0;
        cuts[nc++] = 0.0;
        if (std::abs(qa) < 1e-300) {
            if (qb != 0.0) {
                const double r = -qc / qb;
                if (r > 0 && r < 1) cuts[nc++] = r;
            }
        } else {
            const double disc = qb * qb - 4 * qa * qc;
            if (disc > 0) {
                const double sq = std::sqrt(disc);
                const double t = -0.5 * (qb + (qb >= 0 ? sq : -sq));
                double r1 = t / qa;
                double r2 = t != 0.0 ? qc / t : r1;
                if (r1 > r2) std::swap(r1, r2);
                if (r1 > 0 && r1 < 1) cuts[nc++] = r1;
                if (r2 > 0 && r2 < 1 && r2 != r1) cuts[nc++] = r2;
            }
        }
        cuts[nc++] = 1.0;
        const cplx dir = std::polar(1.0, theta);
        double total = 0.0;
        for (int j = 0; j + 1 < nc; ++j) {
            const double lo = cuts[j], hi = cuts[j + 1];
            if (hi <= lo) continue;
            if (q(0.5 * (lo + hi)) < 0) continue;
            total += gauss_legendre(
                [&](double r) { return std::norm(domain.dphi(r * dir)) * r; }, lo, hi);
        }
        return total;
    };
    auto midpoint = [&](int count) {
        const double h = 2.0 * kPi / count;
        double s = 0.0;
        for (int j = 0; j < count; ++j) s += radial((j + 0.5) * h);
        return s * h;
    };
    int count = 256;
    double prev = midpoint(count);
    for (int iter = 0; iter < 14; ++iter) {
        count *= 2;
        const double cur = midpoint(count);
        const double change = std::abs(cur - prev);
        prev = cur;
        if (change <= 1e-6 * std::abs(cur) || change < 1e-14) break;
    }
    return std::clamp(prev, 0.0, domain.area());
}

double beta_of_alpha(const SmoothDomain& domain, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0,1)");
    using Key = std::tuple<int, double, double, double, double>;
    static std::map<Key, double> cache;
    static std::mutex mu;
    const auto& sp = domain.spec();
    const Key key{static_cast<int>(sp.family), sp.c, sp.theta1, sp.theta2, alpha};
    {
        std::lock_guard<std::mutex> lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }
    const double total = domain.area();
    auto ratio = [&](double b) { return area_of_level_region(domain, b) / total; };
    double lo = -32.0, hi = 32.0;
    double flo = ratio(lo) - alpha, fhi = ratio(hi) - alpha;
    while (flo < 0) flo = ratio(lo *= 2.0) - alpha;
    while (fhi > 0) fhi = ratio(hi *= 2.0) - alpha;
    double best = lo, best_err = std::abs(flo);
    if (std::abs(fhi) < best_err) best = hi, best_err = std::abs(fhi);
    auto f = [&](double b) {
        const double r = ratio(b) - alpha;
        if (std::abs(r) < best_err) best = b, best_err = std::abs(r);
        return r;
    };
    auto done = [&](double a, double b) { return best_err <= 1e-7 || b - a < 1e-13; };
    std::uintmax_t iters = 200;
    const double c = 0.5 * (lo + hi), fc = f(c);
    if (fc > 0) lo = c, flo = fc;
    else hi = c, fhi = fc;
    if (best_err > 1e-7) boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, done, iters);
    const double mid = best;
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, mid);
    return mid;
}

double transversal_parameter(double a) { return -std::tanh(a / (2.0 * kPotentialScale)); }

std::optional<int> ShellDecomposition::shell_of(double h) const {
    if (levels.size() < 2) return std::nullopt;
    if (!(h < levels.front()) || h < levels.back()) return std::nullopt;
    // First level that is <= h; the shell index is one before it.
    auto it = std::lower_bound(levels.begin(), levels.end(), h,
                               [](double lv, double x) { return lv > x; });
    const auto j = static_cast<int>(it - levels.begin());
    return first_index + j - 1;
}

ShellDecomposition build_shells(const SmoothDomain& domain, int n, double beta, int window,
                                double spacing_factor) {
    if (n < 16) throw ArgumentError("build_shells requires n >= 16");
    if (!(spacing_factor > 0)) throw ArgumentError("spacing factor must be positive");
    ShellDecomposition out;
    out.n = n;
    out.spacing = spacing_factor / n;
    const double step = out.spacing;
    auto transversal = [&](double s) { return domain.phi(cplx(0.0, s)); };
    auto level_at = [](double s) { return kPotentialScale * std::log((1.0 - s) / (1.0 + s)); };

    const double s0 = transversal_parameter(beta);
    // March in direction dir (+1 toward x2, -1 toward x1).
    auto march = [&](int dir, std::vector<double>& found) {
        const int limit = window < 0 ? std::numeric_limits<int>::max() : window;
        double s = s0;
        const cplx end = transversal(static_cast<double>(dir));
        while (static_cast<int>(found.size()) < limit) {
            const cplx base = transversal(s);
            if (std::abs(end - base) < step) return true;
            double lo = s, hi = static_cast<double>(dir);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (std::abs(transversal(mid) - base) < step) {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if (std::abs(hi - lo) < 1e-15) break;
            }
            s = 0.5 * (lo + hi);
            found.push_back(s);
        }
        return false;
    };
    std::vector<double> fwd, bwd;
    const bool end_fwd = march(+1, fwd);
    const bool end_bwd = march(-1, bwd);
    out.truncated = window >= 0 && (end_fwd || end_bwd);
    const bool cap_bwd = window < 0 || end_bwd;
    const bool cap_fwd = window < 0 || end_fwd;

    std::vector<double> s_list;
    for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) s_list.push_back(*it);
    s_list.push_back(s0);
    for (double s : fwd) s_list.push_back(s);

    if (cap_bwd) out.levels.push_back(std::numeric_limits<double>::infinity());
    for (double s : s_list) out.levels.push_back(s == s0 ? beta : level_at(s));
    if (cap_fwd) out.levels.push_back(-std::numeric_limits<double>::infinity());
    out.crossings = s_list;
    out.first_index = -static_cast<int>(bwd.size()) - (cap_bwd ? 1 : 0);
    return out;
}

cplx inward_point(const SmoothDomain& domain, cplx x, double delta) {
    if (!(delta > 0)) throw ArgumentError("inward_point: delta must be positive");
    cplx zeta = domain.psi(x);
    if (std::abs(std::abs(zeta) - 1.0) > 1e-8) {
        throw ArgumentError("inward_point: point is not on the boundary");
    }
    zeta /= std::abs(zeta);
    if (delta > domain.reach()) throw DomainError("inward_point: delta exceeds reach");
    cplx normal = zeta * domain.dphi(zeta);
    normal /= std::abs(normal);
    const cplx y = x - delta * normal;
    if (!domain.contains(y) || min_boundary_distance(domain, y, 4096) <= 0.5 * delta) {
        throw DomainError("inward_point: delta exceeds reach");
    }
    return y;
}

std::vector<cplx> geodesic_points(const SmoothDomain& domain, double beta, int count) {
    if (count < 2) throw ArgumentError("geodesic_points requires count >= 2");
    std::vector<cplx> pts;
    pts.reserve(static_cast<std::size_t>(count));
    const double k2 = std::exp(2.0 * beta / kPotentialScale);
    if (std::abs(1.0 - k2) < 1e-15) {
        for (int j = 0; j < count; ++j) {
            const double t = -1.0 + (2.0 * j + 1.0) / count;
            pts.push_back(domain.phi(cplx(t, 0.0)));
        }
        return pts;
    }
    // Apollonius circle for foci -i, i: centre i*c0, radius sqrt(c0^2 - 1).
    const double c0 = (1.0 + k2) / (1.0 - k2);
    const cplx centre(0.0, c0);
    const double radius = std::sqrt(c0 * c0 - 1.0);
    const cplx end(std::sqrt(1.0 - 1.0 / (c0 * c0)), 1.0 / c0);
    const double mid_angle = std::arg(-centre);
    const double span = std::abs(std::arg((end - centre) / (-centre)));
    std::vector<cplx> zetas;
    for (int j = 0; j < count; ++j) {
        const double t = -1.0 + (2.0 * j + 1.0) / count;
        zetas.push_back(centre + std::polar(radius, mid_angle + t * span));
    }
    if (zetas.front().real() > zetas.back().real()) std::reverse(zetas.begin(), zetas.end());
    for (const cplx& z : zetas) pts.push_back(domain.phi(z));
    return pts;
}

} // namespace erosion
