#include "betaeff/dist_core.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "betaeff/special.hpp"

namespace betaeff {

double tau(double p, double q) {
    return 2.0 * p * p - 2.0 * p * q - q * q + 2.0 * p - q;
}

BetaParams::BetaParams(double p_, double q_) : p(p_), q(q_) {
    if (!(p > 0.0) || !(q > 0.0))
        throw std::domain_error("BetaParams: shape parameters must be positive");
}

Alternative::Alternative(double eps_, BetaParams beta_) : eps(eps_), beta(beta_) {
    if (!(eps >= 0.0 && eps <= 1.0))
        throw std::domain_error("Alternative: mixing weight must lie in [0,1]");
}

double beta_mean(const BetaParams& b) { return b.p / (b.p + b.q); }

double beta_moment2(const BetaParams& b) {
    const double s = b.p + b.q;
    return b.p * (b.p + 1.0) / (s * (s + 1.0));
}

double beta_moment4(const BetaParams& b) {
    const double s = b.p + b.q;
    return b.p * (b.p + 1.0) * (b.p + 2.0) * (b.p + 3.0) /
           (s * (s + 1.0) * (s + 2.0) * (s + 3.0));
}

double mixture_moment(const Alternative& a, int k) {
    double uniform_m, beta_m;
    switch (k) {
        case 1:
            uniform_m = 0.5;
            beta_m = beta_mean(a.beta);
            break;
        case 2:
            uniform_m = 1.0 / 3.0;
            beta_m = beta_moment2(a.beta);
            break;
        case 4:
            uniform_m = 0.2;
            beta_m = beta_moment4(a.beta);
            break;
        default:
            throw std::invalid_argument("mixture_moment: k must be 1, 2 or 4");
    }
    return (1.0 - a.eps) * uniform_m + a.eps * beta_m;
}

namespace {

// log of the Beta(p,q) density given log(x) and log(1-x).
inline double log_beta_density(double p, double q, double lx, double l1x) {
    return (p - 1.0) * lx + (q - 1.0) * l1x - log_beta_fn(p, q);
}

inline double mixture_density_from_logs(const Alternative& a, double lx,
                                        double l1x) {
    if (a.eps == 0.0) return 1.0;
    const double f = std::exp(log_beta_density(a.beta.p, a.beta.q, lx, l1x));
    return (1.0 - a.eps) + a.eps * f;
}

}  // namespace

double density(const Alternative& a, double x) {
    if (!(x > 0.0 && x < 1.0))
        throw std::domain_error("density: x must lie in (0,1)");
    return mixture_density_from_logs(a, std::log(x), std::log1p(-x));
}

double hellinger(const Alternative& a, const Alternative& b) {
    // integrand arguments: x and the distance to the nearer endpoint, so the
    // logs stay exact where the densities blow up.
    auto integrand = [&]([[maybe_unused]] double x, double xc) {
        double lx, l1x;
        if (xc < 0.0) {  // near 0: x == -xc
            lx = std::log(-xc);
            l1x = std::log1p(xc);
        } else {  // near 1: 1 - x == xc
            l1x = std::log(xc);
            lx = std::log1p(-xc);
        }
        const double fa = mixture_density_from_logs(a, lx, l1x);
        const double fb = mixture_density_from_logs(b, lx, l1x);
        return std::sqrt(fa * fb);
    };

    static boost::math::quadrature::tanh_sinh<double> integrator;
    static std::mutex mtx;  // the rule caches abscissa rows lazily

    double err = 0.0, l1 = 0.0;
    double affinity;
    {
        std::lock_guard<std::mutex> lock(mtx);
        affinity = integrator.integrate(integrand, 0.0, 1.0, 1e-12, &err, &l1);
    }
    if (!(err < 1e-8) || !std::isfinite(affinity))
        throw QuadratureError(
            "hellinger: quadrature failed to converge (error estimate " +
                std::to_string(err) + ")",
            err);
    // affinity is in (0, 1]; clip rounding excursions.
    affinity = std::min(affinity, 1.0);
    const double h2 = std::max(0.0, 2.0 - 2.0 * affinity);
    return std::sqrt(h2);
}

double hellinger_product(double h_single, long long n) {
    if (n < 1) throw std::invalid_argument("hellinger_product: n must be >= 1");
    if (!(h_single >= 0.0 && h_single * h_single <= 2.0 + 1e-12))
        throw std::domain_error("hellinger_product: h must lie in [0, sqrt(2)]");
    const double affinity = 1.0 - 0.5 * h_single * h_single;
    const double affinity_n = std::pow(affinity, static_cast<double>(n));
    return std::sqrt(std::max(0.0, 2.0 - 2.0 * affinity_n));
}

std::vector<double> sample(const Alternative& a, std::size_t n, RngStream& rs) {
    std::vector<double> out(n);
    const AlternativeSampler s(a);
    for (auto& x : out) x = s.draw(rs);
    return out;
}

}  // namespace betaeff
