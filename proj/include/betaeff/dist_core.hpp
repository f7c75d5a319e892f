#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "betaeff/rng.hpp"

namespace betaeff {

// tau(p,q) = 2p^2 - 2pq - q^2 + 2p - q. Zero exactly when the second moment
// of Beta(p,q) equals the uniform one (1/3); sign gives the direction of the
// second-moment shift.
double tau(double p, double q);

struct BetaParams {
    double p = 1.0;
    double q = 1.0;

    BetaParams() = default;
    BetaParams(double p_, double q_);  // requires p > 0, q > 0

    bool is_uniform() const { return p == 1.0 && q == 1.0; }
    // Parameter region used throughout: p >= q > 0 and tau(p,q) >= 0.
    bool in_region() const { return p >= q && q > 0.0 && tau(p, q) >= 0.0; }

    bool operator==(const BetaParams&) const = default;
};

// Contamination alternative (1-eps) * Uniform + eps * Beta(p,q).
struct Alternative {
    double eps = 0.0;
    BetaParams beta{};

    Alternative() = default;
    Alternative(double eps_, BetaParams beta_);  // requires eps in [0,1]

    static Alternative null() { return Alternative(); }
    bool is_null() const { return eps == 0.0 || beta.is_uniform(); }

    bool operator==(const Alternative&) const = default;
};

// Raw beta moments about 0.
double beta_mean(const BetaParams& b);
double beta_moment2(const BetaParams& b);
double beta_moment4(const BetaParams& b);

// E X^k under the mixture; k in {1, 2, 4}.
double mixture_moment(const Alternative& a, int k);

// Mixture density at x in (0,1). Unbounded at endpoints when p or q < 1.
double density(const Alternative& a, double x);

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_error(achieved) {}
    double achieved_error;
};

// Hellinger distance H(a,b) = sqrt(2 - 2 * integral sqrt(f_a f_b)), in
// [0, sqrt(2)]. Integrates in log space with a double-exponential rule so
// endpoint singularities (p,q < 1) are exact to near machine precision.
double hellinger(const Alternative& a, const Alternative& b);

// Distance between n-fold product measures: only the single-observation
// affinity enters, 2 - 2*(1 - H^2/2)^n. Monotone in n, tends to sqrt(2).
double hellinger_product(double h_single, long long n);

// n iid draws. Consumes the stream; identical stream => identical sample.
std::vector<double> sample(const Alternative& a, std::size_t n, RngStream& rs);

// Per-draw sampler used by the hot Monte Carlo loops.
struct AlternativeSampler {
    double eps;
    double p;
    double q;

    explicit AlternativeSampler(const Alternative& a)
        : eps(a.eps), p(a.beta.p), q(a.beta.q) {}

    double draw(RngStream& rs) const {
        if (eps <= 0.0) return rs.uniform01();
        if (eps >= 1.0) return rs.beta(p, q);
        return rs.uniform01() < eps ? rs.beta(p, q) : rs.uniform01();
    }
};

}  // namespace betaeff
