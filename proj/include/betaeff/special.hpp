#pragma once

#include <cmath>

namespace betaeff {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile; requires p in (0,1).
double normal_quantile(double p);

inline double log_beta_fn(double p, double q) {
    return std::lgamma(p) + std::lgamma(q) - std::lgamma(p + q);
}

}  // namespace betaeff
