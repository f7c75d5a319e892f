#include "betaeff/special.hpp"

#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace betaeff {

namespace {
const boost::math::normal_distribution<double> std_normal{0.0, 1.0};
}

double normal_cdf(double x) { return boost::math::cdf(std_normal, x); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must lie in (0,1)");
    return boost::math::quantile(std_normal, p);
}

}  // namespace betaeff
