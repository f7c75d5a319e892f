#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "betaeff/dist_core.hpp"
#include "betaeff/test_engine.hpp"

namespace betaeff {

// Drift and spread of the per-observation transform behind each statistic
// (identity for the mean test, square for the second-moment test), centered
// at the null value. mu is 0 at the null; sigma is strictly positive.
struct MuSigma {
    double mu = 0.0;
    double sigma = 0.0;
};
MuSigma mu_sigma(TestId test, const Alternative& alt);

// Efficiency of the second-moment test against the mean test along the
// contamination ray toward Beta(p,q): 5 tau^2 / (12 (p-q)^2 (p+q+1)^2).
// Requires (p,q) != (1,1), p >= q > 0, tau(p,q) >= 0. Returns +infinity for
// p = q < 1 (mean slope vanishes, second-moment slope does not) and 0 when
// tau = 0 with p > q.
double pitman_linear(double p, double q);

// A one-parameter family of alternatives entering the null at s = 0.
struct Path {
    std::string name;
    std::map<std::string, double> params;
    std::function<Alternative(double)> eval;  // s in [0,1]
    std::optional<double> closed_form_efficiency;  // metadata; may be +inf
};

// Scaling functions s -> mu(s), s -> sigma(s) for one test along a path,
// with the right-hand slope of mu at 0 and sigma at the null.
struct ScalingPair {
    std::function<double(double)> mu;
    std::function<double(double)> sigma;
    double mu0_slope = 0.0;
    double sigma0 = 0.0;
    double slope_error = 0.0;  // Richardson error estimate
};
ScalingPair scaling_functions(TestId test, const Path& path);

struct SlopeEstimate {
    double mu_slope0 = 0.0;
    double sigma0 = 0.0;
    double error = 0.0;
};

// Right-hand derivative of mu at 0 by one-sided differences with two
// Richardson levels on steps h, h/2, h/4 (h = 1e-3). The moments are exact
// rational functions of s, so the extrapolation is noise-free far below the
// 1e-6 target. Errors out on a negative slope beyond numerical tolerance.
SlopeEstimate path_slopes(const Path& path, TestId test);

struct PitmanResult {
    double c_t = 0.0;
    double c_v = 0.0;
    double efficiency = 0.0;  // c_t / c_v; c/0 = +inf, 0/c = 0
};

// Slope ratio c_T / c_V with c = (mu'(0)/sigma(0))^2. Slopes within
// numerical tolerance of zero are snapped to exact zero before the ratio
// conventions apply; both-zero is an error.
PitmanResult pitman_path(const Path& path);

// Catalog: linear (params p,q), gamma1 (params p,q), gamma2..gamma8, ell, m.
// gamma1 requires p >= q > 0, tau(p,q) > 0 and q < 3+sqrt(8), which keeps
// its parabola inside the valid region for every s in [0,1]; violations are
// rejected here, not at evaluation.
Path builtin_path(const std::string& name,
                  const std::map<std::string, double>& params = {});
std::vector<std::string> builtin_path_names();

}  // namespace betaeff
