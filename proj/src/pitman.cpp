#include "betaeff/pitman.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace betaeff {

MuSigma mu_sigma(TestId test, const Alternative& alt) {
    MuSigma out;
    double var;
    if (test == TestId::V) {
        const double m1 = mixture_moment(alt, 1);
        const double m2 = mixture_moment(alt, 2);
        out.mu = m1 - 0.5;
        var = m2 - m1 * m1;
    } else {
        const double m2 = mixture_moment(alt, 2);
        const double m4 = mixture_moment(alt, 4);
        out.mu = m2 - 1.0 / 3.0;
        var = m4 - m2 * m2;
    }
    if (!(var > 0.0))
        throw std::runtime_error("mu_sigma: degenerate spread");
    out.sigma = std::sqrt(var);
    return out;
}

double pitman_linear(double p, double q) {
    if (p == 1.0 && q == 1.0)
        throw std::invalid_argument(
            "pitman_linear: (1,1) is the null, no direction");
    if (!(p > 0.0 && q > 0.0) || p < q)
        throw std::domain_error(
            "pitman_linear: parameters must satisfy p >= q > 0");
    const double t = tau(p, q);
    if (t < 0.0)
        throw std::domain_error(
            "pitman_linear: tau(p,q) < 0, second-moment scaling fails");
    if (p == q)  // here necessarily p < 1, so tau > 0
        return std::numeric_limits<double>::infinity();
    const double d = p - q;
    const double s1 = p + q + 1.0;
    return 5.0 * t * t / (12.0 * d * d * s1 * s1);
}

namespace {

double require_param(const std::map<std::string, double>& params,
                     const std::string& name, const char* path) {
    auto it = params.find(name);
    if (it == params.end())
        throw std::invalid_argument(std::string("builtin_path: ") + path +
                                    " requires parameter '" + name + "'");
    return it->second;
}

void reject_extras(const std::map<std::string, double>& params,
                   std::initializer_list<const char*> known,
                   const char* path) {
    for (const auto& [k, v] : params) {
        bool ok = false;
        for (const char* kn : known) ok = ok || k == kn;
        if (!ok)
            throw std::invalid_argument(std::string("builtin_path: ") + path +
                                        " does not take parameter '" + k + "'");
    }
}

void check_s(double s) {
    if (!(s >= 0.0 && s <= 1.0))
        throw std::domain_error("path eval: s must lie in [0,1]");
}

}  // namespace

ScalingPair scaling_functions(TestId test, const Path& path) {
    if (!path.eval) throw std::invalid_argument("scaling_functions: empty path");
    if (!path.eval(0.0).is_null())
        throw std::invalid_argument("scaling_functions: path must enter the "
                                    "null at s = 0");
    ScalingPair out;
    auto eval = path.eval;
    out.mu = [eval, test](double s) { return mu_sigma(test, eval(s)).mu; };
    out.sigma = [eval, test](double s) { return mu_sigma(test, eval(s)).sigma; };
    out.sigma0 = out.sigma(0.0);

    const double mu0 = out.mu(0.0);  // 0 up to rounding
    const double h = 1e-3;
    auto diff = [&](double step) { return (out.mu(step) - mu0) / step; };
    const double d1 = diff(h);
    const double d2 = diff(h / 2.0);
    const double d3 = diff(h / 4.0);
    const double r1 = 2.0 * d2 - d1;
    const double r2 = 2.0 * d3 - d2;
    out.mu0_slope = (4.0 * r2 - r1) / 3.0;
    out.slope_error = std::abs(out.mu0_slope - r2);

    const double tol = std::max(1e-8, 10.0 * out.slope_error);
    if (out.mu0_slope < -tol)
        throw std::runtime_error(
            std::string("path_slopes: negative mean slope for test ") +
            to_string(test) + " on path " + path.name);
    return out;
}

SlopeEstimate path_slopes(const Path& path, TestId test) {
    const ScalingPair sp = scaling_functions(test, path);
    return SlopeEstimate{sp.mu0_slope, sp.sigma0, sp.slope_error};
}

PitmanResult pitman_path(const Path& path) {
    SlopeEstimate st = path_slopes(path, TestId::T);
    SlopeEstimate sv = path_slopes(path, TestId::V);
    auto snap = [](SlopeEstimate& s) {
        if (std::abs(s.mu_slope0) <= std::max(1e-9, 10.0 * s.error))
            s.mu_slope0 = 0.0;
    };
    snap(st);
    snap(sv);

    PitmanResult out;
    const double rt = st.mu_slope0 / st.sigma0;
    const double rv = sv.mu_slope0 / sv.sigma0;
    out.c_t = rt * rt;
    out.c_v = rv * rv;
    if (out.c_t == 0.0 && out.c_v == 0.0)
        throw std::runtime_error("pitman_path: both slopes vanish on path " +
                                 path.name);
    if (out.c_v == 0.0)
        out.efficiency = std::numeric_limits<double>::infinity();
    else
        out.efficiency = out.c_t / out.c_v;
    return out;
}

Path builtin_path(const std::string& name,
                  const std::map<std::string, double>& params) {
    Path path;
    path.name = name;
    path.params = params;

    if (name == "linear") {
        reject_extras(params, {"p", "q"}, "linear");
        const double p = require_param(params, "p", "linear");
        const double q = require_param(params, "q", "linear");
        path.closed_form_efficiency = pitman_linear(p, q);  // validates (p,q)
        path.eval = [p, q](double s) {
            check_s(s);
            return Alternative(s, BetaParams(p, q));
        };
        return path;
    }
    if (name == "gamma1") {
        reject_extras(params, {"p", "q"}, "gamma1");
        const double p = require_param(params, "p", "gamma1");
        const double q = require_param(params, "q", "gamma1");
        if (!(q > 0.0) || p < q)
            throw std::domain_error(
                "builtin_path: gamma1 requires p >= q > 0");
        if (!(tau(p, q) > 0.0))
            throw std::domain_error(
                "builtin_path: gamma1 requires tau(p,q) > 0");
        if (!(q < 3.0 + std::sqrt(8.0)))
            throw std::domain_error(
                "builtin_path: gamma1 requires q < 3 + sqrt(8)");
        path.eval = [p, q](double s) {
            check_s(s);
            return Alternative(
                1.0, BetaParams(1.0 + (p - 1.0) * s,
                                1.0 - (1.0 + q) * s + 2.0 * q * s * s));
        };
        const double num = 4.0 * p + 5.0 * q + 1.0;
        const double den = p + q;
        path.closed_form_efficiency = 5.0 * num * num / (108.0 * den * den);
        return path;
    }

    // fixed-shape catalog entries; first two coordinates are the beta
    // parameters, the third the mixing weight.
    struct Fixed {
        const char* name;
        Alternative (*eval)(double);
        double closed;
    };
    static const Fixed catalog[] = {
        {"gamma2",
         [](double s) {
             check_s(s);
             return Alternative(1.0, BetaParams(1.0 + 2.0 * s + s * s,
                                                1.0 + s + s * s));
         },
         5.0 / 12.0},
        {"gamma3",
         [](double s) {
             check_s(s);
             return Alternative(1.0, BetaParams(1.0 - 0.5 * s + 0.5 * s * s,
                                                1.0 - 2.0 * s / 3.0));
         },
         80.0 / 27.0},
        {"gamma4",
         [](double s) {
             check_s(s);
             return Alternative(1.0, BetaParams(1.0 + s,
                                                1.0 + 0.5 * s - 1.18 * s * s));
         },
         5.0 / 12.0},
        {"gamma5",
         [](double s) {
             check_s(s);
             return Alternative(1.0,
                                BetaParams(1.0 - 0.5 * s, 1.0 - 2.0 * s / 3.0));
         },
         80.0 / 27.0},
        {"gamma6",
         [](double s) {
             check_s(s);
             return Alternative(1.0, BetaParams(1.0 - s + 1.1 * s * s,
                                                1.0 - 2.0 * s + 2.0 * s * s));
         },
         5.0 / 3.0},
        {"gamma7",
         [](double s) {
             check_s(s);
             return Alternative(1.0, BetaParams(1.0 + 0.2 * s - 0.1 * s * s,
                                                1.0 + 0.1 * s - 0.1 * s * s));
         },
         5.0 / 12.0},
        {"gamma8",
         [](double s) {
             check_s(s);
             return Alternative(s, BetaParams(2.0 + s, 1.0 + s));
         },
         15.0 / 16.0},
        {"ell",
         [](double s) {
             check_s(s);
             return Alternative(1.0, BetaParams(1.0 + 2.0 * s, 1.0 + s));
         },
         5.0 / 12.0},
        {"m",
         [](double s) {
             check_s(s);
             return Alternative(1.0, BetaParams(1.0 - 0.25 * s, 1.0 - 0.5 * s));
         },
         5.0 / 3.0},
    };
    for (const auto& f : catalog) {
        if (name == f.name) {
            reject_extras(params, {}, f.name);
            path.eval = f.eval;
            path.closed_form_efficiency = f.closed;
            return path;
        }
    }
    throw std::invalid_argument("builtin_path: unknown path '" + name + "'");
}

std::vector<std::string> builtin_path_names() {
    return {"linear", "gamma1", "gamma2", "gamma3", "gamma4",
            "gamma5", "gamma6", "gamma7", "gamma8", "ell",
            "m"};
}

}  // namespace betaeff
