#include "betaeff/empirical.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "betaeff/rng.hpp"
#include "betaeff/special.hpp"

namespace betaeff {

namespace {

std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

const char* rule_kind_name(CriticalValueRule::Kind k) {
    switch (k) {
        case CriticalValueRule::Kind::normal_approx: return "normal";
        case CriticalValueRule::Kind::formula_t: return "paper";
        case CriticalValueRule::Kind::mc_calibrated: return "mc";
    }
    return "?";
}

}  // namespace

PowerCache::PowerCache(const std::string& path) : path_(path) {
    std::ifstream in(path_);
    if (!in) return;  // fresh file, created on first store
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        // key \t power \t se \t reps ; tolerate a truncated final line
        std::istringstream ss(line);
        std::string key, power, se, reps;
        if (!std::getline(ss, key, '\t') || !std::getline(ss, power, '\t') ||
            !std::getline(ss, se, '\t') || !std::getline(ss, reps, '\t')) {
            continue;
        }
        try {
            PowerEstimate est;
            est.power = std::stod(power);
            est.se = std::stod(se);
            est.reps = std::stoll(reps);
            map_[key] = est;
        } catch (const std::exception&) {
            continue;
        }
    }
}

std::string PowerCache::key(TestId test, const Alternative& alt, long long n,
                            const McConfig& cfg) {
    std::ostringstream ss;
    ss << to_string(test) << ',' << fmt_double(alt.eps) << ','
       << fmt_double(alt.beta.p) << ',' << fmt_double(alt.beta.q) << ',' << n
       << ',' << fmt_double(cfg.cv_rule.alpha) << ','
       << rule_kind_name(cfg.cv_rule.kind);
    if (cfg.cv_rule.kind == CriticalValueRule::Kind::mc_calibrated) {
        ss << ':' << cfg.cv_rule.reps << ':' << cfg.cv_rule.seed;
    }
    ss << ',' << cfg.reps << ',' << cfg.seed;
    return ss.str();
}

std::optional<PowerEstimate> PowerCache::lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mtx_);
    auto it = map_.find(key);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

void PowerCache::store(const std::string& key, const PowerEstimate& est) {
    std::lock_guard<std::mutex> lock(mtx_);
    auto [it, inserted] = map_.emplace(key, est);
    if (!inserted) return;  // append-only: first value wins
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw std::runtime_error("power cache not writable: " + path_);
    out << key << '\t' << fmt_double(est.power) << '\t' << fmt_double(est.se)
        << '\t' << est.reps << '\n';
}

std::size_t PowerCache::size() const {
    std::lock_guard<std::mutex> lock(mtx_);
    return map_.size();
}

PowerEstimate PowerEvaluator::evaluate(TestId test, const Alternative& alt,
                                       long long n) const {
    const std::string k = PowerCache::key(test, alt, n, base);
    if (cache) {
        if (auto hit = cache->lookup(k)) return *hit;
    }
    McConfig node = base;
    node.seed = derive_key(base.seed,
                           {static_cast<std::uint64_t>(test),
                            static_cast<std::uint64_t>(n)});
    const PowerEstimate est = power_mc(test, alt, n, node);
    if (cache) cache->store(k, est);
    return est;
}

SampleSizeResult min_sample_size(TestId test, const Alternative& alt,
                                 double alpha, double target_power,
                                 const McConfig& cfg, PowerCache* cache,
                                 long long n_max, long long n_hint) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must lie in (0,1)");
    if (!(target_power > alpha && target_power < 1.0))
        throw std::invalid_argument("target power must lie in (alpha,1)");
    if (alt.is_null())
        throw std::invalid_argument(
            "sample size search needs a non-null alternative");
    if (n_max < 2) throw std::invalid_argument("n_max must be at least 2");

    PowerEvaluator eval;
    eval.base = cfg;
    eval.base.cv_rule.alpha = alpha;
    eval.cache = cache;

    int evaluations = 0;
    double best_power = 0.0;
    const double threshold = target_power - tol_match;
    auto meets = [&](long long n, PowerEstimate& out) {
        out = eval.evaluate(test, alt, n);
        ++evaluations;
        if (out.power > best_power) best_power = out.power;
        return out.power >= threshold;
    };

    long long start = n_hint > 0 ? n_hint : 16;
    if (start < 2) start = 2;
    if (start > n_max) start = n_max;

    // Geometric bracket: lo always fails (0 = virtual failure below n=2),
    // hi meets the criterion.
    long long lo = 0, hi = start;
    PowerEstimate est;
    if (meets(start, est)) {
        lo = 0;
    } else {
        lo = start;
        for (;;) {
            if (lo >= n_max) {
                throw SampleSizeError(
                    "target power unreachable within n_max", lo, n_max,
                    best_power, evaluations);
            }
            hi = lo * 2 < n_max ? lo * 2 : n_max;
            if (meets(hi, est)) break;
            lo = hi;
        }
    }
    PowerEstimate at_hi = est;

    while (hi - lo > 1) {
        const long long mid = lo + (hi - lo) / 2;
        if (mid <= 0 || mid == lo) break;
        if (meets(mid, est)) {
            hi = mid;
            at_hi = est;
        } else {
            lo = mid;
        }
    }

    SampleSizeResult res;
    res.n = hi;
    res.achieved_power = at_hi;
    res.bracket_low = lo;
    res.bracket_high = hi;
    res.evaluations = evaluations;
    return res;
}

EfficiencyReport matched_ere(const Alternative& alt, double alpha,
                             long long anchor_n, const McConfig& cfg,
                             PowerCache* cache, long long n_max) {
    if (anchor_n < 2) throw std::invalid_argument("anchor_n must be >= 2");

    PowerEvaluator eval;
    eval.base = cfg;
    eval.base.cv_rule.alpha = alpha;
    eval.cache = cache;

    EfficiencyReport rep;
    rep.alt = alt;
    rep.alpha = alpha;
    rep.n_v = anchor_n;
    rep.power_v = eval.evaluate(TestId::V, alt, anchor_n);

    const SampleSizeResult match =
        min_sample_size(TestId::T, alt, alpha, rep.power_v.power, cfg, cache,
                        n_max, anchor_n);
    rep.n_t = match.n;
    rep.power_t = match.achieved_power;
    rep.ere = static_cast<double>(rep.n_v) / static_cast<double>(rep.n_t);

    if (!alt.beta.is_uniform()) {
        try {
            rep.pitman_linear_value = pitman_linear(alt.beta.p, alt.beta.q);
        } catch (const std::exception&) {
            rep.pitman_linear_value = std::nullopt;
        }
    }
    try {
        rep.hellinger_from_null = hellinger(alt, Alternative::null());
    } catch (const QuadratureError&) {
        rep.hellinger_from_null = std::nullopt;
    }
    return rep;
}

ProbeSeries convergence_probe(const Path& path, TestId test, double alpha,
                              double beta_power,
                              const std::vector<double>& s_grid,
                              const McConfig& cfg, PowerCache* cache,
                              long long n_max) {
    if (s_grid.empty()) throw std::invalid_argument("empty probe grid");
    for (std::size_t i = 0; i < s_grid.size(); ++i) {
        if (!(s_grid[i] > 0.0))
            throw std::invalid_argument("probe grid values must be positive");
        if (i > 0 && !(s_grid[i] < s_grid[i - 1]))
            throw std::invalid_argument("probe grid must decrease toward 0");
    }
    if (!(beta_power > alpha && beta_power < 1.0))
        throw std::invalid_argument("target power must lie in (alpha,1)");

    const SlopeEstimate slope = path_slopes(path, test);
    const double c =
        (slope.mu_slope0 / slope.sigma0) * (slope.mu_slope0 / slope.sigma0);
    if (!(c > 0.0))
        throw std::runtime_error(
            "probe needs a first-order sensitive test on this path");

    ProbeSeries series;
    series.c_value = c;
    series.theory_limit = (normal_quantile(1.0 - alpha) -
                           normal_quantile(1.0 - beta_power)) /
                          std::sqrt(c);

    for (double s : s_grid) {
        const Alternative alt = path.eval(s);
        ProbePoint pt;
        pt.s = s;
        // The limit predicts n ~ (limit/s)^2; seed the bracket there.
        const double guess = series.theory_limit / s;
        long long hint = static_cast<long long>(guess * guess);
        if (hint < 2) hint = 2;
        if (hint > n_max) hint = n_max;
        try {
            const SampleSizeResult res = min_sample_size(
                test, alt, alpha, beta_power, cfg, cache, n_max, hint);
            pt.n = res.n;
            pt.achieved = res.achieved_power;
        } catch (const SampleSizeError& e) {
            pt.n = n_max;
            pt.capped = true;
            pt.achieved.power = e.best_power;
            pt.achieved.se = 0.0;
            pt.achieved.reps = cfg.reps;
            std::fprintf(stderr,
                         "warning: probe at s=%g capped at n_max=%" PRId64
                         " (best power %.4f)\n",
                         s, static_cast<std::int64_t>(n_max), e.best_power);
        }
        pt.s_sqrt_n = pt.s * std::sqrt(static_cast<double>(pt.n));
        series.points.push_back(pt);
    }
    return series;
}

}  // namespace betaeff
