#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <mutex>

#include "betaeff/pitman.hpp"
#include "betaeff/test_engine.hpp"

namespace betaeff {

// Power matching tolerance: printed powers are integer percent, so two
// powers within half a percent are indistinguishable.
inline constexpr double tol_match = 0.005;
inline constexpr long long default_n_max = 1000000;

// Append-only store of power evaluations keyed by the full configuration
// (test, alternative, n, level, threshold rule, reps, seed). With a backing
// file, restarted runs resume instead of recomputing.
class PowerCache {
public:
    PowerCache() = default;                     // in-memory only
    explicit PowerCache(const std::string& path);  // file-backed

    static std::string key(TestId test, const Alternative& alt, long long n,
                           const McConfig& cfg);

    std::optional<PowerEstimate> lookup(const std::string& key) const;
    void store(const std::string& key, const PowerEstimate& est);
    std::size_t size() const;

private:
    mutable std::mutex mtx_;
    std::unordered_map<std::string, PowerEstimate> map_;
    std::string path_;  // empty = no file
};

// Power evaluator with deterministic per-node seeding: node (test, n) uses
// the stream family derive_key(base.seed, {test, n}), so a sample-size
// search re-evaluating the same n anywhere reuses identical randomness and
// caches cleanly. The cache key carries the caller-visible base seed.
struct PowerEvaluator {
    McConfig base;
    PowerCache* cache = nullptr;

    PowerEstimate evaluate(TestId test, const Alternative& alt,
                           long long n) const;
};

struct SampleSizeResult {
    long long n = 0;
    PowerEstimate achieved_power;
    long long bracket_low = 0;   // largest n seen failing the criterion
    long long bracket_high = 0;  // = n
    int evaluations = 0;
};

class SampleSizeError : public std::runtime_error {
public:
    SampleSizeError(const std::string& what, long long lo, long long hi,
                    double best, int evals)
        : std::runtime_error(what),
          bracket_low(lo),
          bracket_high(hi),
          best_power(best),
          evaluations(evals) {}
    long long bracket_low;
    long long bracket_high;
    double best_power;
    int evaluations;
};

// Smallest lattice n with power >= target_power - tol_match, by geometric
// bracketing (n, 2n, ...) from the hint and integer bisection. Each node is
// evaluated once at cfg.reps with its per-node seed. Throws SampleSizeError
// carrying the best bracket when the target is unreachable within n_max.
SampleSizeResult min_sample_size(TestId test, const Alternative& alt,
                                 double alpha, double target_power,
                                 const McConfig& cfg,
                                 PowerCache* cache = nullptr,
                                 long long n_max = default_n_max,
                                 long long n_hint = 0);

struct EfficiencyReport {
    Alternative alt;
    double alpha = 0.05;
    long long n_v = 0;
    long long n_t = 0;
    PowerEstimate power_v;
    PowerEstimate power_t;
    double ere = 0.0;  // n_v / n_t
    std::optional<double> pitman_linear_value;  // may be +inf
    std::optional<double> pitman_path_value;
    std::optional<double> hellinger_from_null;
};

// Power-matched relative efficiency anchored on the mean test: evaluates
// p* = power(V, anchor_n), searches the matching sample size of the
// second-moment test, and reports ERE = anchor_n / n_T. Works unchanged
// when T is the more powerful test (then n_T < anchor_n).
EfficiencyReport matched_ere(const Alternative& alt, double alpha,
                             long long anchor_n, const McConfig& cfg,
                             PowerCache* cache = nullptr,
                             long long n_max = default_n_max);

struct ProbePoint {
    double s = 0.0;
    long long n = 0;
    double s_sqrt_n = 0.0;
    bool capped = false;  // target power unreachable within n_max
    PowerEstimate achieved;
};

struct ProbeSeries {
    std::vector<ProbePoint> points;
    double c_value = 0.0;       // (mu'(0)/sigma(0))^2 for the probed test
    double theory_limit = 0.0;  // (z_alpha - z_beta)/sqrt(c)
};

// Scaling probe: for each s in the decreasing grid, the minimal n reaching
// target power beta_power, reported as s*sqrt(n) next to its theoretical
// limit. Capped points are flagged and warned about, not fatal.
ProbeSeries convergence_probe(const Path& path, TestId test, double alpha,
                              double beta_power,
                              const std::vector<double>& s_grid,
                              const McConfig& cfg,
                              PowerCache* cache = nullptr,
                              long long n_max = default_n_max);

}  // namespace betaeff
