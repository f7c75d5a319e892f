#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "betaeff/rng.hpp"

using namespace betaeff;

namespace {

// Kolmogorov-Smirnov distance of a sample against a cdf.
template <typename Cdf>
double ks_distance(std::vector<double> x, Cdf cdf) {
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max(d, std::fabs((i + 1) / n - f));
        d = std::max(d, std::fabs(i / n - f));
    }
    return d;
}

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

template <typename Gen>
Moments sample_moments(std::size_t n, Gen gen) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = gen();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / static_cast<double>(n);
    return {mean, sum2 / static_cast<double>(n) - mean * mean};
}

constexpr std::size_t kN = 100000;

}  // namespace

TEST_CASE("key derivation is stable and sensitive") {
    const std::uint64_t k = derive_key(42, {1, 2});
    CHECK(k == derive_key(42, {1, 2}));
    CHECK(k != derive_key(42, {2, 1}));
    CHECK(k != derive_key(42, {1, 2, 0}));
    CHECK(k != derive_key(43, {1, 2}));
    CHECK(derive_key(0, {}) != 0);
}

TEST_CASE("streams replay exactly and substreams differ") {
    RngStream a(derive_key(7, {0}));
    RngStream b(derive_key(7, {0}));
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream base(123);
    RngStream s1 = base.substream(1);
    RngStream s2 = base.substream(2);
    CHECK(s1.next_u64() != s2.next_u64());
    RngStream s1_again = RngStream(123).substream(1);
    CHECK(RngStream(123).substream(1).next_u64() == s1_again.next_u64());
}

TEST_CASE("uniform01 stays inside the open interval with the right moments") {
    RngStream rs(2024);
    double lo = 1.0, hi = 0.0;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < kN; ++i) {
        const double u = rs.uniform01();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
        sum2 += u * u;
    }
    const double mean = sum / kN;
    const double var = sum2 / kN - mean * mean;
    CHECK(std::fabs(mean - 0.5) < 3.0 * 0.288675 / std::sqrt(double(kN)));
    CHECK(std::fabs(var - 1.0 / 12.0) < 0.002);
    CHECK(lo < 0.001);  // the stream actually reaches the tails
    CHECK(hi > 0.999);
}

TEST_CASE("normal deviates have standard moments") {
    RngStream rs(7);
    const Moments m = sample_moments(kN, [&] { return rs.normal(); });
    CHECK(std::fabs(m.mean) < 3.0 / std::sqrt(double(kN)));
    CHECK(std::fabs(m.var - 1.0) < 0.02);
}

TEST_CASE("gamma deviates match shape moments, including shape below one") {
    RngStream rs(99);
    const Moments m3 = sample_moments(kN, [&] { return rs.gamma(3.0); });
    CHECK(std::fabs(m3.mean - 3.0) < 3.0 * std::sqrt(3.0 / double(kN)));
    CHECK(std::fabs(m3.var - 3.0) < 0.1);

    const Moments mh = sample_moments(kN, [&] { return rs.gamma(0.5); });
    CHECK(std::fabs(mh.mean - 0.5) < 0.02);
    CHECK(std::fabs(mh.var - 0.5) < 0.05);
}

TEST_CASE("beta deviates reproduce the arcsine law") {
    RngStream rs(1234);
    std::vector<double> x(kN);
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < kN; ++i) {
        x[i] = rs.beta(0.5, 0.5);
        sum += x[i];
        sum2 += x[i] * x[i];
    }
    const double mean = sum / kN;
    CHECK(std::fabs(mean - 0.5) < 3.0 * std::sqrt(0.125 / double(kN)));
    // second raw moment of the arcsine density
    CHECK(std::fabs(sum2 / kN - 0.375) < 0.005);

    const double below_half =
        static_cast<double>(std::count_if(x.begin(), x.end(),
                                          [](double v) { return v < 0.5; })) /
        kN;
    CHECK(std::fabs(below_half - 0.5) < 3.0 * 0.5 / std::sqrt(double(kN)));

    const double ks = ks_distance(std::move(x), [](double v) {
        return 2.0 / M_PI * std::asin(std::sqrt(v));
    });
    CHECK(ks < 0.01);
}

TEST_CASE("beta deviates match moments at asymmetric shapes") {
    RngStream rs(5150);
    const Moments m = sample_moments(kN, [&] { return rs.beta(6.0, 4.0); });
    CHECK(std::fabs(m.mean - 0.6) < 0.005);
    // var of Beta(6,4) = 24/1100
    CHECK(std::fabs(m.var - 24.0 / 1100.0) < 0.002);
}
