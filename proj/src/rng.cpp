#include "stratshrink/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace stratshrink {

namespace {

constexpr std::size_t kTable = 1024;

const std::array<double, kTable>& log_fact_table() {
    static const std::array<double, kTable> table = [] {
        std::array<double, kTable> t{};
        t[0] = 0.0;
        for (std::size_t k = 1; k < kTable; ++k)
            t[k] = t[k - 1] + std::log(static_cast<double>(k));
        return t;
    }();
    return table;
}

std::uint64_t poisson_inversion(Rng& rng, double mean) {
    double u = rng.uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t x = 0;
    while (u > cdf) {
        ++x;
        p *= mean / static_cast<double>(x);
        cdf += p;
        // rounding can leave cdf a hair below u; the remaining mass is nil
        if (p < 1e-300 && static_cast<double>(x) > mean) break;
    }
    return x;
}

// Hormann (1993), transformed rejection with squeeze (PTRS).
std::uint64_t poisson_ptrs(Rng& rng, double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform_open();
        const double us = 0.5 - std::fabs(u);
        const double kd = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kd);
        if (kd < 0.0 || (us < 0.013 && v > us)) continue;
        const double lhs = std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b);
        const double rhs = -mean + kd * loglam - log_factorial(static_cast<std::uint64_t>(kd));
        if (lhs <= rhs) return static_cast<std::uint64_t>(kd);
    }
}

}  // namespace

double log_factorial(std::uint64_t k) {
    if (k < kTable) return log_fact_table()[k];
    const double n = static_cast<double>(k) + 1.0;
    // Stirling series for lgamma(n)
    return (n - 0.5) * std::log(n) - n + 0.5 * std::log(2.0 * std::numbers::pi) +
           1.0 / (12.0 * n) - 1.0 / (360.0 * n * n * n);
}

std::uint64_t Rng::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < 10.0) return poisson_inversion(*this, mean);
    return poisson_ptrs(*this, mean);
}

}  // namespace stratshrink
