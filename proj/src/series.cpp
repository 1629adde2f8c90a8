#include "stratshrink/series.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "stratshrink/errors.hpp"

namespace stratshrink {

double poisson_log_pmf(std::int64_t x, double mean) {
    if (x < 0) return -std::numeric_limits<double>::infinity();
    if (mean == 0.0) return x == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    const double xd = static_cast<double>(x);
    return -mean + xd * std::log(mean) - std::lgamma(xd + 1.0);
}

ExactValue poisson_expectation(const std::function<double(std::int64_t)>& f, double mean, double tol,
                               double growth, int degree) {
    if (!(mean > 0.0) || !std::isfinite(mean)) throw DomainError("Poisson mean must be positive and finite");
    if (!(tol > 0.0)) throw DomainError("tolerance must be > 0");
    const std::int64_t hard_cap = static_cast<std::int64_t>(mean + 60.0 * std::sqrt(mean) + 2000.0);
    long double sum = 0.0L;
    double bound = std::numeric_limits<double>::infinity();
    for (std::int64_t x = 0; x <= hard_cap; ++x) {
        const double p = std::exp(poisson_log_pmf(x, mean));
        if (p > 0.0) sum += static_cast<long double>(p) * static_cast<long double>(f(x));
        const double n = static_cast<double>(x);
        const double grow = std::pow((n + 3.0) / (n + 2.0), degree);
        const double ratio = mean / (n + 2.0) * grow;
        if (ratio < 1.0) {
            const double next = std::exp(poisson_log_pmf(x + 1, mean));
            bound = growth * std::pow(n + 2.0, degree) * next / (1.0 - ratio);
            if (bound < tol) return {static_cast<double>(sum), bound};
        }
    }
    throw TruncationError("Poisson series did not reach its tolerance", bound);
}

LogIntegral log_integrate_exp(const std::function<double(double)>& g, double center, double rel_tol,
                              unsigned max_depth) {
    constexpr double kDrop = 60.0;
    constexpr double kStep = 0.25;
    constexpr int kMaxSteps = 20000;
    double gmax = g(center);
    if (!std::isfinite(gmax)) throw NumericError("log integrand not finite at the starting point");
    double lo = center;
    for (int i = 0; i < kMaxSteps; ++i) {
        lo -= kStep;
        const double v = g(lo);
        if (v > gmax) gmax = v;
        if (v < gmax - kDrop) break;
        if (i + 1 == kMaxSteps) throw NumericError("integrand does not decay to the left");
    }
    double hi = center;
    for (int i = 0; i < kMaxSteps; ++i) {
        hi += kStep;
        const double v = g(hi);
        if (v > gmax) gmax = v;
        if (v < gmax - kDrop) break;
        if (i + 1 == kMaxSteps) throw NumericError("integrand does not decay to the right");
    }
    // a maximum found late may leave an end short of the full drop
    for (int i = 0; i < kMaxSteps && g(lo) > gmax - kDrop; ++i) lo -= kStep;
    for (int i = 0; i < kMaxSteps && g(hi) > gmax - kDrop; ++i) hi += kStep;
    auto integrand = [&](double u) { return std::exp(g(u) - gmax); };
    double err = 0.0;
    const double val = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, max_depth, rel_tol, &err);
    if (!(val > 0.0) || !std::isfinite(val)) throw NumericError("quadrature produced a non-positive value");
    return {gmax + std::log(val), err / val};
}

double gamma_expectation_log(const std::function<double(double)>& log_f, double shape, double rate,
                             double* rel_error, double rel_tol, unsigned max_depth) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma parameters must be > 0");
    // Work in d = log(L / L0) around the mode L0 = shape/rate, so the density
    // part shape*(d - expm1(d)) carries no large cancelling terms.
    const double L0 = shape / rate;
    const double log_norm = shape * std::log(shape) - shape - std::lgamma(shape);
    auto g = [&](double d) { return shape * (d - std::expm1(d)) + log_f(L0 * std::exp(d)); };
    const auto r = log_integrate_exp(g, 0.0, rel_tol, max_depth);
    if (rel_error) *rel_error = r.rel_error;
    return std::exp(log_norm + r.log_value);
}

}  // namespace stratshrink
