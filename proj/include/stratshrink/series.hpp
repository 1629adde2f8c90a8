#pragma once

#include <cstdint>
#include <functional>

namespace stratshrink {

struct ExactValue {
    double value = 0.0;
    double truncation_bound = 0.0;  // rigorous bound on the discarded tail
};

double poisson_log_pmf(std::int64_t x, double mean);

// E[f(X)] for X ~ Po(mean), given |f(x)| <= growth * (1+x)^degree.
// Summation stops once the geometric tail bound falls below tol.
ExactValue poisson_expectation(const std::function<double(std::int64_t)>& f, double mean, double tol,
                               double growth, int degree);

struct LogIntegral {
    double log_value = 0.0;
    double rel_error = 0.0;
};

// log of the integral over the real line of exp(g(u)), for unimodal-ish g.
// The support is located by stepping out from `center` until g has dropped
// 60 nats below the running maximum.
LogIntegral log_integrate_exp(const std::function<double(double)>& g, double center, double rel_tol = 1e-13,
                              unsigned max_depth = 15);

// E[f(L)] for L ~ Gamma(shape, rate), by quadrature in u = log L. f must be
// positive; the log of f is supplied.
double gamma_expectation_log(const std::function<double(double)>& log_f, double shape, double rate,
                             double* rel_error = nullptr, double rel_tol = 1e-13, unsigned max_depth = 15);

}  // namespace stratshrink
