#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace semisplit {

// Radical-inverse (van der Corput) value of `index` in base `base`, in (0,1).
// index is 1-based so the sequence never emits exactly 0.
double radical_inverse(std::uint64_t index, unsigned base);

// Quantile (inverse CDF) of the standard normal distribution.
// Wichura's PPND16 rational approximation, |error| < 1e-15 over (0,1).
double normal_quantile(double u);

// Standard normal CDF.
double normal_cdf(double x);

// Regularized lower incomplete gamma P(a, x), for a > 0, x >= 0.
double gamma_p(double a, double x);

// Quantile of the chi distribution with d degrees of freedom: the r with
// P(d/2, r^2/2) = alpha. Solved by bisection on gamma_p.
double chi_quantile(int d, double alpha);

// Mean of |X| for X ~ Normal(mean, sigma^2) (folded normal), sigma >= 0.
double folded_normal_mean(double mean, double sigma);

// Quantile of |X| for X ~ Normal(mean, sigma^2), by bisection on the CDF.
double folded_normal_quantile(double mean, double sigma, double alpha);

// Shortest text that round-trips the double exactly; used for all numeric
// report output so reruns are byte-identical.
std::string format_double(double v);

// Runs fn(i) for i in [0, n). With jobs <= 1 the loop is serial. With more
// jobs a thread pool pulls indices from a shared counter; all observable
// output must be written to slot i only, so results are identical for any
// worker count.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace semisplit
