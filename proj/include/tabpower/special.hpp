#pragma once

#include <cmath>

namespace tabpower {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Inverse standard normal CDF, Wichura's algorithm AS 241 (PPND16).
// Full double precision on (0,1).
double normal_quantile(double p);

// Regularized lower incomplete gamma P(a, x), series/continued-fraction
// split as in Numerical Recipes. Absolute error ~1e-14.
double gamma_p(double a, double x);

double chisq_cdf(double x, double df);
double chisq_pdf(double x, double df);
double chisq_quantile(double p, double df);

// Noncentral chi-square CDF as a Poisson mixture of central chi-squares,
// summed outward from the Poisson mode. Absolute error < 1e-10.
double noncentral_chisq_cdf(double x, double df, double ncp);
double noncentral_chisq_pdf(double x, double df, double ncp);

}  // namespace tabpower
