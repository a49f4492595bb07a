#include "tabpower/special.hpp"

#include <limits>
#include <stdexcept>

namespace tabpower {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile: p must be in (0,1)");
  // Wichura (1988), algorithm AS 241, routine PPND16.
  static const double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2,
      1.9715909503065514427e3,  1.3731693765509461125e4,
      4.5921953931549871457e4,  6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static const double b[8] = {
      1.0,                      4.2313330701600911252e1,
      6.8718700749205790830e2,  5.3941960214247511077e3,
      2.1213794301586595867e4,  3.9307895800092710610e4,
      2.8729085735721942674e4,  5.2264952788528545610e3};
  static const double c[8] = {
      1.42343711074968357734e0, 4.63033784615654529590e0,
      5.76949722146069140550e0, 3.64784832476320460504e0,
      1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static const double d[8] = {
      1.0,                      2.05319162663775882187e0,
      1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static const double e[8] = {
      6.65790464350110377720e0, 5.46378491116411436990e0,
      1.78482653991729133580e0, 2.96560571828504891230e-1,
      2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static const double f[8] = {
      1.0,                      5.99832206555887937690e-1,
      1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};
  auto poly = [](const double* k, double x) {
    return ((((((k[7] * x + k[6]) * x + k[5]) * x + k[4]) * x + k[3]) * x +
             k[2]) * x + k[1]) * x + k[0];
  };
  double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    double r = 0.180625 - q * q;
    return q * poly(a, r) / poly(b, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = poly(c, r) / poly(d, r);
  } else {
    r -= 5.0;
    x = poly(e, r) / poly(f, r);
  }
  return q < 0.0 ? -x : x;
}

namespace {

double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(a * std::log(x) - x - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  // Modified Lentz continued fraction for Q(a,x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(a * std::log(x) - x - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::domain_error("gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double chisq_cdf(double x, double df) {
  if (df <= 0.0) throw std::domain_error("chisq_cdf: df must be positive");
  if (x <= 0.0) return 0.0;
  return gamma_p(0.5 * df, 0.5 * x);
}

double chisq_pdf(double x, double df) {
  if (x <= 0.0) return 0.0;
  double h = 0.5 * df;
  return std::exp((h - 1.0) * std::log(x) - 0.5 * x - std::lgamma(h) -
                  h * M_LN2);
}

double chisq_quantile(double p, double df) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("chisq_quantile: p must be in (0,1)");
  // Wilson-Hilferty starting point, then bisection on the CDF.
  double z = normal_quantile(p);
  double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
  double x0 = df * t * t * t;
  if (!(x0 > 0.0)) x0 = 1e-8;
  double lo = x0, hi = x0;
  while (chisq_cdf(lo, df) > p && lo > 1e-300) lo *= 0.5;
  while (chisq_cdf(hi, df) < p && hi < 1e300) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (chisq_cdf(mid, df) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-14 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

double noncentral_chisq_cdf(double x, double df, double ncp) {
  if (df < 1.0) throw std::domain_error("noncentral_chisq_cdf: df must be >= 1");
  if (ncp < 0.0)
    throw std::domain_error("noncentral_chisq_cdf: ncp must be nonnegative");
  if (ncp == 0.0) return chisq_cdf(x, df);
  if (x <= 0.0) return 0.0;
  const double lam = 0.5 * ncp;
  const double hx = 0.5 * x;
  const long k0 = static_cast<long>(lam);
  const double lw0 = k0 * std::log(lam) - lam - std::lgamma(k0 + 1.0);
  const double w0 = std::exp(lw0);
  const double a0 = 0.5 * df + k0;
  const double f0 = gamma_p(a0, hx);
  // Difference of consecutive central CDFs: P(a,z) - P(a+1,z) = z^a e^-z / Gamma(a+1).
  const double lt0 = a0 * std::log(hx) - hx - std::lgamma(a0 + 1.0);
  double acc = w0 * f0;
  double wsum = w0;
  // upward from the mode
  {
    double w = w0, F = f0, t = std::exp(lt0);
    long k = k0;
    while (wsum < 1.0 - 1e-12 && k < k0 + 100000) {
      w *= lam / (k + 1.0);
      F -= t;
      if (F < 0.0) F = 0.0;
      ++k;
      acc += w * F;
      wsum += w;
      t *= hx / (0.5 * df + k);
      if (w < 1e-18 && F * w < 1e-16) break;
    }
  }
  // downward from the mode
  {
    double w = w0, F = f0;
    double t = std::exp(lt0);
    long k = k0;
    while (k > 0 && wsum < 1.0 - 1e-12) {
      t *= (0.5 * df + k) / hx;  // now t corresponds to index k-1
      w *= k / lam;
      F += t;
      if (F > 1.0) F = 1.0;
      --k;
      acc += w * F;
      wsum += w;
      if (w < 1e-18) break;
    }
  }
  if (acc < 0.0) acc = 0.0;
  if (acc > 1.0) acc = 1.0;
  return acc;
}

double noncentral_chisq_pdf(double x, double df, double ncp) {
  if (ncp < 0.0)
    throw std::domain_error("noncentral_chisq_pdf: ncp must be nonnegative");
  if (ncp == 0.0) return chisq_pdf(x, df);
  if (x <= 0.0) return 0.0;
  const double lam = 0.5 * ncp;
  const double hx = 0.5 * x;
  const long k0 = static_cast<long>(lam);
  const double w0 = std::exp(k0 * std::log(lam) - lam - std::lgamma(k0 + 1.0));
  auto dens = [&](long k) {
    double a = 0.5 * df + k;
    return 0.5 * std::exp((a - 1.0) * std::log(hx) - hx - std::lgamma(a));
  };
  double acc = w0 * dens(k0);
  {
    double w = w0, g = dens(k0);
    for (long k = k0; k < k0 + 100000; ++k) {
      w *= lam / (k + 1.0);
      g *= hx / (0.5 * df + k);
      acc += w * g;
      if (w < 1e-18) break;
    }
  }
  {
    double w = w0, g = dens(k0);
    for (long k = k0; k > 0; --k) {
      w *= k / lam;
      g *= (0.5 * df + k - 1.0) / hx;
      acc += w * g;
      if (w < 1e-18) break;
    }
  }
  return acc;
}

}  // namespace tabpower
