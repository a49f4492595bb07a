#include "tabpower/laws.hpp"

#include <algorithm>
#include <cmath>

#include "tabpower/rng.hpp"
#include "tabpower/special.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tabpower {

namespace {

// Canonical form shared by both law families:
//   X = sigma * Z0 + sum_k w[k] * Z_k^2 + mu.
struct QuadNormalForm {
  double sigma = 0.0;
  std::vector<double> w;
  double mu = 0.0;
};

QuadNormalForm canonical(const SecondOrderLaw& law) {
  QuadNormalForm q;
  q.sigma = law.sigma;
  double root_n = std::sqrt(law.n);
  q.w.reserve(law.weights.size());
  for (double b : law.weights) q.w.push_back(b / (2.0 * root_n));
  q.mu = law.shift / root_n;
  return q;
}

QuadNormalForm canonical(const NullLaw& law) {
  QuadNormalForm q;
  q.w = law.weights;
  double wsum = 0.0;
  for (double w : law.weights) wsum += w;
  q.mu = law.shift - wsum;  // the (Z^2 - 1) centering
  return q;
}

std::vector<double> active_weights(const std::vector<double>& w) {
  double wmax = 0.0;
  for (double x : w) wmax = std::max(wmax, std::fabs(x));
  std::vector<double> out;
  double floor = 1e-14 * std::max(1.0, wmax);
  for (double x : w)
    if (std::fabs(x) > floor) out.push_back(x);
  return out;
}

struct Integrand {
  // Gil-Pelaez / Imhof integrand for P(X <= x):
  //   1/2 - (1/pi) * int_0^inf exp(-sigma^2 t^2 / 2)
  //        * prod (1 + 4 w^2 t^2)^(-1/4) * sin(theta(t)) / t dt,
  //   theta(t) = (mu - x) t + 1/2 sum atan(2 w t).
  double sigma2;
  const std::vector<double>& w;
  double drift;  // mu - x

  double operator()(double t) const {
    if (t <= 0.0) {
      double wsum = 0.0;
      for (double v : w) wsum += v;
      return drift + wsum;  // limit of sin(theta)/t at t -> 0
    }
    double theta = drift * t;
    double logenv = -0.5 * sigma2 * t * t;
    for (double v : w) {
      double u = 2.0 * v * t;
      theta += 0.5 * std::atan(u);
      logenv -= 0.25 * std::log1p(u * u);
    }
    return std::exp(logenv) * std::sin(theta) / t;
  }

  double envelope(double t) const {
    double logenv = -0.5 * sigma2 * t * t;
    for (double v : w) {
      double u = 2.0 * v * t;
      logenv -= 0.25 * std::log1p(u * u);
    }
    return std::exp(logenv);
  }
};

// Bound on the absolute tail integral past T. With a normal component the
// envelope decays like a Gaussian; otherwise like T^(-K/2) with constant
// prod (2|w|)^(-1/2).
double tail_bound(const Integrand& f, double sigma, double T) {
  if (sigma > 0.0) return f.envelope(T) / (sigma * sigma * T * T);
  double k = static_cast<double>(f.w.size());
  double logc = 0.0;
  for (double v : f.w) logc -= 0.5 * std::log(2.0 * std::fabs(v));
  return std::exp(logc - 0.5 * k * std::log(T)) * (2.0 / k);
}

struct SimpsonBudget {
  long evals = 0;
  long limit = 4000000;
};

double adaptive_simpson(const Integrand& f, double a, double fa, double b,
                        double fb, double fm, double whole, double tol,
                        int depth, SimpsonBudget& budget) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  budget.evals += 2;
  if (budget.evals > budget.limit)
    throw accuracy_error("cf_inversion: integration budget exceeded");
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1,
                          budget) +
         adaptive_simpson(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1,
                          budget);
}

constexpr double kCdfTol = 1e-7;

// P(w1 U + w2 V <= y) for U, V iid chi^2_1 and unequal weights, by
// conditioning on V = t^2: integral of 2 phi(t) P(w1 U <= y - w2 t^2).
// Two-term laws decay too slowly in frequency space for the oscillatory
// integral, so this real-space form is used instead.
double two_weight_cdf(double w1, double w2, double y) {
  auto inner = [&](double t) {
    double rem = (y - w2 * t * t) / w1;
    double p = rem <= 0.0 ? 0.0 : chisq_cdf(rem, 1.0);
    if (w1 < 0.0) p = 1.0 - p;
    return 2.0 * std::exp(-0.5 * t * t) / std::sqrt(2.0 * M_PI) * p;
  };
  // integrand is smooth except where the inner argument crosses zero
  std::vector<double> knots = {0.0};
  if (y / w2 > 0.0) {
    double t_star = std::sqrt(y / w2);
    if (t_star < 10.0) knots.push_back(t_star);
  }
  knots.push_back(10.0);
  std::sort(knots.begin(), knots.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    double a = knots[k], b = knots[k + 1];
    // composite Simpson, fixed fine grid; integrand is cheap and bounded
    // (square-root kink at the knot limits the useful order anyway)
    const int steps = 1024;
    double h = (b - a) / steps;
    double acc = inner(a) + inner(b);
    for (int i = 1; i < steps; ++i)
      acc += inner(a + i * h) * (i % 2 ? 4.0 : 2.0);
    total += acc * h / 3.0;
  }
  return std::clamp(total, 0.0, 1.0);
}

double quad_form_cdf_cf(const QuadNormalForm& form, double x) {
  std::vector<double> w = active_weights(form.w);
  const double sigma = form.sigma;
  if (w.empty()) {
    if (sigma <= 0.0) return x >= form.mu ? 1.0 : 0.0;
    return normal_cdf((x - form.mu) / sigma);
  }
  if (sigma <= 0.0) {
    bool equal = true;
    for (double v : w)
      if (std::fabs(v - w[0]) > 1e-12 * std::fabs(w[0])) equal = false;
    if (equal) {
      // X = w * chi^2_K + mu exactly.
      double y = (x - form.mu) / w[0];
      double p = chisq_cdf(y, static_cast<double>(w.size()));
      return w[0] > 0.0 ? p : 1.0 - p;
    }
    if (w.size() == 2) {
      // order so the conditioning variable carries the larger |weight|
      double w1 = w[0], w2 = w[1];
      if (std::fabs(w1) > std::fabs(w2)) std::swap(w1, w2);
      if (w2 < 0.0)  // mirror so the conditioning weight is positive
        return 1.0 - two_weight_cdf(-w1, -w2, -(x - form.mu));
      return two_weight_cdf(w1, w2, x - form.mu);
    }
  }
  Integrand f{sigma * sigma, w, form.mu - x};
  double T = 1.0;
  while (tail_bound(f, sigma, T) > kCdfTol / 3.0) {
    T *= 2.0;
    if (T > 1e9)
      throw accuracy_error(
          "cf_inversion: truncation point exceeds budget (slowly decaying "
          "characteristic function)");
  }
  // Panel width tied to the fastest phase oscillation.
  double omega = std::fabs(f.drift) + sigma;
  for (double v : w) omega += std::fabs(v);
  long panels = std::max<long>(16, static_cast<long>(std::ceil(T * omega / M_PI)));
  if (panels > 400000)
    throw accuracy_error("cf_inversion: oscillation count exceeds budget");
  SimpsonBudget budget;
  double total = 0.0;
  double step = T / static_cast<double>(panels);
  double tol_per = kCdfTol * M_PI / 3.0 / static_cast<double>(panels);
  double a = 0.0, fa = f(0.0);
  for (long p = 0; p < panels; ++p) {
    double b = (p + 1 == panels) ? T : (a + step);
    double fb = f(b);
    double m = 0.5 * (a + b);
    double fm = f(m);
    budget.evals += 2;
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    total += adaptive_simpson(f, a, fa, b, fb, fm, whole, tol_per, 40, budget);
    a = b;
    fa = fb;
  }
  double out = 0.5 - total / M_PI;
  return std::clamp(out, 0.0, 1.0);
}

double sample_one(const QuadNormalForm& form, std::uint64_t seed,
                  std::int64_t index) {
  RngStream rng(seed, static_cast<std::uint64_t>(index));
  double x = form.mu;
  if (form.sigma > 0.0) x += form.sigma * rng.normal();
  for (double w : form.w) {
    double z = rng.normal();
    x += w * z * z;
  }
  return x;
}

std::vector<double> sample_quad_form(const QuadNormalForm& form,
                                     std::int64_t m, std::uint64_t seed,
                                     int workers) {
  if (m < 1) throw std::domain_error("sample: m must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(m));
#ifdef _OPENMP
  if (workers > 1) {
#pragma omp parallel for schedule(static) num_threads(workers)
    for (std::int64_t k = 0; k < m; ++k)
      out[static_cast<std::size_t>(k)] = sample_one(form, seed, k);
    return out;
  }
#endif
  (void)workers;
  for (std::int64_t k = 0; k < m; ++k)
    out[static_cast<std::size_t>(k)] = sample_one(form, seed, k);
  return out;
}

double empirical_cdf(const std::vector<double>& samples, double x) {
  std::int64_t count = 0;
  for (double s : samples)
    if (s <= x) ++count;
  return static_cast<double>(count) / static_cast<double>(samples.size());
}

double quad_form_cdf(const QuadNormalForm& form, double x,
                     const Method& method) {
  if (method.kind == Method::Kind::cf_inversion)
    return quad_form_cdf_cf(form, x);
  if (method.m < 1) throw std::domain_error("cdf: monte_carlo needs m >= 1");
  return empirical_cdf(sample_quad_form(form, method.m, method.seed, 1), x);
}

double quad_form_quantile(const QuadNormalForm& form, double p,
                          const Method& method) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("quantile: p must be in (0,1)");
  if (method.kind == Method::Kind::monte_carlo) {
    if (method.m < 1)
      throw std::domain_error("quantile: monte_carlo needs m >= 1");
    std::vector<double> s = sample_quad_form(form, method.m, method.seed, 1);
    auto k = static_cast<std::int64_t>(
        std::ceil(p * static_cast<double>(method.m))) - 1;
    k = std::clamp<std::int64_t>(k, 0, method.m - 1);
    std::nth_element(s.begin(), s.begin() + k, s.end());
    return s[static_cast<std::size_t>(k)];
  }
  double mean = form.mu, var = form.sigma * form.sigma;
  for (double w : form.w) {
    mean += w;
    var += 2.0 * w * w;
  }
  double scale = std::sqrt(var);
  if (scale <= 0.0) return mean;
  double lo = mean - 4.0 * scale, hi = mean + 4.0 * scale;
  for (int it = 0; quad_form_cdf_cf(form, lo) > p; ++it) {
    lo -= 4.0 * scale;
    if (it > 60) throw accuracy_error("quantile: bracket search failed (low)");
  }
  for (int it = 0; quad_form_cdf_cf(form, hi) < p; ++it) {
    hi += 4.0 * scale;
    if (it > 60) throw accuracy_error("quantile: bracket search failed (high)");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double c = quad_form_cdf_cf(form, mid);
    if (c < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-10 * std::max(1.0, std::fabs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double SecondOrderLaw::mean() const {
  double wsum = 0.0;
  for (double b : weights) wsum += b;
  return wsum / (2.0 * std::sqrt(n)) + shift / std::sqrt(n);
}

double SecondOrderLaw::variance() const {
  double q = 0.0;
  for (double b : weights) q += b * b;
  return sigma * sigma + q / (2.0 * n);
}

NullLaw NullLaw::chi_square(double df) {
  if (df < 1.0) throw std::domain_error("NullLaw: df must be >= 1");
  NullLaw law;
  law.kind = Kind::chi_square;
  law.df = df;
  return law;
}

NullLaw NullLaw::weighted_centered(std::vector<double> weights, double shift) {
  NullLaw law;
  law.kind = Kind::weighted_centered;
  law.weights = std::move(weights);
  law.shift = shift;
  return law;
}

double NullLaw::mean() const {
  if (kind == Kind::chi_square) return df;
  return shift;
}

double NullLaw::variance() const {
  if (kind == Kind::chi_square) return 2.0 * df;
  double q = 0.0;
  for (double w : weights) q += w * w;
  return 2.0 * q;
}

double cdf(const SecondOrderLaw& law, double x, const Method& method) {
  return quad_form_cdf(canonical(law), x, method);
}

double cdf(const NullLaw& law, double x, const Method& method) {
  if (law.kind == NullLaw::Kind::chi_square &&
      method.kind == Method::Kind::cf_inversion)
    return chisq_cdf(x, law.df);
  if (law.kind == NullLaw::Kind::chi_square) {
    QuadNormalForm form;
    form.w.assign(static_cast<std::size_t>(law.df), 1.0);
    return quad_form_cdf(form, x, method);
  }
  return quad_form_cdf(canonical(law), x, method);
}

double quantile(const SecondOrderLaw& law, double p, const Method& method) {
  return quad_form_quantile(canonical(law), p, method);
}

double quantile(const NullLaw& law, double p, const Method& method) {
  if (law.kind == NullLaw::Kind::chi_square &&
      method.kind == Method::Kind::cf_inversion)
    return chisq_quantile(p, law.df);
  if (law.kind == NullLaw::Kind::chi_square) {
    QuadNormalForm form;
    form.w.assign(static_cast<std::size_t>(law.df), 1.0);
    return quad_form_quantile(form, p, method);
  }
  return quad_form_quantile(canonical(law), p, method);
}

std::vector<double> sample(const SecondOrderLaw& law, std::int64_t m,
                           std::uint64_t seed, int workers) {
  return sample_quad_form(canonical(law), m, seed, workers);
}

std::vector<double> sample(const NullLaw& law, std::int64_t m,
                           std::uint64_t seed, int workers) {
  if (law.kind == NullLaw::Kind::chi_square) {
    QuadNormalForm form;
    form.w.assign(static_cast<std::size_t>(law.df), 1.0);
    return sample_quad_form(form, m, seed, workers);
  }
  return sample_quad_form(canonical(law), m, seed, workers);
}

}  // namespace tabpower
