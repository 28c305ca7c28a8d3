#include "bbm/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace bbm::special {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
constexpr int kMaxIter = 1000;

// Modified Lentz evaluation of  1/(x+1-v- 1*(1-v)/(x+3-v- 2*(2-v)/(x+5-v- ...)))
// which gives e^{x} x^{-v} Gamma(v, x) (v = 0 is the E1 case up to 1/x scaling).
double gamma_continued_fraction(double v, double x) {
  double b = x + 1.0 - v;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - v);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) <= kEps) return h;
  }
  throw std::runtime_error("continued fraction failed to converge");
}

}  // namespace

double exp_integral_e1(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("exp_integral_e1: x must be positive");
  if (x <= 1.0) {
    // E1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k <= kMaxIter; ++k) {
      term *= -x / k;
      const double add = term / k;
      sum += add;
      if (std::fabs(add) <= kEps * std::fabs(sum)) break;
    }
    return -std::numbers::egamma - std::log(x) - sum;
  }
  return std::exp(-x) * gamma_continued_fraction(0.0, x);
}

double upper_incomplete_gamma(double v, double x) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error("upper_incomplete_gamma: v must be positive");
  if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("upper_incomplete_gamma: x must be positive");
  const double log_prefactor = -x + v * std::log(x);
  if (x < v + 1.0) {
    // gamma(v, x) = x^v e^{-x} sum_n x^n / (v (v+1) ... (v+n))
    double ap = v;
    double term = 1.0 / v;
    double sum = term;
    for (int n = 1; n <= kMaxIter; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) <= kEps * std::fabs(sum)) break;
    }
    return std::tgamma(v) - std::exp(log_prefactor) * sum;
  }
  return std::exp(log_prefactor) * gamma_continued_fraction(v, x);
}

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double value;
  double error;
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double s = f(centre - dx) + f(centre + dx);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {kronrod * half, std::fabs((kronrod - gauss) * half)};
}

double adapt(const std::function<double(double)>& f, double a, double b, Segment whole,
             double tol, int depth) {
  if (whole.error <= tol || depth <= 0) return whole.value;
  const double mid = 0.5 * (a + b);
  const Segment left = gauss_kronrod(f, a, mid);
  const Segment right = gauss_kronrod(f, mid, b);
  return adapt(f, a, mid, left, 0.5 * tol, depth - 1) + adapt(f, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  const Segment whole = gauss_kronrod(f, a, b);
  // A rough magnitude from a coarse subdivision sets the relative target.
  double scale = std::fabs(whole.value);
  {
    const int pieces = 16;
    double coarse = 0.0;
    for (int i = 0; i < pieces; ++i) {
      coarse += std::fabs(gauss_kronrod(f, a + (b - a) * i / pieces, a + (b - a) * (i + 1) / pieces).value);
    }
    scale = std::max(scale, coarse);
  }
  const double tol = std::max(abs_tol, rel_tol * scale);
  return adapt(f, a, b, whole, tol, max_depth);
}

}  // namespace bbm::special
