#include "bbm/stats.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bbm/rng.hpp"

namespace bbm::stats {

double normal_quantile(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1)");
  }
  const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(boost::math::complement(standard, 0.5 * (1.0 - confidence)));
}

EstimateCI mean_ci(std::span<const double> samples, double confidence) {
  const auto n = static_cast<std::int64_t>(samples.size());
  if (n < 2) throw std::invalid_argument("mean_ci needs at least two samples");
  const double z = normal_quantile(confidence);

  // Two-pass for stability; the first pass fixes the summation order.
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  EstimateCI ci;
  ci.mean = mean;
  ci.std_error = sd / std::sqrt(static_cast<double>(n));
  ci.half_width = z * ci.std_error;
  ci.confidence = confidence;
  ci.n = n;
  ci.lower = mean - ci.half_width;
  ci.upper = mean + ci.half_width;
  return ci;
}

EstimateCI proportion_ci(std::int64_t hits, std::int64_t n, double confidence) {
  if (n < 1 || hits < 0 || hits > n) {
    throw std::invalid_argument("proportion_ci needs 0 <= hits <= n and n >= 1");
  }
  const double z = normal_quantile(confidence);
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));

  EstimateCI ci;
  ci.mean = p;
  ci.lower = std::max(0.0, centre - half);
  ci.upper = std::min(1.0, centre + half);
  ci.half_width = 0.5 * (ci.upper - ci.lower);
  ci.std_error = ci.half_width / z;
  ci.confidence = confidence;
  ci.n = n;
  return ci;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("linear_fit needs two equally sized series of length >= 2");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: x values are all equal");

  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_std_error = std::sqrt(rss / (n - 2.0) / sxx);
  }
  return fit;
}

std::uint64_t poisson(CounterRng& rng, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson: bad mean");
  constexpr double kPiece = 500.0;  // exp(-500) is still a normal double
  std::uint64_t total = 0;
  while (mean > 0.0) {
    const double m = std::min(mean, kPiece);
    mean -= m;
    const double u = rng.uniform();
    double p = std::exp(-m);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf && p > 0.0) {
      ++k;
      p *= m / static_cast<double>(k);
      cdf += p;
    }
    total += k;
  }
  return total;
}

}  // namespace bbm::stats
