#pragma once

#include <cstdint>
#include <span>

namespace bbm::stats {

/// Point estimate with a confidence interval. For symmetric intervals
/// lower = mean - half_width and upper = mean + half_width; the Wilson
/// interval is not centred on the sample proportion, so both ends are kept.
struct EstimateCI {
  double mean = 0.0;
  double half_width = 0.0;
  double confidence = 0.95;
  std::int64_t n = 0;
  double lower = 0.0;
  double upper = 0.0;
  /// Standard error of the mean (or the Wilson half width divided by z).
  double std_error = 0.0;
};

/// Two-sided standard normal quantile z with P(|Z| <= z) = confidence.
double normal_quantile(double confidence);

/// Sample mean with a normal-approximation interval. Throws
/// std::invalid_argument for fewer than two samples.
EstimateCI mean_ci(std::span<const double> samples, double confidence = 0.95);

/// Wilson score interval for a binomial proportion.
EstimateCI proportion_ci(std::int64_t hits, std::int64_t n, double confidence = 0.95);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace bbm::stats
