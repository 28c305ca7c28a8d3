#pragma once

#include <functional>

namespace bbm::special {

/// Exponential integral E1(x) = int_x^inf e^{-t}/t dt, x > 0.
/// Power series for x <= 1, Lentz continued fraction above.
double exp_integral_e1(double x);

/// Upper incomplete gamma Gamma(v, x) = int_x^inf t^{v-1} e^{-t} dt, v > 0, x > 0.
/// Series for the lower function when x < v + 1, continued fraction otherwise.
double upper_incomplete_gamma(double v, double x);

/// Adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-13, double abs_tol = 0.0, int max_depth = 60);

}  // namespace bbm::special
