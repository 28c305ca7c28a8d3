#include "bbm/theory.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bbm/special_functions.hpp"

namespace bbm::theory {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

double unit_ball_volume(int d) {
  require(d >= 1, "unit_ball_volume: d must be >= 1");
  const double half = 0.5 * d;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

TheoryValue limit_sausage(int d, double beta, double k) {
  require(d >= 1 && beta > 0.0 && k >= 0.0, "limit_sausage: need d >= 1, beta > 0, k >= 0");
  if (d == 1) return {2.0 * std::sqrt(2.0 * beta), "sausage limit d=1: 2 sqrt(2 beta)"};
  if (d == 2) return {2.0 * std::numbers::pi * beta, "sausage limit d=2: 2 pi beta"};
  const double a = 1.0 - k * (d - 2);
  if (a <= 0.0) return {0.0, "sausage limit d>=3, k >= 1/(d-2): 0"};
  return {std::pow(2.0 * beta * a, 0.5 * d) * unit_ball_volume(d),
          "sausage limit d>=3: [2 beta (1 - k(d-2))]^{d/2} omega_d"};
}

TheoryValue limit_enlargement(int d, double beta, double k) {
  require(d >= 1 && beta > 0.0 && k >= 0.0, "limit_enlargement: need d >= 1, beta > 0, k >= 0");
  const double a = 1.0 - k * d;
  if (a <= 0.0) return {0.0, "enlargement limit, k >= 1/d: 0"};
  if (d == 1) return {2.0 * std::sqrt(2.0 * beta * a), "enlargement limit d=1: 2 sqrt(2 beta (1-k))"};
  return {std::pow(2.0 * beta * a, 0.5 * d) * unit_ball_volume(d),
          "enlargement limit: [2 beta (1 - k d)]^{d/2} omega_d"};
}

TheoryValue newtonian_capacity(int d, double r) {
  require(d >= 3, "newtonian_capacity: d must be >= 3");
  require(r > 0.0, "newtonian_capacity: r must be positive");
  return {std::pow(r, d - 2) * 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d - 1.0),
          "Newtonian capacity r^{d-2} 2 pi^{d/2} / Gamma(d/2 - 1)"};
}

TheoryValue expected_wiener_sausage(int d, double r, double t) {
  require(d >= 1 && r > 0.0 && t > 0.0, "expected_wiener_sausage: need d >= 1, r > 0, t > 0");
  if (d == 1) return {std::sqrt(8.0 * t / std::numbers::pi), "Wiener sausage d=1, leading order: sqrt(8t/pi)"};
  if (d == 2) {
    require(t > 1.0, "expected_wiener_sausage: d = 2 needs t > 1");
    return {2.0 * std::numbers::pi * t / std::log(t), "Wiener sausage d=2, leading order: 2 pi t / log t"};
  }
  return {newtonian_capacity(d, r).value * t, "Wiener sausage d>=3, leading order: kappa_r t"};
}

TheoryValue expected_shrinking_sausage(int d, double beta, double k, double r0, double t) {
  require(d >= 1 && beta > 0.0 && k > 0.0 && r0 > 0.0 && t > 0.0,
          "expected_shrinking_sausage: need d >= 1, beta > 0, k > 0, r0 > 0, t > 0");
  if (d == 1) return {std::sqrt(8.0 * t / std::numbers::pi), "shrinking sausage d=1, leading order: sqrt(8t/pi)"};
  if (d == 2) return {std::numbers::pi / (beta * k), "shrinking sausage d=2, leading order: pi/(beta k)"};
  return {newtonian_capacity(d, r0).value * t * std::exp(-(d - 2) * beta * k * t),
          "shrinking sausage d>=3, leading order: kappa_{r0} t e^{-(d-2) beta k t}"};
}

double hitting_integral(int d, double R, double t) {
  require(d >= 3 && R > 0.0 && t > 0.0, "hitting_integral: need d >= 3, R > 0, t > 0");
  const double v = 0.5 * (d - 2);
  const double half_r2 = 0.5 * R * R;
  auto integrand = [=](double x) {
    if (x <= 0.0) return 0.0;
    return std::exp(-half_r2 / x - (1.0 + v) * std::log(x));
  };
  const double integral = special::integrate(integrand, 0.0, t, 1e-14);
  return integral / (std::pow(2.0, v) * std::tgamma(v));
}

TheoryValue hitting_constant(int d, double r0, double R) {
  require(d >= 3, "hitting_constant: d must be >= 3");
  require(r0 > 0.0 && r0 < R, "hitting_constant: need 0 < r0 < R");
  const double v = 0.5 * (d - 2);
  return {std::pow(r0 / R, 2.0 * v) * special::upper_incomplete_gamma(v, 0.5 * R * R) / std::tgamma(v),
          "hitting constant (r0/R)^{2v} Gamma(v, R^2/2) / Gamma(v), v = (d-2)/2"};
}

TheoryValue hitting_prob_shrinking(int d, double R, double r0, double beta, double k, double t) {
  require(d >= 2, "hitting_prob_shrinking: d = 1 is not supported");
  require(R > r0 && r0 > 0.0 && beta > 0.0 && k > 0.0 && t > 0.0,
          "hitting_prob_shrinking: need R > r0 > 0, beta > 0, k > 0, t > 0");
  require(r0 * std::exp(-beta * k * t) < R, "hitting_prob_shrinking: r(t) must be below R");
  if (d == 2) {
    const double c_r = 0.5 * special::exp_integral_e1(0.5 * R * R);
    return {c_r / (beta * k * t), "hitting probability d=2, leading order: c_R/(beta k t), c_R = E1(R^2/2)/2"};
  }
  return {hitting_constant(d, r0, R).value * std::exp(-beta * k * (d - 2) * t),
          "hitting probability d>=3, leading order: c e^{-beta k (d-2) t}"};
}

double displacement_tail_exponent(double gamma) {
  require(gamma > 0.0, "displacement_tail_exponent: gamma must be positive");
  return 0.5 * gamma * gamma;
}

double bbm_speed(double beta) {
  require(beta > 0.0, "bbm_speed: beta must be positive");
  return std::sqrt(2.0 * beta);
}

}  // namespace bbm::theory
