#pragma once

#include <string>

namespace bbm::theory {

/// A closed-form reference number and a short description of the formula
/// that produced it. Values marked "leading order" drop a (1 + o(1)) factor.
struct TheoryValue {
  double value = 0.0;
  std::string ref;
};

/// pi^{d/2} / Gamma(d/2 + 1).
double unit_ball_volume(int d);

/// Almost-sure limit of vol(sausage with radius r0 e^{-beta k t}) / t^d.
TheoryValue limit_sausage(int d, double beta, double k);

/// Almost-sure limit of vol(r_t-enlargement of the time-t support) / t^d.
TheoryValue limit_enlargement(int d, double beta, double k);

/// Newtonian capacity of B(0, r) for Brownian motion with generator Delta/2, d >= 3.
TheoryValue newtonian_capacity(int d, double r);

/// Leading-order mean volume of the Wiener sausage of fixed radius r at time t.
TheoryValue expected_wiener_sausage(int d, double r, double t);

/// Leading-order mean volume of the Wiener sausage of radius r0 e^{-beta k t} at time t.
TheoryValue expected_shrinking_sausage(int d, double beta, double k, double r0, double t);

/// Limit as r -> 0 of P_rho(min_{s<=t} |X(s)| < r) / r^{2v}, v = (d-2)/2, |rho| = R,
/// computed by adaptive quadrature of its time integral. d >= 3.
double hitting_integral(int d, double R, double t);

/// c(d, r0, R) = (r0/R)^{2v} Gamma(v, R^2/2) / Gamma(v): the d >= 3 constant of
/// the unit-time hitting probability of a shrinking ball.
TheoryValue hitting_constant(int d, double r0, double R);

/// Leading-order probability that Brownian motion started at distance R hits
/// B(0, r0 e^{-beta k t}) within unit time. d = 2 and d >= 3.
TheoryValue hitting_prob_shrinking(int d, double R, double r0, double beta, double k, double t);

/// Exponential rate gamma^2/2 of P(sup_{s<=t} |X(s)| > gamma t).
double displacement_tail_exponent(double gamma);

/// Asymptotic speed sqrt(2 beta) of strictly dyadic BBM.
double bbm_speed(double beta);

}  // namespace bbm::theory
