#include <cmath>
#include <numbers>

#include "doctest.h"

#include "bbm/special_functions.hpp"
#include "bbm/theory.hpp"
#include "support/oracles.hpp"

using namespace bbm::theory;
using bbm::special::exp_integral_e1;
using bbm::special::upper_incomplete_gamma;
using std::numbers::pi;

using oracle::rel_close;

TEST_CASE("unit ball volumes") {
  CHECK(unit_ball_volume(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(unit_ball_volume(2) == doctest::Approx(pi).epsilon(1e-14));
  CHECK(unit_ball_volume(3) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-14));
  CHECK_THROWS(unit_ball_volume(0));
}

TEST_CASE("sausage and enlargement limits") {
  CHECK(rel_close(limit_sausage(2, 1.0, 0.0).value, 2 * pi, 1e-12));
  CHECK(rel_close(limit_sausage(2, 1.0, 3.0).value, 2 * pi, 1e-12));
  CHECK(rel_close(limit_sausage(3, 0.5, 0.5).value, std::pow(0.5, 1.5) * 4.0 * pi / 3.0, 1e-12));
  CHECK(limit_sausage(3, 0.5, 0.5).value == doctest::Approx(1.48096).epsilon(1e-5));
  CHECK(limit_sausage(3, 1.0, 1.0).value == 0.0);
  CHECK(limit_sausage(4, 1.0, 0.7).value == 0.0);
  CHECK(rel_close(limit_sausage(1, 2.0, 0.3).value, 4.0, 1e-12));

  CHECK(rel_close(limit_enlargement(2, 1.0, 0.25).value, pi, 1e-12));
  CHECK(rel_close(limit_enlargement(1, 1.0, 0.5).value, 2.0, 1e-12));
  CHECK(limit_enlargement(1, 1.0, 5.0).value == 0.0);
  CHECK(limit_enlargement(2, 1.0, 0.5).value == 0.0);
  for (int d = 1; d <= 6; ++d) {
    CHECK(rel_close(limit_enlargement(d, 0.7, 0.0).value, limit_sausage(d, 0.7, 0.0).value, 1e-12));
  }
}

TEST_CASE("limit properties") {
  for (int d = 1; d <= 5; ++d) {
    const double at0 = limit_sausage(d, 1.3, 0.0).value;
    CHECK(limit_sausage(d, 1.3, 1e-12).value == doctest::Approx(at0).epsilon(1e-9));
    for (double k = 0.0; k <= 1.2; k += 0.05) {
      const double s = limit_sausage(d, 1.3, k).value;
      const double e = limit_enlargement(d, 1.3, k).value;
      CHECK(s >= 0.0);
      CHECK(e >= 0.0);
      CHECK(e <= s * (1 + 1e-12));
    }
    if (d >= 3) CHECK(limit_sausage(d, 1.0, 1.0 / (d - 2) - 1e-9).value < 1e-6);
    if (d >= 2) CHECK(limit_enlargement(d, 1.0, 1.0 / d - 1e-9).value < 1e-6);
  }
}

TEST_CASE("capacity and Wiener sausage means") {
  CHECK(rel_close(newtonian_capacity(3, 1.0).value, 2 * pi, 1e-12));
  CHECK(rel_close(newtonian_capacity(3, 0.5).value, pi, 1e-12));
  CHECK(rel_close(newtonian_capacity(4, 1.0).value, 2 * pi * pi, 1e-12));
  CHECK_THROWS(newtonian_capacity(2, 1.0));

  CHECK(rel_close(expected_wiener_sausage(1, 0.3, pi / 8).value, 1.0, 1e-12));
  CHECK(rel_close(expected_wiener_sausage(3, 0.5, 50).value, 50 * pi, 1e-12));
  CHECK(expected_wiener_sausage(3, 0.5, 50).value == doctest::Approx(157.08).epsilon(1e-4));
  CHECK(rel_close(expected_wiener_sausage(2, 1.0, std::numbers::e).value, 2 * pi * std::numbers::e, 1e-12));
  CHECK_THROWS(expected_wiener_sausage(2, 1.0, 1.0));

  CHECK(rel_close(expected_shrinking_sausage(2, 1.0, 0.5, 1.0, 7.0).value, 2 * pi, 1e-12));
  CHECK(rel_close(expected_shrinking_sausage(3, 1.0, 1.0, 1.0, 5.0).value, 10 * pi * std::exp(-5.0), 1e-12));
  CHECK(expected_shrinking_sausage(3, 1.0, 1.0, 1.0, 5.0).value == doctest::Approx(0.21169).epsilon(1e-4));
  CHECK(expected_shrinking_sausage(1, 1.0, 0.1, 1.0, 3.0).value ==
        expected_shrinking_sausage(1, 1.0, 10.0, 1.0, 3.0).value);
}

TEST_CASE("tail exponent and speed") {
  CHECK(displacement_tail_exponent(1.0) == 0.5);
  CHECK(rel_close(displacement_tail_exponent(std::sqrt(2.0)), 1.0, 1e-12));
  CHECK(displacement_tail_exponent(2.0) == 2.0);
  CHECK(rel_close(bbm_speed(0.5), 1.0, 1e-12));
  CHECK(rel_close(bbm_speed(2.0), 2.0, 1e-12));
  for (double beta : {0.3, 1.0, 2.5}) {
    CHECK(rel_close(limit_sausage(1, beta, 0.2).value, 2.0 * bbm_speed(beta), 1e-12));
  }
}

TEST_CASE("special functions against quadrature on a log grid") {
  for (int i = 0; i < 100; ++i) {
    const double x = 1e-6 * std::pow(50.0 / 1e-6, i / 99.0);
    const double e1 = oracle::e1(x);
    CHECK_MESSAGE(rel_close(exp_integral_e1(x), e1, 1e-9), "E1 at x = " << x);
    for (double v : {0.5, 1.0, 1.5, 2.5}) {
      const double g = oracle::upper_gamma(v, x);
      CHECK_MESSAGE(rel_close(upper_incomplete_gamma(v, x), g, 1e-9), "Gamma(" << v << ", " << x << ")");
    }
  }
}

TEST_CASE("special function examples") {
  CHECK(exp_integral_e1(1.0) == doctest::Approx(0.2193839).epsilon(1e-6));
  CHECK(rel_close(upper_incomplete_gamma(0.5, 0.5), std::sqrt(pi) * std::erfc(std::sqrt(0.5)), 1e-12));
  CHECK(upper_incomplete_gamma(0.5, 0.5) == doctest::Approx(0.56238).epsilon(1e-4));
  CHECK(std::fabs(upper_incomplete_gamma(1.0, 1e-8) - 1.0) < 1e-7);
  CHECK_THROWS(exp_integral_e1(0.0));
  CHECK_THROWS(upper_incomplete_gamma(0.0, 1.0));
}

TEST_CASE("hitting constant: closed form against quadrature") {
  for (int d : {3, 4, 5}) {
    for (double r0 : {0.05, 0.1, 0.3}) {
      for (double R : {0.5, 1.0, 2.0}) {
        const double oracle = oracle::hitting_constant(d, r0, R);
        CHECK_MESSAGE(rel_close(hitting_constant(d, r0, R).value, oracle, 1e-8), d << " " << r0 << " " << R);
        const double v = 0.5 * (d - 2);
        CHECK(rel_close(std::pow(r0, 2 * v) * hitting_integral(d, R, 1.0), oracle, 1e-8));
      }
    }
  }
  const double c = 0.1 * std::erfc(std::sqrt(0.5));
  CHECK(rel_close(hitting_constant(3, 0.1, 1.0).value, c, 1e-10));
  CHECK(hitting_constant(3, 0.1, 1.0).value == doctest::Approx(0.0317310).epsilon(1e-6));
  CHECK(hitting_constant(3, 1e-6, 1.0).value < 1e-6);
  CHECK(hitting_constant(3, 0.2, 1.0).value > hitting_constant(3, 0.1, 1.0).value);
  CHECK(hitting_constant(3, 0.1, 1.5).value < hitting_constant(3, 0.1, 1.0).value);
  CHECK_THROWS(hitting_constant(3, 1.0, 1.0));
}

TEST_CASE("hitting probabilities") {
  const double e1 = oracle::e1(1.0);
  CHECK(rel_close(hitting_prob_shrinking(2, std::sqrt(2.0), 1.0, 1.0, 1.0, 10.0).value, 0.5 * e1 / 10.0, 1e-9));
  CHECK(hitting_prob_shrinking(2, std::sqrt(2.0), 1.0, 1.0, 1.0, 10.0).value ==
        doctest::Approx(0.0109692).epsilon(1e-5));
  const double d3 = 0.1 * std::erfc(std::sqrt(0.5)) * std::exp(-5.0);
  CHECK(rel_close(hitting_prob_shrinking(3, 1.0, 0.1, 1.0, 1.0, 5.0).value, d3, 1e-10));
  CHECK(hitting_prob_shrinking(3, 1.0, 0.1, 1.0, 1.0, 5.0).value == doctest::Approx(2.1379e-4).epsilon(1e-4));
  for (int d : {2, 3, 4}) {
    CHECK(hitting_prob_shrinking(d, 1.0, 0.1, 1.0, 1.0, 200.0).value < 1e-2);
    CHECK(hitting_prob_shrinking(d, 1.0, 0.1, 1.0, 1.0, 400.0).value <
          hitting_prob_shrinking(d, 1.0, 0.1, 1.0, 1.0, 200.0).value);
  }
  CHECK_THROWS(hitting_prob_shrinking(1, 1.0, 0.1, 1.0, 1.0, 5.0));
  CHECK_THROWS(hitting_prob_shrinking(3, 1.0, 2.0, 1.0, 1.0, 0.1));
}
