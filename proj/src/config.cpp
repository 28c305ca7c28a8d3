#include "bbm/config.hpp"

#include <cmath>
#include <sstream>

#include "bbm/point_cloud.hpp"

namespace bbm {

double SimConfig::radius_at(double t) const { return r0 * std::exp(-beta * k * t); }

double SimConfig::expected_points() const { return std::expm1(beta * horizon) / (beta * dt); }

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("invalid SimConfig: " + msg); };
  if (dimension < 1 || dimension > kMaxDim) fail("dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
  if (!(beta > 0.0) || !std::isfinite(beta)) fail("beta must be positive");
  if (!(r0 > 0.0) || !std::isfinite(r0)) fail("r0 must be positive");
  if (!(k >= 0.0) || !std::isfinite(k)) fail("k must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) fail("horizon must be >= 0");
  if (horizon > 0.0 && dt > horizon) fail("dt must not exceed the horizon");
  if (!(eta > 0.0)) fail("eta must be positive");
  if (max_points < 1) fail("max_points must be >= 1");
  if (resolution == PathResolution::Grid) {
    const double rms_step = std::sqrt(dimension * dt);
    const double limit = eta * radius_at(horizon);
    if (rms_step > limit * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "resolution rule violated: sqrt(d*dt) = " << rms_step << " exceeds eta*r(T) = " << limit
          << "; lower dt or use bridge resolution";
      fail(msg.str());
    }
  }
}

}  // namespace bbm
