#include "pvfair/optmodel/polygon.hpp"

#include <cmath>
#include <numbers>

#include "pvfair/error.hpp"

namespace pvfair::optmodel {

namespace {

void check(double radius, int segments) {
  if (segments < 3) throw ValidationError("polygon needs at least 3 segments");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw ValidationError("polygon radius must be positive and finite");
  }
}

}  // namespace

std::vector<HalfPlane> polygonize_quadratic(double radius, int segments) {
  check(radius, segments);
  std::vector<HalfPlane> out;
  out.reserve(static_cast<std::size_t>(segments));
  for (int k = 0; k < segments; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / segments;
    double c = std::cos(theta);
    double s = std::sin(theta);
    // Snap the axis normals so that K = 4 gives an exact box.
    if (std::abs(c) < 1e-15) c = 0.0;
    if (std::abs(s) < 1e-15) s = 0.0;
    out.push_back(HalfPlane{c, s, radius});
  }
  return out;
}

}  // namespace pvfair::optmodel
