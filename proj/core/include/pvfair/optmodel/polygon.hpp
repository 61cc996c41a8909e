#pragma once

#include <vector>

namespace pvfair::optmodel {

/// Half-plane a·x + b·y <= c.
struct HalfPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  bool contains(double x, double y, double tol = 0.0) const { return a * x + b * y <= c + tol; }
};

/// The K tangent half-planes of the disc x² + y² <= radius², with unit
/// normals at angles 2πk/K. Their intersection is the circumscribed regular
/// K-gon, whose vertices lie at radius / cos(π/K). Throws ValidationError
/// for K < 3 or a non-positive radius.
std::vector<HalfPlane> polygonize_quadratic(double radius, int segments);

}  // namespace pvfair::optmodel
