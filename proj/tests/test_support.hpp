#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "qstate/geometry.hpp"

namespace qstate::test {

inline MeshPtr mesh(int level) {
  static MeshPtr cache[kMaxSubdivisionLevel + 1];
  if (!cache[level]) cache[level] = build_icosphere(level);
  return cache[level];
}

inline ScalarField coord(const MeshPtr& m, int axis) {
  return sample_field(m, [axis](const Vec3& p) { return axis == 0 ? p.x : axis == 1 ? p.y : p.z; });
}

inline ScalarField square(const MeshPtr& m, int axis) {
  const ScalarField c = coord(m, axis);
  return c * c;
}

// Sum of a few plane waves; smooth, generic critical points.
inline ScalarField random_field(const MeshPtr& m, std::mt19937_64& rng, double freq = 3.0) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec3 k[4];
  double ph[4], amp[4];
  for (int i = 0; i < 4; ++i) {
    k[i] = freq * Vec3{u(rng), u(rng), u(rng)};
    ph[i] = std::numbers::pi * u(rng);
    amp[i] = u(rng);
  }
  return sample_field(m, [&](const Vec3& p) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) s += amp[i] * std::sin(dot(k[i], p) + ph[i]);
    return s;
  });
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return normalized(Vec3{n(rng), n(rng), n(rng)});
}

}  // namespace qstate::test
