#pragma once

#include "enclosure/geometry.hpp"
#include "enclosure/source.hpp"

#include <doctest.h>

#include <random>

namespace enclosure::test {

inline Obstacle unit_sphere() { return Obstacle::sphere(Vec3::Zero(), 1.0); }

// p = (3, 0, 0), eta = 0.25, a = e_z, T = 4: dist(D, B) = 1.75.
inline SourceSpec sphere_testbed_source() {
  SourceSpec s;
  s.p = Vec3(3, 0, 0);
  s.eta = 0.25;
  s.a = Vec3::UnitZ();
  s.T = 4.0;
  return s;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an enclosure::Error");
  return ErrorCode::IoError;
}

}  // namespace enclosure::test

#include "enclosure/fdtd.hpp"

namespace enclosure::test {

inline GridSpec coarse_grid(double h = 0.1) {
  GridSpec g;
  g.h = h;
  g.allow_coarse = true;
  return g;
}

// Sphere testbed at h = 0.1, simulated once per test binary.
inline const FieldRecord& coarse_sphere_record() {
  static const FieldRecord rec = run(unit_sphere(), sphere_testbed_source(), coarse_grid());
  return rec;
}

}  // namespace enclosure::test
