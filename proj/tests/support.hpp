#pragma once

#include <random>

#include "bosenet/curves.hpp"

namespace bosenet::testing {

inline Curve random_curve(std::mt19937& rng, double t0 = 0.0, double t1 = 1.0) {
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.0, 0.9);
  return Curve({Segment{t0, t1, sinusoidal_form(u(rng), u(rng), 3.0 * u(rng), pos(rng), u(rng))}});
}

inline Schedule random_schedule(int N, std::mt19937& rng, double t0 = 0.0, double t1 = 1.0) {
  Schedule s;
  s.N = N;
  s.t_begin = t0;
  s.t_end = t1;
  for (int k = 0; k < N - 1; ++k) {
    s.theta.push_back(random_curve(rng, t0, t1));
    s.alpha.push_back(random_curve(rng, t0, t1));
  }
  return s;
}

}  // namespace bosenet::testing
