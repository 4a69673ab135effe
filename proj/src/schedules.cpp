#include <cmath>
#include <numbers>

#include "bosenet/synthesis.hpp"

namespace bosenet {

namespace {

constexpr double kPi = std::numbers::pi;

// Piecewise curve assembled stage by stage.
class StageCurve {
 public:
  void add(double a, double b, std::shared_ptr<const Form> f) {
    segs_.push_back(Segment{a, b, std::move(f)});
  }
  Curve build() { return Curve(std::move(segs_)); }

 private:
  std::vector<Segment> segs_;
};

std::vector<double> interior_boundaries(int stages, double tau) {
  std::vector<double> b;
  for (int s = 1; s < stages; ++s) b.push_back(s * tau);
  return b;
}

}  // namespace

Schedule build_noon_chiral_schedule(Direction dir, int loops, double tau,
                                    const NoonScheduleOptions& opts) {
  if (loops < 1) throw std::invalid_argument("need at least one loop");
  if (!(tau > 0)) throw std::invalid_argument("stage period must be positive");
  const double w = kPi / (2.0 * tau);
  StageCurve t1, t2;
  for (int k = 0; k < loops; ++k) {
    for (int s = 0; s < 3; ++s) {
      const double a = (3 * k + s) * tau, b = a + tau;
      // r runs 0 -> pi/2 over the stage
      auto ramp = [&](double c0, double sign) { return linear_form(c0, sign * w, a); };
      if (dir == Direction::Counterclockwise) {
        if (s < 2) {
          t1.add(a, b, ramp(0.0, 1.0));
          t2.add(a, b, ramp(0.0, 1.0));
        } else {
          t1.add(a, b, ramp(kPi, -1.0));
          t2.add(a, b, ramp(kPi / 2, 1.0));
        }
      } else {
        t1.add(a, b, ramp(kPi / 2, 1.0));
        t2.add(a, b, ramp(s == 2 ? kPi : 0.0, 1.0));
      }
    }
  }
  Schedule sch;
  sch.N = 3;
  sch.t_begin = 0.0;
  sch.t_end = 3.0 * loops * tau;
  sch.boundaries = interior_boundaries(3 * loops, tau);
  sch.theta = {t1.build(), t2.build()};
  sch.phase_f = {Curve::constant(0.0, sch.t_begin, sch.t_end),
                 Curve::scaled(sch.theta[1], opts.f_multiplier)};
  validate_schedule(sch);
  return sch;
}

Schedule build_fock_chiral_schedule(int loops, double tau, FockVariant variant) {
  if (loops < 1) throw std::invalid_argument("need at least one loop");
  if (!(tau > 0)) throw std::invalid_argument("stage period must be positive");
  const double w = kPi / (2.0 * tau);
  const int per_loop = variant == FockVariant::ThreeNode ? 3 : 4;
  StageCurve t1, t2, t3;
  for (int k = 0; k < loops; ++k) {
    const double origin = per_loop * k * tau;  // Phi = w (t - origin)
    auto phi_plus = [&](double c0, double m) { return linear_form(c0, m * w, origin); };
    auto eq55 = sinusoidal_form(kPi / 2, kPi / 2, kPi / tau, 1.0, origin);
    for (int s = 0; s < per_loop; ++s) {
      const double a = origin + s * tau, b = a + tau;
      switch (s) {
        case 0:
          t1.add(a, b, phi_plus(kPi / 2, 1.0));
          t2.add(a, b, phi_plus(kPi / 2, 2.0));
          t3.add(a, b, eq55);
          break;
        case 1:
          t1.add(a, b, phi_plus(kPi / 2, 1.0));
          t2.add(a, b, phi_plus(0.0, 1.0));
          t3.add(a, b, eq55);
          break;
        case 2:
          if (variant == FockVariant::ThreeNode) {
            t1.add(a, b, phi_plus(0.0, 1.0));
            t2.add(a, b, phi_plus(0.0, 1.0));
            t3.add(a, b, eq55);
          } else {
            t1.add(a, b, constant_form(1.5 * kPi));
            t2.add(a, b, constant_form(kPi));
            t3.add(a, b, sinusoidal_form(kPi / 2, -kPi / 2, w, 0.0, origin));
          }
          break;
        default:
          t1.add(a, b, constant_form(1.5 * kPi));
          t2.add(a, b, phi_plus(2.5 * kPi, -1.0));
          t3.add(a, b, sinusoidal_form(kPi / 2, -kPi / 2, w, 0.0, origin));
          break;
      }
    }
  }
  Schedule sch;
  sch.N = 4;
  sch.t_begin = 0.0;
  sch.t_end = per_loop * loops * tau;
  sch.boundaries = interior_boundaries(per_loop * loops, tau);
  sch.theta = {t1.build(), t2.build(), t3.build()};
  sch.alpha.assign(3, Curve::constant(0.0, sch.t_begin, sch.t_end));
  validate_schedule(sch);
  return sch;
}

}  // namespace bosenet
