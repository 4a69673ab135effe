#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bosenet {

// Times are measured in units of the stage period tau; rates in 1/tau.

struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Which side of a segment boundary a query resolves to. Left: the boundary
// value belongs to the segment that ends there. Right: the segment that
// starts there.
enum class Side { Left, Right };

class DomainError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class CurveError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Form {
 public:
  virtual ~Form() = default;
  virtual Jet eval(double t) const = 0;
};

struct Segment {
  double start;
  double end;
  std::shared_ptr<const Form> form;
};

class Curve {
 public:
  Curve() = default;
  explicit Curve(std::vector<Segment> segments);

  Jet eval(double t, Side side = Side::Left) const;
  double value(double t, Side side = Side::Left) const { return eval(t, side).value; }

  const std::vector<Segment>& segments() const { return segments_; }
  double start() const { return segments_.front().start; }
  double end() const { return segments_.back().end; }
  bool empty() const { return segments_.empty(); }

  static Curve constant(double c, double t0, double t1);
  static Curve linear(double c0, double c1, double t0, double t1, double shift = 0.0);
  static Curve scaled(const Curve& ref, double scale, double offset = 0.0);

 private:
  std::vector<Segment> segments_;
};

std::shared_ptr<const Form> constant_form(double c);
// c0 + c1 (t - shift)
std::shared_ptr<const Form> linear_form(double c0, double c1, double shift = 0.0);
// c0 + c1 sin(c2 s) / (1 + c3 sin^2(c2 s)),  s = t - shift
std::shared_ptr<const Form> sinusoidal_form(double c0, double c1, double c2, double c3,
                                            double shift = 0.0);
std::shared_ptr<const Form> scaled_form(std::shared_ptr<const Form> inner, double scale,
                                        double offset);

// v0 + sign * integral_{a}^{t} rate(s) ds on [a, b], tabulated with composite
// Gauss-Legendre. d1 is sign * rate(t); d2 is not available (NaN).
std::shared_ptr<const Form> integrated_form(std::function<double(double)> rate, double a,
                                            double b, double v0, double sign = 1.0,
                                            int cells = 256);

Jet eval_curve(const Curve& curve, double t, Side side = Side::Left);

struct SegmentSpec {
  double start = 0.0;
  double end = 0.0;
  std::string form;  // constant | linear | sinusoidal
  std::vector<double> c;
  double shift = 0.0;
};

struct CurveSpec {
  std::vector<SegmentSpec> segments;
  std::string ref;  // name of another curve in the same schedule; overrides segments
  double scale = 1.0;
  double offset = 0.0;
};

struct ScheduleSpec {
  std::vector<CurveSpec> theta;
  std::vector<CurveSpec> alpha;    // empty: alphas derived by synthesis
  std::vector<CurveSpec> phase_f;  // N=2: {f}; N=3: {f1, f}
};

struct Schedule {
  int N = 0;
  std::vector<Curve> theta;
  std::vector<Curve> alpha;
  std::vector<Curve> phase_f;
  std::vector<double> boundaries;  // interior stage boundaries
  double t_begin = 0.0;
  double t_end = 1.0;

  bool has_alpha() const { return alpha.size() + 1 == static_cast<std::size_t>(N); }
  std::size_t stage_count() const { return boundaries.size() + 1; }
  // Stage edges including the domain ends.
  std::vector<double> edges() const;
  std::size_t stage_of(double t, Side side = Side::Left) const;
};

Curve build_curve(const CurveSpec& spec, double t0, double t1,
                  const std::function<const Curve*(const std::string&)>& lookup);

Schedule make_schedule(int N, const ScheduleSpec& specs, const std::vector<double>& boundaries,
                       double t_end, double t_begin = 0.0);

// Validates counts, tiling and domain agreement of an already-built schedule.
void validate_schedule(const Schedule& s);

}  // namespace bosenet
