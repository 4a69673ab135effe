#include "bosenet/curves.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <boost/math/quadrature/gauss.hpp>

namespace bosenet {

namespace {

constexpr double kTileTol = 1e-12;

class ConstantForm final : public Form {
 public:
  explicit ConstantForm(double c) : c_(c) {}
  Jet eval(double) const override { return {c_, 0.0, 0.0}; }

 private:
  double c_;
};

class LinearForm final : public Form {
 public:
  LinearForm(double c0, double c1, double shift) : c0_(c0), c1_(c1), shift_(shift) {}
  Jet eval(double t) const override { return {c0_ + c1_ * (t - shift_), c1_, 0.0}; }

 private:
  double c0_, c1_, shift_;
};

class SinusoidalForm final : public Form {
 public:
  SinusoidalForm(double c0, double c1, double c2, double c3, double shift)
      : c0_(c0), c1_(c1), c2_(c2), c3_(c3), shift_(shift) {}

  Jet eval(double t) const override {
    const double x = c2_ * (t - shift_);
    const double s = std::sin(x), c = std::cos(x);
    const double d = 1.0 + c3_ * s * s;
    // g(s) = s / (1 + c3 s^2), differentiated through s(x) = sin x
    const double g = s / d;
    const double gp = (1.0 - c3_ * s * s) / (d * d);
    const double gpp = (2.0 * c3_ * s * (c3_ * s * s - 3.0)) / (d * d * d);
    const double dg = gp * c * c2_;
    const double ddg = (gpp * c * c - gp * s) * c2_ * c2_;
    return {c0_ + c1_ * g, c1_ * dg, c1_ * ddg};
  }

 private:
  double c0_, c1_, c2_, c3_, shift_;
};

class ScaledForm final : public Form {
 public:
  ScaledForm(std::shared_ptr<const Form> inner, double scale, double offset)
      : inner_(std::move(inner)), scale_(scale), offset_(offset) {}
  Jet eval(double t) const override {
    Jet j = inner_->eval(t);
    return {scale_ * j.value + offset_, scale_ * j.d1, scale_ * j.d2};
  }

 private:
  std::shared_ptr<const Form> inner_;
  double scale_, offset_;
};

class IntegratedForm final : public Form {
  using Rule = boost::math::quadrature::gauss<double, 10>;

 public:
  IntegratedForm(std::function<double(double)> rate, double a, double b, double v0, double sign,
                 int cells)
      : rate_(std::move(rate)), a_(a), b_(b), v0_(v0), sign_(sign), cells_(cells) {
    h_ = (b_ - a_) / cells_;
    cumulative_.resize(cells_ + 1, 0.0);
    for (int i = 0; i < cells_; ++i) {
      const double lo = a_ + i * h_;
      cumulative_[i + 1] = cumulative_[i] + Rule::integrate(rate_, lo, lo + h_);
    }
  }

  Jet eval(double t) const override {
    const double x = std::clamp(t, a_, b_);
    int i = static_cast<int>(std::floor((x - a_) / h_));
    i = std::clamp(i, 0, cells_ - 1);
    const double lo = a_ + i * h_;
    double acc = cumulative_[i];
    if (x > lo) acc += Rule::integrate(rate_, lo, x);
    return {v0_ + sign_ * acc, sign_ * rate_(x), std::numeric_limits<double>::quiet_NaN()};
  }

 private:
  std::function<double(double)> rate_;
  double a_, b_, v0_, sign_;
  int cells_;
  double h_;
  std::vector<double> cumulative_;
};

}  // namespace

std::shared_ptr<const Form> constant_form(double c) { return std::make_shared<ConstantForm>(c); }

std::shared_ptr<const Form> linear_form(double c0, double c1, double shift) {
  return std::make_shared<LinearForm>(c0, c1, shift);
}

std::shared_ptr<const Form> sinusoidal_form(double c0, double c1, double c2, double c3,
                                            double shift) {
  if (c3 < 0.0 && std::abs(c3) >= 1.0)
    throw CurveError("sinusoidal form: 1 + c3 sin^2 may vanish");
  return std::make_shared<SinusoidalForm>(c0, c1, c2, c3, shift);
}

std::shared_ptr<const Form> scaled_form(std::shared_ptr<const Form> inner, double scale,
                                        double offset) {
  return std::make_shared<ScaledForm>(std::move(inner), scale, offset);
}

std::shared_ptr<const Form> integrated_form(std::function<double(double)> rate, double a,
                                            double b, double v0, double sign, int cells) {
  if (!(b > a)) throw CurveError("integrated form needs a non-empty interval");
  return std::make_shared<IntegratedForm>(std::move(rate), a, b, v0, sign, std::max(cells, 1));
}

Curve::Curve(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw CurveError("curve has no segments");
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (!s.form) throw CurveError("segment without form");
    if (!(s.end > s.start)) throw CurveError("segment interval must be non-empty");
    if (i > 0 && std::abs(s.start - segments_[i - 1].end) > kTileTol)
      throw CurveError("segments leave a gap or overlap");
  }
}

Jet Curve::eval(double t, Side side) const {
  if (segments_.empty()) throw CurveError("evaluating an empty curve");
  if (t < start() - kTileTol || t > end() + kTileTol)
    throw DomainError("curve evaluated outside its domain");
  const std::size_t n = segments_.size();
  std::size_t idx = n - 1;
  if (side == Side::Left) {
    idx = 0;
    while (idx + 1 < n && t > segments_[idx].end) ++idx;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (t < segments_[i].end) {
        idx = i;
        break;
      }
    }
  }
  return segments_[idx].form->eval(t);
}

Curve Curve::constant(double c, double t0, double t1) {
  return Curve({Segment{t0, t1, constant_form(c)}});
}

Curve Curve::linear(double c0, double c1, double t0, double t1, double shift) {
  return Curve({Segment{t0, t1, linear_form(c0, c1, shift)}});
}

Curve Curve::scaled(const Curve& ref, double scale, double offset) {
  std::vector<Segment> segs;
  segs.reserve(ref.segments().size());
  for (const auto& s : ref.segments())
    segs.push_back(Segment{s.start, s.end, scaled_form(s.form, scale, offset)});
  return Curve(std::move(segs));
}

Jet eval_curve(const Curve& curve, double t, Side side) { return curve.eval(t, side); }

std::vector<double> Schedule::edges() const {
  std::vector<double> e;
  e.reserve(boundaries.size() + 2);
  e.push_back(t_begin);
  e.insert(e.end(), boundaries.begin(), boundaries.end());
  e.push_back(t_end);
  return e;
}

std::size_t Schedule::stage_of(double t, Side side) const {
  std::size_t s = 0;
  for (double b : boundaries) {
    if (t > b || (side == Side::Right && t == b)) ++s;
  }
  return s;
}

namespace {

std::shared_ptr<const Form> form_from_spec(const SegmentSpec& s) {
  auto need = [&](std::size_t n) {
    if (s.c.size() != n)
      throw CurveError("form '" + s.form + "' expects " + std::to_string(n) + " coefficients");
  };
  if (s.form == "constant") {
    need(1);
    return constant_form(s.c[0]);
  }
  if (s.form == "linear") {
    need(2);
    return linear_form(s.c[0], s.c[1], s.shift);
  }
  if (s.form == "sinusoidal") {
    need(4);
    return sinusoidal_form(s.c[0], s.c[1], s.c[2], s.c[3], s.shift);
  }
  throw CurveError("unknown curve form '" + s.form + "'");
}

void check_domain(const Curve& c, double t0, double t1) {
  if (std::abs(c.start() - t0) > kTileTol || std::abs(c.end() - t1) > kTileTol)
    throw CurveError("curve segments do not tile the schedule domain");
}

}  // namespace

Curve build_curve(const CurveSpec& spec, double t0, double t1,
                  const std::function<const Curve*(const std::string&)>& lookup) {
  if (!spec.ref.empty()) {
    const Curve* ref = lookup ? lookup(spec.ref) : nullptr;
    if (!ref) throw CurveError("unresolved curve reference '" + spec.ref + "'");
    return Curve::scaled(*ref, spec.scale, spec.offset);
  }
  std::vector<Segment> segs;
  segs.reserve(spec.segments.size());
  for (const auto& s : spec.segments) segs.push_back(Segment{s.start, s.end, form_from_spec(s)});
  Curve c(std::move(segs));
  check_domain(c, t0, t1);
  return c;
}

void validate_schedule(const Schedule& s) {
  if (s.N < 2) throw CurveError("schedule needs at least two modes");
  if (s.theta.size() + 1 != static_cast<std::size_t>(s.N))
    throw CurveError("schedule needs N-1 theta curves");
  if (!s.alpha.empty() && !s.has_alpha()) throw CurveError("schedule needs N-1 alpha curves");
  const std::size_t nf = s.phase_f.size();
  if ((s.N == 2 && nf > 1) || (s.N == 3 && nf != 0 && nf != 2) || (s.N > 3 && nf != 0))
    throw CurveError("phase curve count does not match N");
  if (!(s.t_end > s.t_begin)) throw CurveError("empty schedule domain");
  double prev = s.t_begin;
  for (double b : s.boundaries) {
    if (!(b > prev) || !(b < s.t_end))
      throw CurveError("stage boundaries must increase strictly inside the domain");
    prev = b;
  }
  auto check = [&](const std::vector<Curve>& cs) {
    for (const auto& c : cs) check_domain(c, s.t_begin, s.t_end);
  };
  check(s.theta);
  check(s.alpha);
  check(s.phase_f);
}

Schedule make_schedule(int N, const ScheduleSpec& specs, const std::vector<double>& boundaries,
                       double t_end, double t_begin) {
  Schedule s;
  s.N = N;
  s.boundaries = boundaries;
  s.t_begin = t_begin;
  s.t_end = t_end;
  if (specs.theta.size() + 1 != static_cast<std::size_t>(N))
    throw CurveError("schedule needs N-1 theta curves");
  if (!specs.alpha.empty() && specs.alpha.size() + 1 != static_cast<std::size_t>(N))
    throw CurveError("schedule needs N-1 alpha curves");

  std::map<std::string, CurveSpec> pending;
  for (std::size_t k = 0; k < specs.theta.size(); ++k)
    pending["theta" + std::to_string(k + 1)] = specs.theta[k];
  for (std::size_t k = 0; k < specs.alpha.size(); ++k)
    pending["alpha" + std::to_string(k + 1)] = specs.alpha[k];
  if (N == 2 && specs.phase_f.size() == 1) pending["f"] = specs.phase_f[0];
  if (N == 3 && specs.phase_f.size() == 2) {
    pending["f1"] = specs.phase_f[0];
    pending["f"] = specs.phase_f[1];
  }
  if (pending.size() != specs.theta.size() + specs.alpha.size() + specs.phase_f.size())
    throw CurveError("phase curve count does not match N");

  std::map<std::string, Curve> built;
  std::vector<std::string> stack;
  std::function<const Curve*(const std::string&)> resolve = [&](const std::string& name)
      -> const Curve* {
    if (auto it = built.find(name); it != built.end()) return &it->second;
    auto it = pending.find(name);
    if (it == pending.end()) return nullptr;
    if (std::find(stack.begin(), stack.end(), name) != stack.end())
      throw CurveError("cyclic curve reference at '" + name + "'");
    stack.push_back(name);
    Curve c = build_curve(it->second, t_begin, t_end, resolve);
    stack.pop_back();
    return &built.emplace(name, std::move(c)).first->second;
  };
  for (const auto& [name, spec] : pending) resolve(name);

  for (std::size_t k = 0; k < specs.theta.size(); ++k)
    s.theta.push_back(built.at("theta" + std::to_string(k + 1)));
  for (std::size_t k = 0; k < specs.alpha.size(); ++k)
    s.alpha.push_back(built.at("alpha" + std::to_string(k + 1)));
  if (N == 2 && specs.phase_f.size() == 1) s.phase_f.push_back(built.at("f"));
  if (N == 3 && specs.phase_f.size() == 2) {
    s.phase_f.push_back(built.at("f1"));
    s.phase_f.push_back(built.at("f"));
  }
  validate_schedule(s);
  return s;
}

}  // namespace bosenet
