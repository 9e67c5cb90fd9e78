#pragma once

// Min-plus curve algebra over non-decreasing piecewise-linear functions.
//
// Every curve is held in one normal form: a value at the origin, followed by a
// sorted list of linear segments. Segment k covers the half-open interval
// (start_k, start_{k+1}] and `value` is its right limit at start_k, so curves
// are left-continuous away from the origin. The last segment extends to
// +infinity (the "tail"). A curve may additionally be +infinity for every
// t > infinite_after (burst-delay functions).
//
// The closed forms (affine, rate-latency, burst-delay, staircase) are
// factories into this normal form; min, sum and the closures are normalized
// eagerly. `horizon` records where the representation is exact: staircases
// are exact on [0, horizon] and carry a linear envelope beyond it.
//
// Units: time in microseconds, data in bits, rates in bits/us (= Mb/s).

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#ifndef TSNCALC_TOLERANCE
#define TSNCALC_TOLERANCE 1e-9
#endif

namespace tsncalc::minplus {

inline constexpr double kTolerance = TSNCALC_TOLERANCE;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Segment {
  double start = 0.0;
  double value = 0.0;  // right limit at `start`
  double slope = 0.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

// One term height * ceil((t - offset) / period), clamped below at zero.
struct StaircaseTerm {
  double height = 0.0;
  double offset = 0.0;
  double period = 1.0;
};

class Curve {
 public:
  // The zero function.
  Curve();

  static Curve zero() { return Curve(); }
  // b + r*t for t > 0, 0 at t = 0.
  static Curve affine(double burst, double rate);
  // R * max(0, t - T).
  static Curve rate_latency(double rate, double latency);
  // 0 for t <= D, +infinity afterwards.
  static Curve burst_delay(double delay);
  // Sum of staircase terms, exact on [0, horizon]; beyond the horizon the
  // tightest upper line with the long-term rate sum(height / period).
  static Curve staircase(std::span<const StaircaseTerm> terms, double horizon);
  // Raw normal form. Segments must start at 0 and be strictly increasing.
  static Curve piecewise_linear(double origin, std::vector<Segment> segments,
                                double infinite_after = kInfinity,
                                double horizon = kInfinity);

  // Checked evaluation: t must lie in [0, horizon].
  double operator()(double t) const;
  // Evaluation that follows the tail past the horizon.
  double value_at(double t) const;
  double right_limit(double t) const;
  // Slope of the linear piece immediately to the right of t.
  double slope_after(double t) const;

  double origin() const { return origin_; }
  const std::vector<Segment>& segments() const { return segments_; }
  double infinite_after() const { return infinite_after_; }
  double horizon() const { return horizon_; }
  double tail_slope() const;
  bool is_finite() const { return infinite_after_ == kInfinity; }

  // Breakpoints in (0, infinite_after], ascending.
  std::vector<double> breakpoints() const;
  bool is_nondecreasing(double tolerance = 1e-7) const;

  Curve with_horizon(double horizon) const;

  std::string describe() const;

 private:
  void normalize();

  double origin_ = 0.0;
  std::vector<Segment> segments_;
  double infinite_after_ = kInfinity;
  double horizon_ = kInfinity;
};

double evaluate(const Curve& c, double t);

// Pointwise operations. Lists must be non-empty.
Curve min_of(std::span<const Curve> curves);
Curve sum_of(std::span<const Curve> curves);
Curve max_of(std::span<const Curve> curves);
Curve min(const Curve& a, const Curve& b);
Curve max(const Curve& a, const Curve& b);
Curve operator+(const Curve& a, const Curve& b);
Curve operator-(const Curve& a, const Curve& b);
Curve operator*(double k, const Curve& c);
// Adds a constant everywhere, the origin included.
Curve add_constant(const Curve& c, double k);

// [f(t)]^+ = max(f(t), 0).
Curve nonneg_closure(const Curve& f);
// [f(t)]_up^+ = max over 0 <= s <= t of {f(s), 0}.
Curve up_closure(const Curve& f);

// f(t + d), i.e. f deconvolved by the burst-delay function delta_d.
Curve shift_left(const Curve& f, double d);
// f(max(0, t - d)), i.e. a non-decreasing f convolved with delta_d.
Curve shift_right(const Curve& f, double d);

// Replace everything beyond `from` by a linear envelope with long-term rate
// `rate`: the tightest line above the curve on [0, from] (upper) or
// max(f(from), tightest line below the curve on [0, from]) (lower).
Curve upper_linear_tail(const Curve& f, double from, double rate);
Curve lower_linear_tail(const Curve& f, double from, double rate);

// (f (x) g)(t) = inf over 0 <= s <= t of f(t - s) + g(s).
Curve convolve(const Curve& f, const Curve& g);
// (f (/) g)(t) = sup over s >= 0 of f(t + s) - g(s).
// Throws DivergenceError when the supremum is unbounded; `context` is
// included in the message.
Curve deconvolve(const Curve& f, const Curve& g, const std::string& context = {});

struct DeviationValue {
  double value = 0.0;
  double argmax = 0.0;  // witness point s where the supremum is attained
};

struct Deviation {
  double horizontal = 0.0;
  double vertical = 0.0;
  double argmax_t = 0.0;  // witness of the horizontal deviation
};

// Maximum horizontal deviation sup_s inf{tau >= 0 | alpha(s) <= beta(s+tau)}.
// The supremum ranges over s in [0, window]; the default window is the
// arrival curve's horizon. Throws InstabilityError when the long-term rate of
// alpha exceeds that of beta or the bound is infinite.
DeviationValue hdev(const Curve& alpha, const Curve& beta, double window = -1.0,
                    const std::string& context = {});
// Maximum vertical deviation sup_s {alpha(s) - beta(s)}, clamped at 0.
DeviationValue vdev(const Curve& alpha, const Curve& beta, double window = -1.0,
                    const std::string& context = {});
Deviation deviation(const Curve& alpha, const Curve& beta, double window = -1.0,
                    const std::string& context = {});

}  // namespace tsncalc::minplus
