#include "tsncalc/minplus/curve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>

#include "tsncalc/error.hpp"

namespace tsncalc::minplus {

namespace {

double scale_tol(double v) { return kTolerance * std::max(1.0, std::fabs(v)); }

bool near(double a, double b) {
  if (a == b) return true;
  return std::fabs(a - b) <= scale_tol(std::max(std::fabs(a), std::fabs(b)));
}

// Time points closer than this are treated as one breakpoint.
constexpr double kTimeEps = 1e-9;

void sort_unique_times(std::vector<double>& ts) {
  std::sort(ts.begin(), ts.end());
  std::vector<double> out;
  out.reserve(ts.size());
  for (double t : ts) {
    if (out.empty() || t - out.back() > kTimeEps * std::max(1.0, std::fabs(t))) {
      out.push_back(t);
    }
  }
  ts.swap(out);
}

struct Line {
  double value;  // at the interval start
  double slope;
};

}  // namespace

// ---------------------------------------------------------------------------
// Construction

Curve::Curve() : segments_{{0.0, 0.0, 0.0}} {}

Curve Curve::affine(double burst, double rate) {
  if (burst < 0.0 || rate < 0.0) {
    throw ArgumentError("affine curve needs non-negative burst and rate");
  }
  return piecewise_linear(0.0, {{0.0, burst, rate}});
}

Curve Curve::rate_latency(double rate, double latency) {
  if (rate < 0.0 || latency < 0.0) {
    throw ArgumentError("rate-latency curve needs non-negative rate and latency");
  }
  if (latency <= 0.0) return piecewise_linear(0.0, {{0.0, 0.0, rate}});
  return piecewise_linear(0.0, {{0.0, 0.0, 0.0}, {latency, 0.0, rate}});
}

Curve Curve::burst_delay(double delay) {
  if (delay < 0.0) throw ArgumentError("burst-delay function needs delay >= 0");
  return piecewise_linear(0.0, {{0.0, 0.0, 0.0}}, delay);
}

Curve Curve::staircase(std::span<const StaircaseTerm> terms, double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw ArgumentError("staircase curve needs a finite positive horizon");
  }
  struct Jump {
    double at;
    double height;
  };
  std::vector<Jump> jumps;
  double rate = 0.0;
  for (const auto& term : terms) {
    if (!(term.period > 0.0) || term.height < 0.0) {
      throw ArgumentError("staircase term needs period > 0 and height >= 0");
    }
    if (term.height == 0.0) continue;
    // Negative offsets within rounding noise are clamped to zero.
    double offset = term.offset;
    if (offset < 0.0) {
      if (offset < -1e-6) throw ArgumentError("staircase term offset must be >= 0");
      offset = 0.0;
    }
    rate += term.height / term.period;
    for (double at = offset; at <= horizon + kTimeEps; at += term.period) {
      jumps.push_back({at, term.height});
    }
  }
  std::sort(jumps.begin(), jumps.end(),
            [](const Jump& a, const Jump& b) { return a.at < b.at; });

  std::vector<Segment> segs{{0.0, 0.0, 0.0}};
  for (const auto& j : jumps) {
    if (j.at <= kTimeEps) {
      segs.front().value += j.height;
    } else if (j.at - segs.back().start <= kTimeEps) {
      segs.back().value += j.height;
    } else {
      segs.push_back({j.at, segs.back().value + j.height, 0.0});
    }
  }
  Curve exact = piecewise_linear(0.0, std::move(segs));
  return upper_linear_tail(exact, horizon, rate);
}

Curve Curve::piecewise_linear(double origin, std::vector<Segment> segments,
                              double infinite_after, double horizon) {
  if (segments.empty() || std::fabs(segments.front().start) > kTimeEps) {
    throw ArgumentError("piecewise-linear curve must have a segment starting at 0");
  }
  segments.front().start = 0.0;
  for (std::size_t k = 1; k < segments.size(); ++k) {
    if (!(segments[k].start > segments[k - 1].start)) {
      throw ArgumentError("piecewise-linear segment starts must be increasing");
    }
  }
  Curve c;
  c.origin_ = origin;
  c.segments_ = std::move(segments);
  c.infinite_after_ = infinite_after < 0.0 ? 0.0 : infinite_after;
  c.horizon_ = horizon;
  c.normalize();
  return c;
}

void Curve::normalize() {
  std::vector<Segment> out;
  out.reserve(segments_.size());
  for (const auto& s : segments_) {
    if (!out.empty() && s.start >= infinite_after_) break;
    if (!out.empty()) {
      Segment& prev = out.back();
      if (s.start - prev.start <= kTimeEps * std::max(1.0, s.start)) {
        // Zero-length predecessor: the later definition wins.
        prev.value = s.value;
        prev.slope = s.slope;
        continue;
      }
      double end = prev.value + prev.slope * (s.start - prev.start);
      if (near(end, s.value) && near(prev.slope, s.slope)) continue;
    }
    out.push_back(s);
  }
  segments_ = std::move(out);
}

// ---------------------------------------------------------------------------
// Evaluation

double Curve::value_at(double t) const {
  if (t < 0.0) {
    if (t < -kTimeEps) throw ArgumentError("curve evaluated at negative time");
    t = 0.0;
  }
  if (t == 0.0) return origin_;
  // A point within kTimeEps of a breakpoint is read as the breakpoint itself,
  // so rounding in shifted breakpoints does not flip a jump.
  const double eps = kTimeEps * std::max(1.0, t);
  if (t > infinite_after_ + eps) return kInfinity;
  // Last segment with start < t.
  auto it = std::lower_bound(segments_.begin() + 1, segments_.end(), t - eps,
                             [](const Segment& s, double v) { return s.start < v; });
  const Segment& s = *(it - 1);
  return s.value + s.slope * (t - s.start);
}

double Curve::right_limit(double t) const {
  if (t < 0.0) t = 0.0;
  const double eps = kTimeEps * std::max(1.0, t);
  if (t >= infinite_after_ - eps) return kInfinity;
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t + eps,
                             [](double v, const Segment& s) { return v < s.start; });
  const Segment& s = *(it - 1);
  return s.value + s.slope * (t - s.start);
}

double Curve::slope_after(double t) const {
  if (t < 0.0) t = 0.0;
  const double eps = kTimeEps * std::max(1.0, t);
  if (t >= infinite_after_ - eps) return kInfinity;
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t + eps,
                             [](double v, const Segment& s) { return v < s.start; });
  return (it - 1)->slope;
}

double Curve::operator()(double t) const {
  if (t > horizon_ + kTimeEps * std::max(1.0, horizon_)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "curve evaluated at t=%.6f beyond its horizon %.6f", t,
                  horizon_);
    throw HorizonError(buf);
  }
  return value_at(t);
}

double evaluate(const Curve& c, double t) { return c(t); }

double Curve::tail_slope() const {
  if (!is_finite()) return kInfinity;
  return segments_.back().slope;
}

std::vector<double> Curve::breakpoints() const {
  std::vector<double> out;
  for (std::size_t k = 1; k < segments_.size(); ++k) out.push_back(segments_[k].start);
  if (!is_finite()) out.push_back(infinite_after_);
  return out;
}

bool Curve::is_nondecreasing(double tolerance) const {
  auto tol = [&](double v) { return tolerance * std::max(1.0, std::fabs(v)); };
  if (segments_.front().value < origin_ - tol(origin_)) return false;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const auto& s = segments_[k];
    if (s.slope < -tolerance) return false;
    if (k + 1 < segments_.size()) {
      double end = s.value + s.slope * (segments_[k + 1].start - s.start);
      if (segments_[k + 1].value < end - tol(end)) return false;
    }
  }
  return true;
}

Curve Curve::with_horizon(double horizon) const {
  Curve c = *this;
  c.horizon_ = horizon;
  return c;
}

std::string Curve::describe() const {
  std::ostringstream os;
  os << "origin=" << origin_;
  for (const auto& s : segments_) {
    os << " [" << s.start << ": " << s.value << " +" << s.slope << "t]";
  }
  if (!is_finite()) os << " inf>" << infinite_after_;
  os << " horizon=" << horizon_;
  return os.str();
}

// ---------------------------------------------------------------------------
// Pointwise operations

namespace {

enum class Op { Sum, Min, Max };

// Pushes the combination of two lines over [start, end) into `out`, splitting
// at the crossing point for min and max.
void push_combined(std::vector<Segment>& out, double start, double end, const Line* a,
                   const Line* b, Op op) {
  if (!a && !b) return;
  if (!a || !b) {
    const Line* l = a ? a : b;
    out.push_back({start, l->value, l->slope});
    return;
  }
  if (op == Op::Sum) {
    out.push_back({start, a->value + b->value, a->slope + b->slope});
    return;
  }
  const bool take_min = op == Op::Min;
  auto pick = [&](const Line& x, const Line& y, bool at_start) -> const Line& {
    // At the start compare values, ties broken by slope in the direction of
    // the operation.
    if (!near(x.value, y.value)) {
      return ((x.value < y.value) == take_min) ? x : y;
    }
    (void)at_start;
    return ((x.slope < y.slope) == take_min) ? x : y;
  };
  const Line& first = pick(*a, *b, true);
  const Line& other = (&first == a) ? *b : *a;
  out.push_back({start, take_min ? std::min(a->value, b->value) : std::max(a->value, b->value),
                 first.slope});
  double ds = first.slope - other.slope;
  if (near(first.slope, other.slope) || ds == 0.0) return;
  // first leads at start; the other line overtakes when the gap closes.
  double gap = other.value - first.value;  // >= 0 for min, <= 0 for max
  double cross = start + gap / ds;
  bool overtakes = take_min ? (ds > 0.0) : (ds < 0.0);
  if (!overtakes) return;
  if (cross > start + kTimeEps * std::max(1.0, start) &&
      (!std::isfinite(end) || cross < end - kTimeEps * std::max(1.0, end))) {
    double v = first.value + first.slope * (cross - start);
    out.push_back({cross, v, other.slope});
  }
}

Curve combine(const Curve& a, const Curve& b, Op op) {
  std::vector<double> ts{0.0};
  for (const auto& s : a.segments()) ts.push_back(s.start);
  for (const auto& s : b.segments()) ts.push_back(s.start);
  if (!a.is_finite()) ts.push_back(a.infinite_after());
  if (!b.is_finite()) ts.push_back(b.infinite_after());
  sort_unique_times(ts);

  double inf_after = (op == Op::Min) ? std::max(a.infinite_after(), b.infinite_after())
                                     : std::min(a.infinite_after(), b.infinite_after());
  std::vector<Segment> segs;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    double t = ts[k];
    if (k > 0 && t >= inf_after) break;
    double end = (k + 1 < ts.size()) ? ts[k + 1] : kInfinity;
    std::optional<Line> la, lb;
    if (t < a.infinite_after()) la = Line{a.right_limit(t), a.slope_after(t)};
    if (t < b.infinite_after()) lb = Line{b.right_limit(t), b.slope_after(t)};
    push_combined(segs, t, end, la ? &*la : nullptr, lb ? &*lb : nullptr, op);
    if (segs.empty()) segs.push_back({0.0, 0.0, 0.0});
  }
  double origin = 0.0;
  switch (op) {
    case Op::Sum: origin = a.origin() + b.origin(); break;
    case Op::Min: origin = std::min(a.origin(), b.origin()); break;
    case Op::Max: origin = std::max(a.origin(), b.origin()); break;
  }
  return Curve::piecewise_linear(origin, std::move(segs), inf_after,
                                 std::min(a.horizon(), b.horizon()));
}

Curve fold(std::span<const Curve> curves, Op op, const char* name) {
  if (curves.empty()) {
    throw ArgumentError(std::string(name) + " needs a non-empty list of curves");
  }
  Curve acc = curves.front();
  for (std::size_t i = 1; i < curves.size(); ++i) acc = combine(acc, curves[i], op);
  return acc;
}

}  // namespace

Curve min_of(std::span<const Curve> curves) { return fold(curves, Op::Min, "min_of"); }
Curve sum_of(std::span<const Curve> curves) { return fold(curves, Op::Sum, "sum_of"); }
Curve max_of(std::span<const Curve> curves) { return fold(curves, Op::Max, "max_of"); }
Curve min(const Curve& a, const Curve& b) { return combine(a, b, Op::Min); }
Curve max(const Curve& a, const Curve& b) { return combine(a, b, Op::Max); }
Curve operator+(const Curve& a, const Curve& b) { return combine(a, b, Op::Sum); }

Curve operator*(double k, const Curve& c) {
  if (!c.is_finite() && k <= 0.0) {
    throw ArgumentError("cannot scale an infinite curve by a non-positive factor");
  }
  std::vector<Segment> segs = c.segments();
  for (auto& s : segs) {
    s.value *= k;
    s.slope *= k;
  }
  return Curve::piecewise_linear(k * c.origin(), std::move(segs), c.infinite_after(),
                                 c.horizon());
}

Curve operator-(const Curve& a, const Curve& b) {
  if (!b.is_finite()) throw ArgumentError("cannot subtract an infinite curve");
  return a + (-1.0) * b;
}

Curve add_constant(const Curve& c, double k) {
  std::vector<Segment> segs = c.segments();
  for (auto& s : segs) s.value += k;
  return Curve::piecewise_linear(c.origin() + k, std::move(segs), c.infinite_after(),
                                 c.horizon());
}

Curve nonneg_closure(const Curve& f) { return max(f, Curve::zero().with_horizon(f.horizon())); }

Curve up_closure(const Curve& f) {
  double running = std::max(0.0, f.origin());
  const double origin = running;
  const auto& in = f.segments();
  std::vector<Segment> out;
  for (std::size_t k = 0; k < in.size(); ++k) {
    const Segment& s = in[k];
    double end = (k + 1 < in.size()) ? in[k + 1].start : kInfinity;
    end = std::min(end, f.infinite_after());
    if (s.slope > 0.0) {
      if (s.value >= running) {
        out.push_back(s);
      } else {
        double cross = s.start + (running - s.value) / s.slope;
        if (!(cross > s.start)) {
          out.push_back({s.start, running, s.slope});  // gap lost to rounding
        } else {
          out.push_back({s.start, running, 0.0});
          if (cross < end) out.push_back({cross, running, s.slope});
        }
      }
      if (std::isfinite(end)) running = std::max(running, s.value + s.slope * (end - s.start));
    } else {
      // The supremum over a non-increasing piece is its right limit at start.
      running = std::max(running, s.value);
      out.push_back({s.start, running, 0.0});
    }
  }
  return Curve::piecewise_linear(origin, std::move(out), f.infinite_after(), f.horizon());
}

Curve shift_left(const Curve& f, double d) {
  if (d < 0.0) throw ArgumentError("shift_left needs d >= 0");
  if (d == 0.0) return f;
  if (d > f.infinite_after()) {
    throw DivergenceError("deconvolution by a burst-delay longer than the curve's finite range");
  }
  double origin = f.value_at(d);
  std::vector<Segment> segs;
  segs.push_back({0.0, f.right_limit(d), f.slope_after(d)});
  for (const auto& s : f.segments()) {
    if (s.start > d + kTimeEps * std::max(1.0, d)) segs.push_back({s.start - d, s.value, s.slope});
  }
  double inf_after = f.is_finite() ? kInfinity : f.infinite_after() - d;
  double horizon = std::isfinite(f.horizon()) ? std::max(0.0, f.horizon() - d) : kInfinity;
  return Curve::piecewise_linear(origin, std::move(segs), inf_after, horizon);
}

Curve shift_right(const Curve& f, double d) {
  if (d < 0.0) throw ArgumentError("shift_right needs d >= 0");
  if (d == 0.0) return f;
  std::vector<Segment> segs{{0.0, f.origin(), 0.0}};
  for (const auto& s : f.segments()) segs.push_back({s.start + d, s.value, s.slope});
  double inf_after = f.is_finite() ? kInfinity : f.infinite_after() + d;
  return Curve::piecewise_linear(f.origin(), std::move(segs), inf_after, f.horizon() + d);
}

namespace {

// Candidate points of a left-continuous curve on [0, from]: every breakpoint
// contributes its value and right limit.
template <typename Fn>
void for_each_limit(const Curve& f, double from, Fn&& fn) {
  fn(0.0, f.origin());
  fn(0.0, f.right_limit(0.0));
  for (const auto& s : f.segments()) {
    if (s.start > from) break;
    if (s.start > 0.0) fn(s.start, f.value_at(s.start));
    if (s.start < from) fn(s.start, s.value);
  }
  fn(from, f.value_at(from));
}

}  // namespace

Curve upper_linear_tail(const Curve& f, double from, double rate) {
  if (!f.is_finite()) throw ArgumentError("linear tail needs a finite curve");
  double offset = -kInfinity;
  for_each_limit(f, from, [&](double t, double v) { offset = std::max(offset, v - rate * t); });
  offset = std::max(offset, f.right_limit(from) - rate * from);
  std::vector<Segment> segs;
  for (const auto& s : f.segments()) {
    if (s.start >= from) break;
    segs.push_back(s);
  }
  if (segs.empty()) segs.push_back({0.0, f.right_limit(0.0), f.slope_after(0.0)});
  double tail_value = std::max(rate * from + offset, f.right_limit(from));
  if (from > 0.0) segs.push_back({from, tail_value, rate});
  else segs = {{0.0, tail_value, rate}};
  return Curve::piecewise_linear(f.origin(), std::move(segs), kInfinity,
                                 std::min(f.horizon(), from));
}

Curve lower_linear_tail(const Curve& f, double from, double rate) {
  if (!f.is_finite()) throw ArgumentError("linear tail needs a finite curve");
  double offset = -kInfinity;
  for_each_limit(f, from, [&](double t, double v) { offset = std::max(offset, rate * t - v); });
  std::vector<Segment> segs;
  for (const auto& s : f.segments()) {
    if (s.start >= from) break;
    segs.push_back(s);
  }
  double at_from = f.value_at(from);
  if (rate > 0.0) {
    double catch_up = (at_from + offset) / rate;
    if (catch_up > from + kTimeEps) {
      segs.push_back({from, at_from, 0.0});
      segs.push_back({catch_up, at_from, rate});
    } else {
      segs.push_back({from, at_from, rate});
    }
  } else {
    segs.push_back({from, at_from, 0.0});
  }
  if (segs.front().start > 0.0) segs.insert(segs.begin(), {0.0, f.right_limit(0.0), 0.0});
  return Curve::piecewise_linear(f.origin(), std::move(segs), kInfinity,
                                 std::min(f.horizon(), from));
}

// ---------------------------------------------------------------------------
// Convolution and deconvolution

namespace {

// A closed linear piece on [lo, hi]; hi may be +infinity.
struct Piece {
  double lo;
  double hi;
  double value;  // at lo
  double slope;
  double at(double t) const { return value + slope * (t - lo); }
};

std::vector<Piece> pieces_of(const Curve& f, bool with_origin) {
  std::vector<Piece> out;
  if (with_origin) out.push_back({0.0, 0.0, f.origin(), 0.0});
  const auto& segs = f.segments();
  for (std::size_t k = 0; k < segs.size(); ++k) {
    double lo = segs[k].start;
    double hi = (k + 1 < segs.size()) ? segs[k + 1].start : kInfinity;
    hi = std::min(hi, f.infinite_after());
    if (lo > hi) continue;
    out.push_back({lo, hi, segs[k].value, segs[k].slope});
  }
  return out;
}

// Lower envelope of closed linear pieces over [0, end); returns segments in
// normal form. `sign` = -1 computes the upper envelope instead.
std::vector<Segment> envelope(std::vector<Piece> pieces, double sign) {
  if (sign < 0.0) {
    for (auto& p : pieces) {
      p.value = -p.value;
      p.slope = -p.slope;
    }
  }
  std::vector<double> ts{0.0};
  double end = 0.0;
  for (const auto& p : pieces) {
    ts.push_back(p.lo);
    if (std::isfinite(p.hi)) ts.push_back(p.hi);
    end = std::max(end, p.hi);
  }
  sort_unique_times(ts);
  std::sort(pieces.begin(), pieces.end(),
            [](const Piece& a, const Piece& b) { return a.lo < b.lo; });

  std::vector<Segment> out;
  std::vector<const Piece*> active;
  std::size_t next = 0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    double x0 = ts[k];
    if (x0 >= end && k > 0) break;
    double x1 = (k + 1 < ts.size()) ? ts[k + 1] : kInfinity;
    double eps = kTimeEps * std::max(1.0, std::fabs(x0));
    while (next < pieces.size() && pieces[next].lo <= x0 + eps) active.push_back(&pieces[next++]);
    std::erase_if(active, [&](const Piece* p) { return p->hi < x1 - kTimeEps * std::max(1.0, std::fabs(x1 == kInfinity ? 0.0 : x1)); });
    if (active.empty()) continue;

    // Walk the lower envelope of the active lines across [x0, x1).
    double x = x0;
    const Piece* cur = nullptr;
    for (const Piece* p : active) {
      if (!cur) {
        cur = p;
        continue;
      }
      double vp = p->at(x), vc = cur->at(x);
      if (vp < vc - scale_tol(vc) || (near(vp, vc) && p->slope < cur->slope)) cur = p;
    }
    out.push_back({x, cur->at(x), cur->slope});
    while (true) {
      const Piece* best = nullptr;
      double best_x = x1;
      for (const Piece* p : active) {
        if (p == cur || !(p->slope < cur->slope)) continue;
        double gap = p->at(x) - cur->at(x);
        double cx = x + gap / (cur->slope - p->slope);
        if (cx <= x + kTimeEps * std::max(1.0, x)) cx = x;  // already tied
        if (cx < best_x || (cx == best_x && best && p->slope < best->slope)) {
          best_x = cx;
          best = p;
        }
      }
      if (!best || !(best_x < x1)) break;
      if (best_x > x) out.push_back({best_x, cur->at(best_x), best->slope});
      else out.back().slope = best->slope;
      x = best_x;
      cur = best;
    }
  }
  if (out.empty()) out.push_back({0.0, 0.0, 0.0});
  if (sign < 0.0) {
    for (auto& s : out) {
      s.value = -s.value;
      s.slope = -s.slope;
    }
  }
  // Merge duplicates produced at identical starts.
  std::vector<Segment> merged;
  for (const auto& s : out) {
    if (!merged.empty() && s.start - merged.back().start <= kTimeEps * std::max(1.0, s.start)) {
      merged.back() = {merged.back().start, s.value, s.slope};
    } else {
      merged.push_back(s);
    }
  }
  return merged;
}

void convolve_pair(const Piece& a, const Piece& b, std::vector<Piece>& out) {
  double lo = a.lo + b.lo;
  double value = a.value + b.value;
  bool a_point = a.hi == a.lo, b_point = b.hi == b.lo;
  if (a_point && b_point) {
    out.push_back({lo, lo, value, 0.0});
    return;
  }
  if (a_point || b_point) {
    const Piece& line = a_point ? b : a;
    out.push_back({lo, lo + (line.hi - line.lo), value, line.slope});
    return;
  }
  const Piece& first = (a.slope <= b.slope) ? a : b;
  const Piece& second = (&first == &a) ? b : a;
  double len1 = first.hi - first.lo;
  out.push_back({lo, lo + len1, value, first.slope});
  if (std::isfinite(len1)) {
    double mid = lo + len1;
    out.push_back({mid, mid + (second.hi - second.lo), value + first.slope * len1, second.slope});
  }
}

// A linear piece given by a reference point, clipped to [max(lo, 0), hi].
void push_clipped(std::vector<Piece>& out, double lo, double hi, double x_ref, double y_ref,
                  double slope) {
  if (hi < 0.0) return;
  double clo = std::max(lo, 0.0);
  if (clo > hi) return;
  out.push_back({clo, hi, y_ref + slope * (clo - x_ref), slope});
}

void deconvolve_pair(const Piece& fp, const Piece& gp, std::vector<Piece>& out,
                     const std::string& context) {
  const double a = fp.lo, b = fp.hi, yf = fp.value, p = fp.slope;
  const double c = gp.lo, d = gp.hi, yg = gp.value, q = (gp.hi == gp.lo) ? 0.0 : gp.slope;
  auto F = [&](double u) { return yf + p * (u - a); };
  auto G = [&](double s) { return yg + q * (s - c); };
  const bool b_inf = !std::isfinite(b), d_inf = !std::isfinite(d);
  if (p > q + kTolerance * std::max(1.0, std::fabs(q))) {
    if (b_inf && d_inf) {
      throw DivergenceError("deconvolution is unbounded: arrival rate " + std::to_string(p) +
                            " exceeds service rate " + std::to_string(q) +
                            (context.empty() ? "" : " at " + context));
    }
  }
  if (p >= q) {
    if (!b_inf && !d_inf) {
      push_clipped(out, a - d, b - d, a - d, yf - G(d), p);
      push_clipped(out, b - d, b - c, b - d, F(b) - G(d), q);
    } else if (b_inf && !d_inf) {
      push_clipped(out, a - d, kInfinity, a - d, yf - G(d), p);
    } else if (!b_inf && d_inf) {
      // s* = b - t for t <= b - c.
      push_clipped(out, -kInfinity, b - c, b - c, F(b) - yg, q);
    } else {
      // Equal tail slopes: the objective does not depend on s.
      push_clipped(out, -kInfinity, kInfinity, a - c, yf - yg, p);
    }
  } else {
    // s* = c for t >= a - c, s* = a - t before.
    push_clipped(out, a - c, b_inf ? kInfinity : b - c, a - c, yf - yg, p);
    push_clipped(out, d_inf ? -kInfinity : a - d, a - c, a - c, yf - yg, q);
  }
}

}  // namespace

Curve convolve(const Curve& f, const Curve& g) {
  // Fast paths for the burst-delay identity and shift.
  auto is_burst_delay = [](const Curve& c) {
    return !c.is_finite() && c.segments().size() == 1 && c.origin() == 0.0 &&
           c.segments()[0].value == 0.0 && c.segments()[0].slope == 0.0;
  };
  if (is_burst_delay(g) && f.is_nondecreasing()) return shift_right(f, g.infinite_after());
  if (is_burst_delay(f) && g.is_nondecreasing()) return shift_right(g, f.infinite_after());

  auto fp = pieces_of(f, true);
  auto gp = pieces_of(g, true);
  std::vector<Piece> pieces;
  pieces.reserve(fp.size() * gp.size() * 2);
  for (const auto& a : fp)
    for (const auto& b : gp) convolve_pair(a, b, pieces);
  auto segs = envelope(std::move(pieces), 1.0);
  double inf_after = f.infinite_after() + g.infinite_after();
  return Curve::piecewise_linear(f.origin() + g.origin(), std::move(segs), inf_after,
                                 std::min(f.horizon(), g.horizon()));
}

Curve deconvolve(const Curve& f, const Curve& g, const std::string& context) {
  auto suffix = [&] { return context.empty() ? std::string() : " at " + context; };
  const double G = g.infinite_after();
  // Burst-delay: a pure shift.
  if (!g.is_finite() && g.segments().size() == 1 && g.origin() == 0.0 &&
      g.segments()[0].value == 0.0 && g.segments()[0].slope == 0.0) {
    return shift_left(f, G);
  }
  double inf_after = kInfinity;
  if (!f.is_finite()) {
    if (g.is_finite() || f.infinite_after() - G < 0.0) {
      throw DivergenceError("deconvolution of a curve with an infinite segment is unbounded" +
                            suffix());
    }
    inf_after = f.infinite_after() - G;
  }
  if (g.is_finite() && f.tail_slope() > g.tail_slope() + kTolerance) {
    throw DivergenceError("deconvolution is unbounded: long-term rate " +
                          std::to_string(f.tail_slope()) + " exceeds " +
                          std::to_string(g.tail_slope()) + suffix());
  }

  auto fp = pieces_of(f, false);
  auto gp = pieces_of(g, true);
  std::vector<Piece> pieces;
  for (const auto& a : fp)
    for (const auto& b : gp) deconvolve_pair(a, b, pieces, context);
  auto segs = envelope(std::move(pieces), -1.0);

  // Value at the origin: sup over s in [0, G] of f(s) - g(s).
  std::vector<double> ts{0.0};
  for (double t : f.breakpoints()) ts.push_back(t);
  for (double t : g.breakpoints()) ts.push_back(t);
  sort_unique_times(ts);
  double origin = -kInfinity;
  for (double s : ts) {
    if (s > G) break;
    double gv = g.value_at(s);
    if (std::isfinite(gv)) origin = std::max(origin, f.value_at(s) - gv);
    if (s < G) {
      double gr = g.right_limit(s);
      if (std::isfinite(gr)) origin = std::max(origin, f.right_limit(s) - gr);
    }
  }
  double horizon = std::min(f.horizon() - (std::isfinite(G) ? G : 0.0), g.horizon());
  return Curve::piecewise_linear(origin, std::move(segs), inf_after, std::max(0.0, horizon));
}

// ---------------------------------------------------------------------------
// Deviations

namespace {

// Generalized inverses of a non-decreasing curve.
class Inverse {
 public:
  explicit Inverse(const Curve& c) : c_(c) {
    const auto& segs = c.segments();
    ends_.reserve(segs.size());
    for (std::size_t k = 0; k < segs.size(); ++k) {
      double hi = (k + 1 < segs.size()) ? segs[k + 1].start : kInfinity;
      hi = std::min(hi, c.infinite_after());
      double e = std::isfinite(hi) ? segs[k].value + segs[k].slope * (hi - segs[k].start)
                                   : (segs[k].slope > 0.0 ? kInfinity : segs[k].value);
      // Guard monotonicity for the binary search.
      if (!ends_.empty()) e = std::max(e, ends_.back());
      ends_.push_back(e);
    }
  }

  // inf{u >= 0 : c(u) >= y}
  double lower(double y) const {
    if (c_.origin() >= y - scale_tol(y)) return 0.0;
    return search(y, false);
  }
  // inf{u >= 0 : c(u) > y}
  double upper(double y) const {
    if (c_.origin() > y + scale_tol(y)) return 0.0;
    return search(y, true);
  }

 private:
  double search(double y, bool strict) const {
    if (!std::isfinite(y)) return c_.infinite_after();
    double tol = scale_tol(y);
    auto it = strict ? std::upper_bound(ends_.begin(), ends_.end(), y + tol)
                     : std::lower_bound(ends_.begin(), ends_.end(), y - tol);
    if (it == ends_.end()) return c_.infinite_after();
    const Segment& s = c_.segments()[static_cast<std::size_t>(it - ends_.begin())];
    bool reached = strict ? (s.value > y + tol) : (s.value >= y - tol);
    if (reached || s.slope <= 0.0) return s.start;
    return s.start + (y - s.value) / s.slope;
  }

  const Curve& c_;
  std::vector<double> ends_;
};

double default_window(const Curve& alpha, double window) {
  return window < 0.0 ? alpha.horizon() : window;
}

std::string where(const std::string& context) {
  return context.empty() ? std::string() : " at " + context;
}

void check_rates(const Curve& alpha, const Curve& beta, const std::string& context) {
  if (!alpha.is_finite() || !beta.is_finite()) return;
  double ra = alpha.tail_slope(), rb = beta.tail_slope();
  if (ra > rb + kTolerance * std::max(1.0, std::fabs(rb))) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "unstable: long-term arrival rate %.6f exceeds service rate %.6f",
                  ra, rb);
    throw InstabilityError(buf + where(context));
  }
}

}  // namespace

DeviationValue hdev(const Curve& alpha, const Curve& beta, double window,
                    const std::string& context) {
  check_rates(alpha, beta, context);
  const double W = default_window(alpha, window);
  Inverse beta_inv(beta);
  Inverse alpha_inv(alpha);

  std::vector<double> cand{0.0};
  for (double t : alpha.breakpoints()) cand.push_back(t);
  auto add_level = [&](double v) {
    if (!std::isfinite(v)) return;
    cand.push_back(alpha_inv.lower(v));
    cand.push_back(alpha_inv.upper(v));
  };
  add_level(beta.origin());
  for (const auto& s : beta.segments()) {
    add_level(s.value);
    if (s.start > 0.0) add_level(beta.value_at(s.start));
  }
  if (!beta.is_finite()) add_level(beta.value_at(beta.infinite_after()));
  if (std::isfinite(W)) cand.push_back(W);
  sort_unique_times(cand);

  DeviationValue best{0.0, 0.0};
  auto consider = [&](double tau, double s) {
    if (tau > best.value) best = {tau, s};
  };
  for (double s : cand) {
    if (!std::isfinite(s) || s > W) continue;
    consider(beta_inv.lower(alpha.value_at(s)) - s, s);
    if (s < W) {
      double y = alpha.right_limit(s);
      double p = alpha.slope_after(s);
      consider((p > kTolerance ? beta_inv.upper(y) : beta_inv.lower(y)) - s, s);
    }
  }
  if (!std::isfinite(best.value)) {
    throw InstabilityError("unbounded delay: service never catches up with arrivals" +
                           where(context));
  }
  return best;
}

DeviationValue vdev(const Curve& alpha, const Curve& beta, double window,
                    const std::string& context) {
  check_rates(alpha, beta, context);
  const double W = default_window(alpha, window);
  std::vector<double> cand{0.0};
  for (double t : alpha.breakpoints()) cand.push_back(t);
  for (double t : beta.breakpoints()) cand.push_back(t);
  if (std::isfinite(W)) cand.push_back(W);
  sort_unique_times(cand);

  DeviationValue best{0.0, 0.0};
  auto consider = [&](double a, double b, double s) {
    if (!std::isfinite(b)) return;
    if (!std::isfinite(a)) {
      throw InstabilityError("unbounded backlog: arrivals are infinite where service is finite" +
                             where(context));
    }
    if (a - b > best.value) best = {a - b, s};
  };
  for (double s : cand) {
    if (s > W) break;
    consider(alpha.value_at(s), beta.value_at(s), s);
    if (s < W) consider(alpha.right_limit(s), beta.right_limit(s), s);
  }
  return best;
}

Deviation deviation(const Curve& alpha, const Curve& beta, double window,
                    const std::string& context) {
  auto h = hdev(alpha, beta, window, context);
  auto v = vdev(alpha, beta, window, context);
  return {h.value, v.value, h.argmax};
}

}  // namespace tsncalc::minplus
