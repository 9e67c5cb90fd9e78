#pragma once

// Brute-force reference implementations. They evaluate the curve atoms from
// their textbook definitions and never touch the library's normal form, so a
// mismatch points at the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "tsncalc/minplus/curve.hpp"

namespace oracle {

using tsncalc::minplus::Curve;
using tsncalc::minplus::StaircaseTerm;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Atom {
  enum Kind { Affine, RateLatency, BurstDelay, Staircase } kind = Affine;
  double p = 0.0;  // burst / rate / delay
  double q = 0.0;  // rate / latency
  std::vector<StaircaseTerm> terms;

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    switch (kind) {
      case Affine: return p + q * t;
      case RateLatency: return t > q ? p * (t - q) : 0.0;
      case BurstDelay: return t > p ? kInf : 0.0;
      case Staircase: {
        double sum = 0.0;
        // The slack keeps a jump that lands on a lattice point at that point
        // despite rounding in (t - offset) / period.
        for (const auto& s : terms)
          sum += s.height * std::max(0.0, std::ceil((t - s.offset) / s.period - 1e-11));
        return sum;
      }
    }
    return 0.0;
  }

  Curve curve(double horizon) const {
    switch (kind) {
      case Affine: return Curve::affine(p, q);
      case RateLatency: return Curve::rate_latency(p, q);
      case BurstDelay: return Curve::burst_delay(p);
      case Staircase: return Curve::staircase(terms, horizon);
    }
    return Curve::zero();
  }

  double rate() const {
    switch (kind) {
      case Affine: return q;
      case RateLatency: return p;
      case BurstDelay: return kInf;
      case Staircase: {
        double r = 0.0;
        for (const auto& s : terms) r += s.height / s.period;
        return r;
      }
    }
    return 0.0;
  }

  // f(t) <= burst_above() + rate() * t
  double burst_above() const {
    if (kind == Affine) return p;
    if (kind == Staircase) {
      double b = 0.0;
      for (const auto& s : terms) b += s.height;
      return b;
    }
    return 0.0;
  }

  // f(t) >= rate() * t - offset_below()
  double offset_below() const {
    if (kind == RateLatency) return p * q;
    if (kind == Staircase) {
      double c = 0.0;
      for (const auto& s : terms) c += s.height * s.offset / s.period;
      return c;
    }
    return 0.0;
  }
};

// Sample points k*step on [0, end], each with a nudge to either side so that
// left and right limits at jumps are both seen.
inline std::vector<double> grid(double end, double step) {
  std::vector<double> pts;
  long n = std::lround(end / step);
  for (long k = 0; k <= n; ++k) {
    double t = static_cast<double>(k) * step;
    pts.push_back(t);
    if (t > 0.0) pts.push_back(t - 1e-7);
    if (k < n) pts.push_back(t + 1e-7);
  }
  return pts;
}

inline double conv(const Atom& f, const Atom& g, double t, double step) {
  double best = kInf;
  // Breakpoints of g(s) sit on the lattice, those of f(t - s) on t - lattice.
  for (double s : grid(t, step)) {
    if (s > t) continue;
    best = std::min(best, f(t - s) + g(s));
    best = std::min(best, f(s) + g(t - s));
  }
  best = std::min(best, f(t) + g(0.0));
  best = std::min(best, f(0.0) + g(t));
  return best;
}

inline double deconv(const Atom& f, const Atom& g, double t, double step, double s_max) {
  double best = -kInf;
  double shift = std::ceil(t / step) * step - t;
  for (double s : grid(s_max, step)) {
    for (double u : {s, s + shift}) {
      double gv = g(u);
      if (std::isfinite(gv)) best = std::max(best, f(t + u) - gv);
    }
  }
  return best;
}

// inf{u >= 0 : beta(s + u) >= y}, by bisection.
inline double wait(const Atom& beta, double s, double y) {
  if (beta(s) >= y) return 0.0;
  double lo = s, hi = s + 1.0;
  while (beta(hi) < y) {
    hi = s + 2.0 * (hi - s);
    if (hi > 1e9) return kInf;
  }
  for (int i = 0; i < 100 && hi - lo > 1e-9; ++i) {
    double mid = 0.5 * (lo + hi);
    (beta(mid) >= y ? hi : lo) = mid;
  }
  return hi - s;
}

inline double hdev(const Atom& alpha, const Atom& beta, double window, double step) {
  double best = 0.0;
  for (double s : grid(window, step)) best = std::max(best, wait(beta, s, alpha(s)));
  return best;
}

inline double vdev(const Atom& alpha, const Atom& beta, double window, double step) {
  double best = 0.0;
  for (double s : grid(window, step)) {
    double b = beta(s);
    if (std::isfinite(b)) best = std::max(best, alpha(s) - b);
  }
  return best;
}

// Random atoms on a 0.1 us lattice. Periods divide 100 us so the hyperperiod
// is at most 100 us.
class AtomSource {
 public:
  explicit AtomSource(unsigned seed) : rng_(seed) {}

  double tenths(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_) / 10.0; }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  Atom affine(double max_rate) {
    return {Atom::Affine, std::round(uniform(0.0, 5000.0)), std::round(uniform(0.0, max_rate) * 10) / 10, {}};
  }
  Atom rate_latency(double min_rate) {
    return {Atom::RateLatency, std::round(uniform(min_rate, min_rate + 100.0) * 10) / 10,
            tenths(0, 500), {}};
  }
  Atom burst_delay() { return {Atom::BurstDelay, tenths(0, 500), 0.0, {}}; }
  Atom staircase(double max_rate) {
    static constexpr double kPeriods[] = {10.0, 20.0, 25.0, 50.0, 100.0};
    Atom a{Atom::Staircase, 0, 0, {}};
    int n = 1 + pick(2);
    for (int i = 0; i < n; ++i) {
      double period = kPeriods[pick(5)];
      double height = std::round(uniform(0.05, 1.0) * max_rate * period / n);
      a.terms.push_back({height, tenths(0, static_cast<int>(period * 10) - 1), period});
    }
    return a;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace oracle
