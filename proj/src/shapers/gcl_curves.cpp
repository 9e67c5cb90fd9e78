#include <algorithm>
#include <cmath>

#include "tsncalc/error.hpp"
#include "tsncalc/shapers/shapers.hpp"

namespace tsncalc::shapers {

using minplus::Segment;
using minplus::StaircaseTerm;

namespace {

// Window j of the unrolled schedule: indices >= N belong to the next cycle.
struct Unrolled {
  const net::Gcl& gcl;
  std::size_t n() const { return gcl.windows.size(); }
  double offset(long j) const {
    long N = static_cast<long>(n());
    long k = ((j % N) + N) % N;
    double cycles = static_cast<double>((j - k) / N);
    return gcl.windows[static_cast<std::size_t>(k)].offset + cycles * gcl.period;
  }
  double length(long j) const {
    long N = static_cast<long>(n());
    return gcl.windows[static_cast<std::size_t>(((j % N) + N) % N)].length;
  }
};

double gb_at(std::span<const double> gb, long j, std::size_t n) {
  if (gb.empty()) return 0.0;
  long N = static_cast<long>(n);
  return gb[static_cast<std::size_t>(((j % N) + N) % N)];
}

void check_guard_bands(const net::Gcl& gcl, std::span<const double> gb) {
  if (!gb.empty() && gb.size() != gcl.windows.size()) {
    throw ArgumentError("one guard band per window expected at port " + gcl.port);
  }
}

}  // namespace

Curve tt_arrival_curve(const net::Gcl& gcl, std::span<const double> guard_bands, double rate,
                       TtVariant variant, double horizon) {
  check_guard_bands(gcl, guard_bands);
  const std::size_t n = gcl.windows.size();
  if (n == 0) return Curve::zero();
  Unrolled u{gcl};
  const bool with_gb = variant == TtVariant::GuardBandTT;
  std::vector<Curve> rotations;
  for (long i = 0; i < static_cast<long>(n); ++i) {
    std::vector<StaircaseTerm> terms;
    for (long j = i; j < i + static_cast<long>(n); ++j) {
      double gb_j = with_gb ? gb_at(guard_bands, j, n) : 0.0;
      double gb_i = with_gb ? gb_at(guard_bands, i, n) : 0.0;
      terms.push_back({(u.length(j) + gb_j) * rate, u.offset(j) - u.offset(i) + gb_i - gb_j,
                       gcl.period});
    }
    rotations.push_back(Curve::staircase(terms, horizon));
  }
  return minplus::max_of(rotations);
}

namespace {

// C * beta_TDMA(t + t0, L): closed for the first T - L - t0, then one ramp of
// length L per cycle.
Curve tdma(double rate, double period, double length, double t0, double horizon) {
  std::vector<Segment> segs{{0.0, 0.0, 0.0}};
  double served = 0.0;
  for (int k = 0;; ++k) {
    double ramp = (k + 1) * period - length - t0;
    if (ramp > horizon) break;
    if (ramp < 0.0) ramp = 0.0;
    if (ramp <= segs.back().start + 1e-12) {
      segs.back() = {segs.back().start, served, rate};
    } else {
      segs.push_back({ramp, served, rate});
    }
    served += rate * length;
    segs.push_back({ramp + length, served, 0.0});
  }
  return Curve::piecewise_linear(0.0, std::move(segs));
}

}  // namespace

Curve tt_service_curve(const net::Gcl& gcl, double rate, double horizon) {
  const std::size_t n = gcl.windows.size();
  if (n == 0) return Curve::zero();
  Unrolled u{gcl};
  double open = 0.0;
  for (const auto& w : gcl.windows) open += w.length;
  std::vector<Curve> rotations;
  for (long i = 0; i < static_cast<long>(n); ++i) {
    // Start right after window i-1 closes, the worst alignment.
    double start = u.offset(i - 1) + u.length(i - 1);
    std::vector<Curve> parts;
    for (long j = i; j < i + static_cast<long>(n); ++j) {
      double t0 = gcl.period - u.length(j) - (u.offset(j) - start);
      parts.push_back(tdma(rate, gcl.period, u.length(j), t0, horizon));
    }
    rotations.push_back(minplus::sum_of(parts));
  }
  Curve exact = minplus::min_of(rotations);
  return minplus::lower_linear_tail(exact, horizon, rate * open / gcl.period);
}

GuardBandEnvelope guard_band_envelope(const net::Gcl& gcl, std::span<const double> guard_bands,
                                      double rate) {
  check_guard_bands(gcl, guard_bands);
  const std::size_t n = gcl.windows.size();
  if (n == 0 || guard_bands.empty()) return {};
  double tt = 0.0, gb = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    tt += gcl.windows[j].length;
    gb += guard_bands[j];
  }
  double non_tt = gcl.period - tt;
  if (gb <= 0.0 || non_tt <= 0.0) return {};
  GuardBandEnvelope env;
  env.rho = rate * gb / non_tt;
  // The excess C*GB - rho*nonTT peaks on intervals that open where a guard band
  // opens and close where a later one ends; one cycle is enough since a full
  // cycle adds zero.
  Unrolled u{gcl};
  for (long a = 0; a < static_cast<long>(n); ++a) {
    double s = u.offset(a) - gb_at(guard_bands, a, n);
    double gb_sum = 0.0, tt_sum = 0.0;
    for (long b = a; b < a + static_cast<long>(n); ++b) {
      gb_sum += gb_at(guard_bands, b, n);
      double t = u.offset(b);
      env.sigma = std::max(env.sigma, rate * gb_sum - env.rho * (t - s - tt_sum));
      tt_sum += u.length(b);
    }
  }
  return env;
}

double effective_idle_slope(double oper_idle_slope, const net::Gcl* gcl) {
  if (!gcl || gcl->windows.empty()) return oper_idle_slope;
  double tt = 0.0;
  for (const auto& w : gcl->windows) tt += w.length;
  double open = gcl->period - tt;
  if (open <= 0.0) {
    throw StarvationError("gate control list at " + gcl->port + " leaves no time for non-TT traffic");
  }
  return oper_idle_slope * gcl->period / open;
}

}  // namespace tsncalc::shapers
