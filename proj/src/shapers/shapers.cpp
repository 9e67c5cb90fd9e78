#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tsncalc/error.hpp"
#include "tsncalc/shapers/shapers.hpp"

namespace tsncalc::shapers {

namespace {

constexpr double kEps = 1e-9;

Curve line(double rate) { return Curve::rate_latency(rate, 0.0); }

// Arrival-style curves are 0 at t = 0 whatever the formula gives there.
Curve zero_at_origin(const Curve& c) {
  return Curve::piecewise_linear(0.0, c.segments(), c.infinite_after(), c.horizon());
}

std::string at(const std::string& context) { return context.empty() ? "" : " at " + context; }

}  // namespace

Curve sp_service_curve(double rate, const Curve& blocking, std::span<const Curve> higher,
                       double l_lower, Closure closure, const std::string& context) {
  Curve f = line(rate) - blocking;
  for (const auto& h : higher) f = f - h;
  f = minplus::add_constant(f, -l_lower);
  if (f.tail_slope() <= kEps) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "no leftover service (long-term rate %.6f)", f.tail_slope());
    throw StarvationError(buf + at(context));
  }
  return closure == Closure::Running ? minplus::up_closure(f) : minplus::nonneg_closure(f);
}

CreditBounds cbs_credit_bounds(double rate, std::span<const CbsClassInput> classes, std::size_t i,
                               double l_lower, const GuardBandEnvelope& gb,
                               const std::string& context) {
  if (i >= classes.size()) throw ArgumentError("credit bounds: class index out of range");
  double sum_min = 0.0, sum_slope = 0.0;
  for (std::size_t j = 0; j < i; ++j) {
    sum_min += (classes[j].idle_slope - rate) * classes[j].max_frame / rate;
    sum_slope += classes[j].idle_slope;
  }
  const double idsl = classes[i].idle_slope;
  if (!(idsl > 0.0 && idsl < rate)) {
    throw ConfigurationError("idle slope must lie strictly between 0 and C" + at(context));
  }
  double den = sum_slope - rate;
  if (den >= -kEps) throw ConfigurationError("over-reserved: higher classes take the whole link" + at(context));
  CreditBounds out;
  out.gb = gb;
  out.c_min = (idsl - rate) * classes[i].max_frame / rate;
  out.c_max = idsl * (sum_min - l_lower) / den;
  double den_nf = gb.rho + den;
  if (den_nf >= -kEps) {
    throw ConfigurationError("over-reserved once guard bands are counted" + at(context));
  }
  out.c_max_nf = idsl * (sum_min - l_lower - gb.sigma) / den_nf;
  return out;
}

Curve cbs_service_curve(double idle_slope, double c_max, double rate, const Curve* blocking) {
  if (!blocking) return Curve::rate_latency(idle_slope, std::max(0.0, c_max) / idle_slope);
  Curve f = line(idle_slope) - (idle_slope / rate) * *blocking;
  f = minplus::add_constant(f, -c_max);
  if (f.tail_slope() <= kEps) throw StarvationError("TT windows leave no service for the AVB class");
  return minplus::up_closure(f);
}

Curve cbs_shaping_curve(double idle_slope, double c_max, double c_min, double rate,
                        const Curve* tt_service) {
  if (!tt_service) return Curve::affine(c_max - c_min, idle_slope);
  Curve f = line(idle_slope) - (idle_slope / rate) * *tt_service;
  f = minplus::add_constant(f, c_max - c_min);
  return zero_at_origin(minplus::up_closure(f));
}

Curve shared_queue_arrival_ats(std::span<const net::LeakyBucket> flows) {
  double b = 0.0, r = 0.0;
  for (const auto& f : flows) {
    b += f.burst;
    r += f.rate;
  }
  return Curve::affine(b, r);
}

Curve group_arrival(const UpstreamGroup& group) {
  double b = 0.0, r = 0.0;
  for (const auto& f : group.flows) {
    b += f.burst + (group.from_source ? 0.0 : f.rate * group.delay);
    r += f.rate;
  }
  Curve out = Curve::affine(b, r);
  if (group.from_source) return out;
  out = minplus::min(out, Curve::affine(group.max_frame, group.link_rate));
  if (group.cbs_shaping) {
    out = minplus::min(out, zero_at_origin(minplus::add_constant(*group.cbs_shaping, group.max_frame)));
  }
  return out;
}

Curve unshaped_queue_arrival(std::span<const UpstreamGroup> groups) {
  Curve out = Curve::zero();
  for (const auto& g : groups) out = out + group_arrival(g);
  return out;
}

ShapedQueueResult shaped_queue_analysis(const UpstreamGroup& group, double l_min) {
  if (group.from_source) {
    throw ArgumentError("flows leaving their source end system have no shaped queue");
  }
  ShapedQueueResult out;
  double d = group.delay - l_min / group.link_rate;
  if (d < 0.0) {
    out.clamped = d < -kEps;
    d = 0.0;
  }
  out.delay = d;
  out.arrival = group_arrival(group);
  out.backlog = minplus::vdev(out.arrival, Curve::burst_delay(d)).value;
  return out;
}

TasFlowBounds tas_flow_bounds(const net::Flow& flow, std::span<const net::Link* const> route,
                              double precision) {
  if (route.empty() || flow.offsets.size() != route.size()) {
    throw ArgumentError("TT flow " + flow.id + " needs one offset per route link");
  }
  for (std::size_t h = 1; h < route.size(); ++h) {
    const net::Link& prev = *route[h - 1];
    double ready = flow.offsets[h - 1] + flow.frame_size / prev.rate + prev.propagation_delay +
                   prev.forwarding_delay;
    if (flow.offsets[h] < ready - 1e-6) {
      char buf[200];
      std::snprintf(buf, sizeof buf,
                    "TT flow %s is scheduled on %s at %.3f us but cannot arrive before %.3f us",
                    flow.id.c_str(), route[h]->id.c_str(), flow.offsets[h], ready);
      throw InfeasibleError(buf);
    }
  }
  TasFlowBounds out;
  out.delay = flow.offsets.back() + flow.frame_size / route.back()->rate - flow.offsets.front() +
              precision;
  out.jitter = 0.0;
  return out;
}

double tas_queue_backlog(std::span<const double> frames) {
  double b = 0.0;
  for (double l : frames) b = std::max(b, l);
  return b;
}

}  // namespace tsncalc::shapers
