#pragma once

// Per-queue arrival and service curves for TAS, ATS, CBS, SP and their
// combinations. Everything here is a pure function of explicit inputs; the
// engine decides which flows, frames and upstream delays feed each call.

#include <optional>
#include <span>
#include <vector>

#include "tsncalc/minplus/curve.hpp"
#include "tsncalc/netmodel/network.hpp"

namespace tsncalc::shapers {

using minplus::Curve;

// ---------------------------------------------------------------------------
// Gate control list curves

enum class TtVariant { TT, GuardBandTT };

// Bits the gate keeps away from non-TT traffic in any window of length t:
// the max over window rotations of per-window staircases. `guard_bands` holds
// one L^GB per window (ignored for TtVariant::TT). Exact on [0, horizon].
Curve tt_arrival_curve(const net::Gcl& gcl, std::span<const double> guard_bands, double rate,
                       TtVariant variant, double horizon);

// Minimum TT service in any interval: min over rotations of the summed
// per-window TDMA curves. Exact on [0, horizon], lower linear envelope after.
Curve tt_service_curve(const net::Gcl& gcl, double rate, double horizon);

// Linear envelope of guard-band time against non-TT time:
// C*GB(s,t) <= sigma + rho*(t - s - TT(s,t)). rho is the long-run ratio, sigma
// the smallest offset that makes the bound hold for that rho.
struct GuardBandEnvelope {
  double sigma = 0.0;
  double rho = 0.0;
};
GuardBandEnvelope guard_band_envelope(const net::Gcl& gcl, std::span<const double> guard_bands,
                                      double rate);

// idSl scaled by cycle time over the time the TT gates leave open.
double effective_idle_slope(double oper_idle_slope, const net::Gcl* gcl);

// ---------------------------------------------------------------------------
// Strict priority

enum class Closure { NonNegative, Running };

// C*[t - blocking(t)/C - sum(higher)/C - l_lower/C] under the chosen closure.
// `blocking` is the TT curve (zero when there is no gate control). Throws
// StarvationError when the long-term leftover rate is not positive.
Curve sp_service_curve(double rate, const Curve& blocking, std::span<const Curve> higher,
                       double l_lower, Closure closure, const std::string& context = {});

// ---------------------------------------------------------------------------
// Credit-based shaper

struct CbsClassInput {
  double idle_slope = 0.0;  // effective idSl
  double max_frame = 0.0;   // l^max of the class queue
};

struct CreditBounds {
  double c_max = 0.0;     // credit frozen during guard bands (and CBS alone)
  double c_max_nf = 0.0;  // credit keeps growing during guard bands
  double c_min = 0.0;
  GuardBandEnvelope gb;
};

// `classes` ordered from highest to lowest priority; bounds for index i.
// `l_lower` is l^max_{>i}. Throws ConfigurationError when a denominator is
// not negative (over-reserved port).
CreditBounds cbs_credit_bounds(double rate, std::span<const CbsClassInput> classes, std::size_t i,
                               double l_lower, const GuardBandEnvelope& gb = {},
                               const std::string& context = {});

// idSl*[t - c/idSl]^+ without gate control, or
// idSl*[t - blocking(t)/C - c/idSl]_up^+ with it.
Curve cbs_service_curve(double idle_slope, double c_max, double rate,
                        const Curve* blocking = nullptr);

// Upper envelope of class output: idSl*t + c_max - c_min without gate control,
// idSl*[t - tt_service(t)/C + (c_max - c_min)/idSl]_up^+ with it. Zero at t = 0.
Curve cbs_shaping_curve(double idle_slope, double c_max, double c_min, double rate,
                        const Curve* tt_service = nullptr);

// ---------------------------------------------------------------------------
// Queue arrivals

// Sum of the committed (b_f, r_f) envelopes feeding an ATS shared queue.
Curve shared_queue_arrival_ats(std::span<const net::LeakyBucket> flows);

// The flows that reach a queue from one upstream queue (or straight from the
// source end system when `from_source`).
struct UpstreamGroup {
  std::vector<net::LeakyBucket> flows;  // per-flow envelopes at the upstream queue
  bool from_source = false;
  double delay = 0.0;      // D of the upstream queue
  double link_rate = 0.0;  // C of the link between the two queues
  double max_frame = 0.0;  // l^max of the upstream queue
  std::optional<Curve> cbs_shaping;  // upstream CBS shaping curve, CBS architectures only
};

// One group's contribution: (sum alpha_f (/) delta_D) ^ (C*t + l) [^ (sigma_CBS + l)];
// a source group contributes its raw envelopes.
Curve group_arrival(const UpstreamGroup& group);
// Sum of group contributions.
Curve unshaped_queue_arrival(std::span<const UpstreamGroup> groups);

struct ShapedQueueResult {
  double delay = 0.0;    // D_q
  double backlog = 0.0;  // B_q
  bool clamped = false;  // D_{Q^-} < l^min/C, delay forced to 0
  Curve arrival;         // alpha_q
};

// ATS shaped queue fed by `group` (never a source group): D_q = D_{Q^-} - l_min/C,
// beta_q = delta_{D_q}, B_q = v(alpha_q, beta_q).
ShapedQueueResult shaped_queue_analysis(const UpstreamGroup& group, double l_min);

// ---------------------------------------------------------------------------
// Time-triggered flows

struct TasFlowBounds {
  double delay = 0.0;
  double jitter = 0.0;
};

// phi_last + l/C - phi_first (+ precision). Throws InfeasibleError when an
// offset lets a frame leave before it has fully arrived.
TasFlowBounds tas_flow_bounds(const net::Flow& flow, std::span<const net::Link* const> route,
                              double precision = 0.0);
// Largest frame among the flows assigned to a TT queue.
double tas_queue_backlog(std::span<const double> frames);

}  // namespace tsncalc::shapers
