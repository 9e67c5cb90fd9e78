#pragma once

// Network-wide analysis: per-queue curves in dependency order, end-to-end
// bounds per flow, backlog per queue, the closed-form ATS cross-check and
// difference ratios between two reports.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsncalc/netmodel/network.hpp"

namespace tsncalc::engine {

enum class Architecture { TAS, ATS, CBS, SP, TAS_SP, TAS_CBS, TAS_ATS_SP, TAS_ATS_CBS };
enum class CreditMode { Frozen, NonFrozen };

const char* to_string(Architecture a);
const char* to_string(CreditMode m);
// Accepts the printed names ("TAS+ATS+SP") and throws ArgumentError otherwise.
Architecture parse_architecture(const std::string& s);
CreditMode parse_credit_mode(const std::string& s);  // frozen|nonfrozen|F|NF
const std::vector<Architecture>& all_architectures();

bool has_tas(Architecture a);
bool has_ats(Architecture a);
bool has_cbs(Architecture a);

struct Options {
  std::optional<CreditMode> credit_mode;  // TAS+CBS and TAS+ATS+CBS only; default frozen
  std::optional<double> horizon;          // default 4 * max(GCL cycle, flow period)
  bool fixed_point = false;               // iterate instead of failing on cyclic dependencies
  unsigned threads = 1;                   // 0 = hardware concurrency
};

struct FlowResult {
  std::string id;
  int priority = 0;
  net::TrafficClass kind = net::TrafficClass::SP;
  double delay = 0.0;        // D_E2E
  double lower = 0.0;        // d_E2E
  double jitter = 0.0;       // D_E2E - d_E2E
  std::vector<double> hops;  // queue delay counted at each route link
};

struct QueueResult {
  std::string node;
  std::string port;
  int priority = 0;
  net::TrafficClass kind = net::TrafficClass::SP;  // TT, SP or AVB
  std::optional<double> delay;                     // none for TT queues
  double backlog = 0.0;
  double max_frame = 0.0;
  double min_frame = 0.0;
};

struct ShapedQueueReport {
  std::string port;
  std::string id;
  std::string upstream;
  int priority = 0;
  double delay = 0.0;           // D_q
  double backlog = 0.0;         // B_q
  double upstream_delay = 0.0;  // D of the feeding shared queue
  double min_frame = 0.0;
  double link_rate = 0.0;
  bool clamped = false;
};

struct AnalysisReport {
  Architecture architecture = Architecture::SP;
  std::optional<CreditMode> credit_mode;
  double horizon = 0.0;
  int iterations = 0;  // fixed-point rounds, 0 for one-pass evaluation
  std::vector<FlowResult> flows;          // sorted by id
  std::vector<QueueResult> queues;        // sorted by (port, priority)
  std::vector<ShapedQueueReport> shaped;  // sorted by (port, id)
  std::vector<std::string> warnings;

  const FlowResult& flow(const std::string& id) const;
  const QueueResult& queue(const std::string& port, int priority) const;
};

// Throws ValidationError when the network does not validate, and
// Configuration/Instability/Starvation/Cycle/Divergence/Infeasible errors from
// the analysis itself.
AnalysisReport analyze(const net::Network& network, Architecture arch, const Options& opt = {});

double default_horizon(const net::Network& network);

// Closed-form (non network-calculus) ATS per-hop cross-check.
// delta = max over same-priority f' of l_f'/(C - sum r_higher) - l_f'/C.
double ats_delta(const net::NetworkIndex& idx, const std::string& port, const std::string& flow);
// Queue delay of the report minus delta.
double ats_closed_form_delay(const net::NetworkIndex& idx, const AnalysisReport& report,
                             const std::string& port, const std::string& flow);
// End-to-end bound with every hop replaced by its closed form.
double ats_closed_form_e2e(const net::NetworkIndex& idx, const AnalysisReport& report,
                           const std::string& flow);

enum class Metric { Delay, Jitter, Backlog };
const char* to_string(Metric m);
Metric parse_metric(const std::string& s);

struct RatioResult {
  std::map<std::string, double> items;  // key -> (x1 - x2) / x2
  double mean = 0.0;
  std::vector<std::string> skipped;  // zero denominators
};

// Flows are keyed by id, queues by "port/priority". Both reports must cover
// the same keys (ArgumentError otherwise).
RatioResult difference_ratio(const AnalysisReport& r1, const AnalysisReport& r2, Metric metric);

// --- output ---------------------------------------------------------------

std::string flows_csv(const AnalysisReport& r);
std::string queues_csv(const AnalysisReport& r);
std::string report_json(const AnalysisReport& r);
// flows.csv, queues.csv and report.json under `dir` (created if missing).
void write_report(const AnalysisReport& r, const std::string& dir);

}  // namespace tsncalc::engine
