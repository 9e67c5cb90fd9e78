#pragma once

// TSN system description: topology, flows, gate control lists and shaper
// configuration. An egress port is identified with the directed link leaving
// it, and a queue with (port, priority). Units: us, bits, bits/us.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tsncalc::net {

// Frame used for a declared best-effort interferer when no size is given.
inline constexpr double kMaxEthernetFrameBits = 1522 * 8.0;  // 12176
inline constexpr double kMinEthernetFrameBits = 64 * 8.0;    // 512

enum class NodeKind { EndSystem, Switch };
enum class TrafficClass { TT, SP, AVB, BE };

const char* to_string(NodeKind k);
const char* to_string(TrafficClass k);

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Switch;
  bool operator==(const Node&) const = default;
};

struct Link {
  std::string id;
  std::string from;
  std::string to;
  double rate = 0.0;               // C
  double propagation_delay = 0.0;  // D_pro
  double forwarding_delay = 0.0;   // D_fwd of the receiving node
  bool operator==(const Link&) const = default;
};

struct Flow {
  std::string id;
  TrafficClass kind = TrafficClass::SP;
  double frame_size = 0.0;       // l_f
  std::optional<double> period;  // periodic flows
  std::optional<double> burst;   // sporadic flows
  std::optional<double> rate;
  int priority = 0;
  std::vector<std::string> route;  // link ids, source ES first
  std::vector<double> offsets;     // TT only, one per route link
  bool operator==(const Flow&) const = default;
};

struct Window {
  double offset = 0.0;
  double length = 0.0;
  bool operator==(const Window&) const = default;
};

struct Gcl {
  std::string port;
  double period = 0.0;
  std::vector<Window> windows;  // TT gate-open windows
  bool operator==(const Gcl&) const = default;
};

struct CbsClass {
  int priority = 0;
  double idle_slope = 0.0;  // operIdleSlope
  bool operator==(const CbsClass&) const = default;
};

struct CbsPort {
  std::string port;
  std::vector<CbsClass> classes;
  bool operator==(const CbsPort&) const = default;
};

struct CbsConfig {
  double max_reservation = 0.75;  // fraction of C
  std::vector<CbsPort> ports;
  bool operator==(const CbsConfig&) const = default;
};

// Maps (upstream egress port, priority) to a shaped queue at `port`.
struct ShapedQueueEntry {
  std::string port;
  std::string id;
  std::string upstream;
  int priority = 0;
  bool operator==(const ShapedQueueEntry&) const = default;
};

struct AtsConfig {
  std::vector<ShapedQueueEntry> shaped_queues;
  bool operator==(const AtsConfig&) const = default;
};

struct QueueDecl {
  std::string port;
  int priority = 0;
  TrafficClass kind = TrafficClass::SP;
  bool operator==(const QueueDecl&) const = default;
};

struct Network {
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<Flow> flows;
  std::vector<Gcl> gcls;
  CbsConfig cbs;
  AtsConfig ats;
  std::vector<QueueDecl> queues;
  std::optional<double> precision;     // network clock precision, added once to TT latency
  std::optional<double> be_interferer; // bits; a max-frame BE interferer on every port
  bool operator==(const Network&) const = default;
};

struct LeakyBucket {
  double burst = 0.0;
  double rate = 0.0;
};

// (b, r) of a non-TT flow: periodic -> (l, l/T), sporadic -> declared.
LeakyBucket leaky_bucket_of(const Flow& f);
// Same, but also accepts TT flows as periodic sources.
LeakyBucket periodic_bucket_of(const Flow& f);

// Read-only lookups over a network. The network must outlive the index.
class NetworkIndex {
 public:
  explicit NetworkIndex(const Network& net);

  const Network& network() const { return *net_; }
  const Link& link(const std::string& id) const;
  const Node& node(const std::string& id) const;
  const Flow& flow(const std::string& id) const;
  bool has_link(const std::string& id) const { return links_.count(id) > 0; }
  bool has_node(const std::string& id) const { return nodes_.count(id) > 0; }

  // Flow indices whose route uses the port, in network order.
  const std::vector<std::size_t>& flows_at(const std::string& port) const;
  // Position of the port on the flow's route, or -1.
  int hop_of(std::size_t flow, const std::string& port) const;
  const Gcl* gcl(const std::string& port) const;
  // Configured operIdleSlope, if any.
  std::optional<double> idle_slope(const std::string& port, int priority) const;
  // Ports in network order that carry at least one flow.
  std::vector<std::string> used_ports() const;

 private:
  const Network* net_;
  std::map<std::string, std::size_t> links_, nodes_, flows_by_id_;
  std::map<std::string, std::vector<std::size_t>> port_flows_;
  std::map<std::string, std::size_t> gcls_;
  static const std::vector<std::size_t> kNone;
};

// Largest frame among non-TT traffic at the port, BE interferer included.
double max_interfering_frame(const NetworkIndex& idx, const std::string& port);

// L_j^GB = min(l_interest / C, o_j - o_{j-1} - L_{j-1}), indices wrapping
// with the GCL period.
double guard_band_length(const Gcl& gcl, std::size_t j, double l_interest, double rate);
double guard_band_length(const NetworkIndex& idx, const std::string& port, std::size_t j);
std::vector<double> guard_bands(const NetworkIndex& idx, const std::string& port);

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  DuplicateId,
  UnknownNode,
  InvalidLink,
  UnknownLink,
  InvalidFlow,
  FrameSize,
  Priority,
  MissingTiming,
  TTNotPeriodic,
  BrokenRoute,
  MissingOffset,
  InvalidGcl,
  UnknownPort,
  InvalidIdleSlope,
  OverReserved,
  QAR1Violation,
  QAR2Violation,
  UnmappedShapedQueue,
  UnknownQueue,
  MixedQueue,
};

const char* to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::string subject;  // offending element id
  std::string message;
  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate(const Network& net);

// ---------------------------------------------------------------------------
// File format (JSON). Throws ParseError on malformed input.

Network parse_network(const std::string& text);
Network load_network(const std::string& path);
std::string dump_network(const Network& net);
void save_network(const Network& net, const std::string& path);

}  // namespace tsncalc::net
