#pragma once

// Synthetic test cases: topology templates, random flow populations at a
// target load, an ASAP gate-control placer and a CSV flow-table loader.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsncalc/netmodel/network.hpp"

namespace tsncalc::testgen {

// Small ring & mesh, medium ring, medium mesh, small tree (depth 1), medium
// tree (depth 2).
enum class Topology { SRM, MR, MM, ST, MT };

const char* to_string(Topology t);
Topology parse_topology(const std::string& s);

// Nodes and full-duplex links (one directed link per direction, id "A-B"),
// no flows.
net::Network make_topology(Topology t, double rate = 100.0);

struct GenSpec {
  // 0: keep adding flows until the load target is met. Otherwise exactly this
  // many flows, frame sizes tuned to the target.
  std::size_t flow_count = 0;
  std::vector<double> periods{1000, 2000, 5000, 10000};
  double min_frame = 512;    // bits
  double max_frame = 12176;  // bits
  double load = 0.2;         // target average utilization over used links
  double tt_fraction = 0.0;  // share of `load` carried by TT flows
  std::vector<int> priorities{5};  // non-TT priorities
  net::TrafficClass kind = net::TrafficClass::SP;  // SP or AVB
  double sporadic_fraction = 0.0;  // non-TT flows given as (b = l, r = l/T)
  int tt_priority = 7;
  std::optional<double> be_interferer;
  double max_link_load = 0.98;
  double tolerance = 0.05;  // absolute, on the average load
  std::uint64_t seed = 1;
};

struct LoadStats {
  double average = 0.0;  // over links carrying at least one flow
  double max = 0.0;
  std::size_t used_links = 0;
  double average_hops = 0.0;
};

LoadStats load_stats(const net::Network& n);

// Throws GenerationError when the target cannot be met within 100 attempts
// and ArgumentError on a malformed spec.
net::Network generate(Topology t, const GenSpec& spec);

// Shortest path in links from `src` to `dst`; ties go to the lexicographically
// smallest node sequence. Empty when unreachable.
std::vector<std::string> shortest_route(const net::Network& n, const std::string& src,
                                        const std::string& dst);

// ASAP placement of every TT flow (by period, then id): sets offsets and
// replaces n.gcls with one window per frame instance over T_GCL = lcm of TT
// periods. Throws InfeasibleError naming flow and link when a frame does not
// fit within its period.
void gcl_place(net::Network& n);

// CSV with header id,kind,size_bytes,period_us,priority,source,dest. Routes
// are shortest paths over `topology`; TT flows are placed afterwards.
net::Network load_flow_table(const std::string& csv_text, const net::Network& topology);

}  // namespace tsncalc::testgen
