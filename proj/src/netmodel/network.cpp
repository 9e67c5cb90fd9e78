#include <algorithm>
#include <cmath>

#include "tsncalc/error.hpp"
#include "tsncalc/netmodel/network.hpp"

namespace tsncalc::net {

const char* to_string(NodeKind k) { return k == NodeKind::EndSystem ? "end_system" : "switch"; }

const char* to_string(TrafficClass k) {
  switch (k) {
    case TrafficClass::TT: return "TT";
    case TrafficClass::SP: return "SP";
    case TrafficClass::AVB: return "AVB";
    case TrafficClass::BE: return "BE";
  }
  return "?";
}

LeakyBucket leaky_bucket_of(const Flow& f) {
  if (f.kind == TrafficClass::TT) {
    throw NotApplicableError("flow " + f.id + " is time-triggered; it has no leaky-bucket model");
  }
  return periodic_bucket_of(f);
}

LeakyBucket periodic_bucket_of(const Flow& f) {
  if (f.period) return {f.frame_size, f.frame_size / *f.period};
  if (f.burst && f.rate) return {*f.burst, *f.rate};
  throw ValidationError("flow " + f.id + " has neither a period nor a burst/rate pair");
}

const std::vector<std::size_t> NetworkIndex::kNone;

NetworkIndex::NetworkIndex(const Network& net) : net_(&net) {
  for (std::size_t i = 0; i < net.links.size(); ++i) links_.emplace(net.links[i].id, i);
  for (std::size_t i = 0; i < net.nodes.size(); ++i) nodes_.emplace(net.nodes[i].id, i);
  for (std::size_t i = 0; i < net.flows.size(); ++i) {
    flows_by_id_.emplace(net.flows[i].id, i);
    for (const auto& l : net.flows[i].route) port_flows_[l].push_back(i);
  }
  for (std::size_t i = 0; i < net.gcls.size(); ++i) gcls_.emplace(net.gcls[i].port, i);
}

const Link& NetworkIndex::link(const std::string& id) const {
  auto it = links_.find(id);
  if (it == links_.end()) throw ValidationError("unknown link " + id);
  return net_->links[it->second];
}

const Node& NetworkIndex::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ValidationError("unknown node " + id);
  return net_->nodes[it->second];
}

const Flow& NetworkIndex::flow(const std::string& id) const {
  auto it = flows_by_id_.find(id);
  if (it == flows_by_id_.end()) throw ValidationError("unknown flow " + id);
  return net_->flows[it->second];
}

const std::vector<std::size_t>& NetworkIndex::flows_at(const std::string& port) const {
  auto it = port_flows_.find(port);
  return it == port_flows_.end() ? kNone : it->second;
}

int NetworkIndex::hop_of(std::size_t flow, const std::string& port) const {
  const auto& r = net_->flows[flow].route;
  auto it = std::find(r.begin(), r.end(), port);
  return it == r.end() ? -1 : static_cast<int>(it - r.begin());
}

const Gcl* NetworkIndex::gcl(const std::string& port) const {
  auto it = gcls_.find(port);
  return it == gcls_.end() ? nullptr : &net_->gcls[it->second];
}

std::optional<double> NetworkIndex::idle_slope(const std::string& port, int priority) const {
  for (const auto& p : net_->cbs.ports) {
    if (p.port != port) continue;
    for (const auto& c : p.classes)
      if (c.priority == priority) return c.idle_slope;
  }
  return std::nullopt;
}

std::vector<std::string> NetworkIndex::used_ports() const {
  std::vector<std::string> out;
  for (const auto& l : net_->links)
    if (port_flows_.count(l.id)) out.push_back(l.id);
  return out;
}

double max_interfering_frame(const NetworkIndex& idx, const std::string& port) {
  double lmax = idx.network().be_interferer.value_or(0.0);
  for (std::size_t f : idx.flows_at(port)) {
    const Flow& flow = idx.network().flows[f];
    if (flow.kind != TrafficClass::TT) lmax = std::max(lmax, flow.frame_size);
  }
  return lmax;
}

double guard_band_length(const Gcl& gcl, std::size_t j, double l_interest, double rate) {
  const auto& w = gcl.windows;
  if (j >= w.size()) throw ArgumentError("guard band window index out of range");
  std::size_t prev = (j + w.size() - 1) % w.size();
  double prev_end = w[prev].offset + w[prev].length - (prev >= j ? gcl.period : 0.0);
  double gap = std::max(0.0, w[j].offset - prev_end);
  return std::min(l_interest / rate, gap);
}

double guard_band_length(const NetworkIndex& idx, const std::string& port, std::size_t j) {
  const Gcl* g = idx.gcl(port);
  if (!g) throw ArgumentError("port " + port + " has no gate control list");
  return guard_band_length(*g, j, max_interfering_frame(idx, port), idx.link(port).rate);
}

std::vector<double> guard_bands(const NetworkIndex& idx, const std::string& port) {
  std::vector<double> out;
  const Gcl* g = idx.gcl(port);
  if (!g) return out;
  for (std::size_t j = 0; j < g->windows.size(); ++j) out.push_back(guard_band_length(idx, port, j));
  return out;
}

}  // namespace tsncalc::net
