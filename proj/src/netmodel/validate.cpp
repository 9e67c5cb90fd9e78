#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "tsncalc/netmodel/network.hpp"

namespace tsncalc::net {

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::DuplicateId: return "DuplicateId";
    case ViolationKind::UnknownNode: return "UnknownNode";
    case ViolationKind::InvalidLink: return "InvalidLink";
    case ViolationKind::UnknownLink: return "UnknownLink";
    case ViolationKind::InvalidFlow: return "InvalidFlow";
    case ViolationKind::FrameSize: return "FrameSize";
    case ViolationKind::Priority: return "Priority";
    case ViolationKind::MissingTiming: return "MissingTiming";
    case ViolationKind::TTNotPeriodic: return "TTNotPeriodic";
    case ViolationKind::BrokenRoute: return "BrokenRoute";
    case ViolationKind::MissingOffset: return "MissingOffset";
    case ViolationKind::InvalidGcl: return "InvalidGcl";
    case ViolationKind::UnknownPort: return "UnknownPort";
    case ViolationKind::InvalidIdleSlope: return "InvalidIdleSlope";
    case ViolationKind::OverReserved: return "OverReserved";
    case ViolationKind::QAR1Violation: return "QAR1Violation";
    case ViolationKind::QAR2Violation: return "QAR2Violation";
    case ViolationKind::UnmappedShapedQueue: return "UnmappedShapedQueue";
    case ViolationKind::UnknownQueue: return "UnknownQueue";
    case ViolationKind::MixedQueue: return "MixedQueue";
  }
  return "?";
}

namespace {

constexpr double kEps = 1e-9;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

class Checker {
 public:
  explicit Checker(const Network& net) : net_(net) {}

  std::vector<Violation> run() {
    ids();
    links();
    flows();
    gcls();
    cbs();
    ats();
    queues();
    return std::move(out_);
  }

 private:
  void add(ViolationKind k, const std::string& subject, const std::string& msg) {
    out_.push_back({k, subject, msg});
  }

  void ids() {
    auto unique = [&](const char* what, auto&& items) {
      std::set<std::string> seen;
      for (const auto& x : items)
        if (!seen.insert(x.id).second) add(ViolationKind::DuplicateId, x.id, std::string("duplicate ") + what + " id");
    };
    unique("node", net_.nodes);
    unique("link", net_.links);
    unique("flow", net_.flows);
    for (const auto& n : net_.nodes) node_kind_[n.id] = n.kind;
    for (const auto& l : net_.links) link_[l.id] = &l;
  }

  void links() {
    for (const auto& l : net_.links) {
      if (!node_kind_.count(l.from)) add(ViolationKind::UnknownNode, l.id, "link source " + l.from + " is not a node");
      if (!node_kind_.count(l.to)) add(ViolationKind::UnknownNode, l.id, "link target " + l.to + " is not a node");
      if (!(l.rate > 0.0)) add(ViolationKind::InvalidLink, l.id, "link rate must be positive");
      if (l.propagation_delay < 0.0 || l.forwarding_delay < 0.0)
        add(ViolationKind::InvalidLink, l.id, "link delays must be non-negative");
    }
  }

  void flows() {
    for (const auto& f : net_.flows) {
      if (f.frame_size < kMinEthernetFrameBits - kEps || f.frame_size > kMaxEthernetFrameBits + kEps)
        add(ViolationKind::FrameSize, f.id, "frame size " + fmt(f.frame_size) + " bits outside [512, 12176]");
      if (f.priority < 0 || f.priority > 7) add(ViolationKind::Priority, f.id, "priority must be in 0..7");
      bool periodic = f.period.has_value();
      bool sporadic = f.burst.has_value() && f.rate.has_value();
      if (periodic && !(*f.period > 0.0)) add(ViolationKind::InvalidFlow, f.id, "period must be positive");
      if (sporadic && (*f.burst < 0.0 || *f.rate < 0.0))
        add(ViolationKind::InvalidFlow, f.id, "burst and rate must be non-negative");
      if (!periodic && !sporadic) add(ViolationKind::MissingTiming, f.id, "flow needs a period or a burst and rate");
      if (f.kind == TrafficClass::TT && !periodic)
        add(ViolationKind::TTNotPeriodic, f.id, "time-triggered flows must be periodic");
      route(f);
    }
  }

  void route(const Flow& f) {
    if (f.route.empty()) {
      add(ViolationKind::BrokenRoute, f.id, "empty route");
      return;
    }
    const Link* prev = nullptr;
    for (std::size_t h = 0; h < f.route.size(); ++h) {
      auto it = link_.find(f.route[h]);
      if (it == link_.end()) {
        add(ViolationKind::UnknownLink, f.id, "route uses unknown link " + f.route[h]);
        return;
      }
      const Link* l = it->second;
      if (prev && prev->to != l->from) {
        add(ViolationKind::BrokenRoute, f.id, "links " + prev->id + " and " + l->id + " are not adjacent");
        return;
      }
      if (h > 0 && kind_of(l->from) != NodeKind::Switch)
        add(ViolationKind::BrokenRoute, f.id, "intermediate node " + l->from + " is not a switch");
      prev = l;
    }
    if (kind_of(link_.at(f.route.front())->from) != NodeKind::EndSystem ||
        kind_of(prev->to) != NodeKind::EndSystem)
      add(ViolationKind::BrokenRoute, f.id, "route must start and end at end systems");
    if (f.kind == TrafficClass::TT) {
      if (f.offsets.size() != f.route.size()) {
        for (std::size_t h = f.offsets.size(); h < f.route.size(); ++h)
          add(ViolationKind::MissingOffset, f.id, "no offset for link " + f.route[h]);
      }
    } else if (!f.offsets.empty()) {
      add(ViolationKind::InvalidFlow, f.id, "offsets are only meaningful for TT flows");
    }
  }

  NodeKind kind_of(const std::string& node) const {
    auto it = node_kind_.find(node);
    return it == node_kind_.end() ? NodeKind::Switch : it->second;
  }

  void gcls() {
    std::set<std::string> seen;
    for (const auto& g : net_.gcls) {
      if (!link_.count(g.port)) add(ViolationKind::UnknownPort, g.port, "GCL for unknown port");
      if (!seen.insert(g.port).second) add(ViolationKind::InvalidGcl, g.port, "more than one GCL for the port");
      if (!(g.period > 0.0)) {
        add(ViolationKind::InvalidGcl, g.port, "GCL period must be positive");
        continue;
      }
      double end = 0.0;
      for (std::size_t j = 0; j < g.windows.size(); ++j) {
        const Window& w = g.windows[j];
        if (w.offset < -kEps || !(w.length > 0.0) || w.offset + w.length > g.period + kEps)
          add(ViolationKind::InvalidGcl, g.port, "window " + std::to_string(j) + " outside [0, T_GCL)");
        if (j > 0 && w.offset < end - kEps)
          add(ViolationKind::InvalidGcl, g.port, "windows unsorted or overlapping at index " + std::to_string(j));
        end = w.offset + w.length;
      }
    }
  }

  void cbs() {
    if (!(net_.cbs.max_reservation > 0.0 && net_.cbs.max_reservation <= 1.0))
      add(ViolationKind::OverReserved, "cbs", "max_reservation must be in (0, 1]");
    for (const auto& p : net_.cbs.ports) {
      auto it = link_.find(p.port);
      if (it == link_.end()) {
        add(ViolationKind::UnknownPort, p.port, "CBS configuration for unknown port");
        continue;
      }
      double c = it->second->rate, sum = 0.0;
      std::string classes;
      for (const auto& k : p.classes) {
        classes += (classes.empty() ? "" : ",") + std::to_string(k.priority);
        if (!(k.idle_slope > 0.0 && k.idle_slope < c))
          add(ViolationKind::InvalidIdleSlope, p.port + "/" + std::to_string(k.priority),
              "idle slope " + fmt(k.idle_slope) + " must lie in (0, C=" + fmt(c) + ")");
        sum += k.idle_slope;
      }
      if (sum > net_.cbs.max_reservation * c + kEps)
        add(ViolationKind::OverReserved, p.port,
            "port " + p.port + " classes " + classes + " reserve " + fmt(sum) + " > " +
                fmt(net_.cbs.max_reservation) + "*C");
    }
  }

  void ats() {
    // Per (port, shaped queue id): the set of upstream ports and priorities.
    std::map<std::pair<std::string, std::string>, std::vector<const ShapedQueueEntry*>> groups;
    std::set<std::string> mapped_ports;
    for (const auto& e : net_.ats.shaped_queues) {
      if (!link_.count(e.port)) add(ViolationKind::UnknownPort, e.port, "shaped queue on unknown port");
      if (!link_.count(e.upstream)) add(ViolationKind::UnknownPort, e.upstream, "shaped queue fed by unknown port");
      groups[{e.port, e.id}].push_back(&e);
      mapped_ports.insert(e.port);
    }
    for (const auto& [key, entries] : groups) {
      std::set<std::string> ups;
      std::set<int> prios;
      for (const auto* e : entries) {
        ups.insert(e->upstream);
        prios.insert(e->priority);
      }
      std::string subject = key.first + "/" + key.second;
      if (ups.size() > 1) add(ViolationKind::QAR1Violation, subject, "shaped queue mixes input ports");
      if (prios.size() > 1) add(ViolationKind::QAR2Violation, subject, "shaped queue mixes priorities");
    }
    // Every flow entering a mapped port must find its shaped queue.
    for (const auto& f : net_.flows) {
      if (f.kind == TrafficClass::TT || f.kind == TrafficClass::BE) continue;
      for (std::size_t h = 1; h < f.route.size(); ++h) {
        if (!mapped_ports.count(f.route[h])) continue;
        bool found = false;
        for (const auto& e : net_.ats.shaped_queues)
          found |= e.port == f.route[h] && e.upstream == f.route[h - 1] && e.priority == f.priority;
        if (!found)
          add(ViolationKind::UnmappedShapedQueue, f.id,
              "no shaped queue at " + f.route[h] + " for input " + f.route[h - 1]);
      }
    }
  }

  void queues() {
    std::map<std::pair<std::string, int>, TrafficClass> declared;
    std::set<std::string> declared_ports;
    for (const auto& q : net_.queues) {
      if (!link_.count(q.port)) add(ViolationKind::UnknownPort, q.port, "queue on unknown port");
      declared[{q.port, q.priority}] = q.kind;
      declared_ports.insert(q.port);
    }
    // TT and non-TT flows never share a queue.
    std::map<std::pair<std::string, int>, std::set<bool>> tt_mix;
    for (const auto& f : net_.flows) {
      for (const auto& port : f.route) {
        if (f.kind != TrafficClass::BE) tt_mix[{port, f.priority}].insert(f.kind == TrafficClass::TT);
        if (!declared_ports.count(port)) continue;
        auto it = declared.find({port, f.priority});
        if (it == declared.end()) {
          add(ViolationKind::UnknownQueue, f.id,
              "port " + port + " has no queue for priority " + std::to_string(f.priority));
        } else if ((it->second == TrafficClass::TT) != (f.kind == TrafficClass::TT)) {
          add(ViolationKind::MixedQueue, f.id, std::string(to_string(f.kind)) + " flow in " +
                                                   to_string(it->second) + " queue at " + port);
        }
      }
    }
    for (const auto& [key, kinds] : tt_mix) {
      if (kinds.size() > 1)
        add(ViolationKind::MixedQueue, key.first + "/" + std::to_string(key.second),
            "TT and non-TT flows share a queue");
    }
  }

  const Network& net_;
  std::vector<Violation> out_;
  std::map<std::string, NodeKind> node_kind_;
  std::map<std::string, const Link*> link_;
};

}  // namespace

std::vector<Violation> validate(const Network& net) { return Checker(net).run(); }

}  // namespace tsncalc::net
