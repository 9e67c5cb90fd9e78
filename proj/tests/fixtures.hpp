#pragma once

#include <string>

#include "tsncalc/netmodel/network.hpp"

namespace fixtures {

using namespace tsncalc::net;

// ES1 -> SW1 -> SW2 -> ES2, with ES3 attached to SW1. 100 Mb/s links.
inline Network line(double rate = 100.0) {
  Network n;
  n.nodes = {{"ES1", NodeKind::EndSystem}, {"ES2", NodeKind::EndSystem}, {"ES3", NodeKind::EndSystem},
             {"SW1", NodeKind::Switch}, {"SW2", NodeKind::Switch}};
  n.links = {{"ES1-SW1", "ES1", "SW1", rate, 0, 0}, {"SW1-SW2", "SW1", "SW2", rate, 0, 0},
             {"SW2-ES2", "SW2", "ES2", rate, 0, 0}, {"ES3-SW1", "ES3", "SW1", rate, 0, 0}};
  return n;
}

inline Flow periodic(const std::string& id, TrafficClass kind, double bits, double period, int prio,
                     std::vector<std::string> route) {
  Flow f;
  f.id = id;
  f.kind = kind;
  f.frame_size = bits;
  f.period = period;
  f.priority = prio;
  f.route = std::move(route);
  return f;
}

// Three switches in a ring, one end system each; every flow crosses two ring
// links in the same direction, so the first `flows` (>= 3) close a cycle.
inline Network ring(int flows) {
  Network n;
  n.nodes = {{"S1", NodeKind::Switch}, {"S2", NodeKind::Switch}, {"S3", NodeKind::Switch},
             {"E1", NodeKind::EndSystem}, {"E2", NodeKind::EndSystem}, {"E3", NodeKind::EndSystem}};
  n.links = {{"S1-S2", "S1", "S2", 100, 0, 0}, {"S2-S3", "S2", "S3", 100, 0, 0},
             {"S3-S1", "S3", "S1", 100, 0, 0}, {"E1-S1", "E1", "S1", 100, 0, 0},
             {"E2-S2", "E2", "S2", 100, 0, 0}, {"E3-S3", "E3", "S3", 100, 0, 0},
             {"S1-E1", "S1", "E1", 100, 0, 0}, {"S2-E2", "S2", "E2", 100, 0, 0},
             {"S3-E3", "S3", "E3", 100, 0, 0}};
  n.flows = {periodic("a", TrafficClass::SP, 8000, 1000, 5, {"E1-S1", "S1-S2", "S2-S3", "S3-E3"}),
             periodic("b", TrafficClass::SP, 8000, 1000, 5, {"E2-S2", "S2-S3", "S3-S1", "S1-E1"}),
             periodic("c", TrafficClass::SP, 8000, 1000, 5, {"E3-S3", "S3-S1", "S1-S2", "S2-E2"})};
  n.flows.resize(static_cast<std::size_t>(flows));
  return n;
}

}  // namespace fixtures
