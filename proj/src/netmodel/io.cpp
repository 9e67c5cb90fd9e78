#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tsncalc/error.hpp"
#include "tsncalc/netmodel/network.hpp"

namespace tsncalc::net {

using nlohmann::json;

namespace {

NodeKind node_kind(const std::string& s) {
  if (s == "end_system" || s == "es") return NodeKind::EndSystem;
  if (s == "switch" || s == "sw") return NodeKind::Switch;
  throw ParseError("unknown node kind '" + s + "'");
}

TrafficClass traffic_class(const std::string& s) {
  if (s == "TT") return TrafficClass::TT;
  if (s == "SP") return TrafficClass::SP;
  if (s == "AVB") return TrafficClass::AVB;
  if (s == "BE") return TrafficClass::BE;
  throw ParseError("unknown traffic kind '" + s + "'");
}

template <typename T>
T req(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": field '" + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> opt(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return req<T>(j, key, where);
}

template <typename T>
T opt_or(const json& j, const char* key, const std::string& where, T fallback) {
  return opt<T>(j, key, where).value_or(fallback);
}

const json& array_at(const json& root, const char* key) {
  static const json empty = json::array();
  if (!root.contains(key)) return empty;
  const json& a = root.at(key);
  if (!a.is_array()) throw ParseError(std::string("'") + key + "' must be an array");
  return a;
}

}  // namespace

Network parse_network(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("network description must be a JSON object");

  Network net;
  for (const auto& n : array_at(root, "nodes")) {
    std::string id = req<std::string>(n, "id", "node");
    net.nodes.push_back({id, node_kind(req<std::string>(n, "kind", "node " + id))});
  }
  for (const auto& l : array_at(root, "links")) {
    std::string id = req<std::string>(l, "id", "link");
    std::string w = "link " + id;
    net.links.push_back({id, req<std::string>(l, "from", w), req<std::string>(l, "to", w),
                         req<double>(l, "rate", w), opt_or(l, "propagation_delay", w, 0.0),
                         opt_or(l, "forwarding_delay", w, 0.0)});
  }
  for (const auto& f : array_at(root, "flows")) {
    Flow flow;
    flow.id = req<std::string>(f, "id", "flow");
    std::string w = "flow " + flow.id;
    flow.kind = traffic_class(req<std::string>(f, "kind", w));
    flow.frame_size = req<double>(f, "frame_size", w);
    flow.period = opt<double>(f, "period", w);
    flow.burst = opt<double>(f, "burst", w);
    flow.rate = opt<double>(f, "rate", w);
    flow.priority = req<int>(f, "priority", w);
    flow.route = req<std::vector<std::string>>(f, "route", w);
    flow.offsets = opt_or(f, "offsets", w, std::vector<double>{});
    net.flows.push_back(std::move(flow));
  }
  for (const auto& g : array_at(root, "gcls")) {
    Gcl gcl;
    gcl.port = req<std::string>(g, "port", "gcl");
    std::string w = "gcl " + gcl.port;
    gcl.period = req<double>(g, "period", w);
    for (const auto& win : array_at(g, "windows"))
      gcl.windows.push_back({req<double>(win, "offset", w), req<double>(win, "length", w)});
    net.gcls.push_back(std::move(gcl));
  }
  if (root.contains("cbs")) {
    const json& c = root.at("cbs");
    net.cbs.max_reservation = opt_or(c, "max_reservation", "cbs", 0.75);
    for (const auto& p : array_at(c, "ports")) {
      CbsPort port;
      port.port = req<std::string>(p, "port", "cbs port");
      for (const auto& k : array_at(p, "classes"))
        port.classes.push_back({req<int>(k, "priority", "cbs " + port.port),
                                req<double>(k, "idle_slope", "cbs " + port.port)});
      net.cbs.ports.push_back(std::move(port));
    }
  }
  if (root.contains("ats")) {
    for (const auto& e : array_at(root.at("ats"), "shaped_queues")) {
      net.ats.shaped_queues.push_back(
          {req<std::string>(e, "port", "shaped queue"), req<std::string>(e, "id", "shaped queue"),
           req<std::string>(e, "upstream", "shaped queue"), req<int>(e, "priority", "shaped queue")});
    }
  }
  for (const auto& q : array_at(root, "queues")) {
    net.queues.push_back({req<std::string>(q, "port", "queue"), req<int>(q, "priority", "queue"),
                          traffic_class(req<std::string>(q, "kind", "queue"))});
  }
  net.precision = opt<double>(root, "precision", "network");
  if (root.contains("be_interferer")) {
    const json& b = root.at("be_interferer");
    if (b.is_boolean()) {
      if (b.get<bool>()) net.be_interferer = kMaxEthernetFrameBits;
    } else if (b.is_number()) {
      net.be_interferer = b.get<double>();
    } else if (!b.is_null()) {
      throw ParseError("be_interferer must be a boolean or a frame size in bits");
    }
  }
  return net;
}

std::string dump_network(const Network& net) {
  json root;
  root["nodes"] = json::array();
  for (const auto& n : net.nodes) root["nodes"].push_back({{"id", n.id}, {"kind", to_string(n.kind)}});
  root["links"] = json::array();
  for (const auto& l : net.links) {
    root["links"].push_back({{"id", l.id},
                             {"from", l.from},
                             {"to", l.to},
                             {"rate", l.rate},
                             {"propagation_delay", l.propagation_delay},
                             {"forwarding_delay", l.forwarding_delay}});
  }
  root["flows"] = json::array();
  for (const auto& f : net.flows) {
    json j = {{"id", f.id},
              {"kind", to_string(f.kind)},
              {"frame_size", f.frame_size},
              {"priority", f.priority},
              {"route", f.route}};
    if (f.period) j["period"] = *f.period;
    if (f.burst) j["burst"] = *f.burst;
    if (f.rate) j["rate"] = *f.rate;
    if (!f.offsets.empty()) j["offsets"] = f.offsets;
    root["flows"].push_back(std::move(j));
  }
  root["gcls"] = json::array();
  for (const auto& g : net.gcls) {
    json w = json::array();
    for (const auto& win : g.windows) w.push_back({{"offset", win.offset}, {"length", win.length}});
    root["gcls"].push_back({{"port", g.port}, {"period", g.period}, {"windows", w}});
  }
  json ports = json::array();
  for (const auto& p : net.cbs.ports) {
    json classes = json::array();
    for (const auto& c : p.classes) classes.push_back({{"priority", c.priority}, {"idle_slope", c.idle_slope}});
    ports.push_back({{"port", p.port}, {"classes", classes}});
  }
  root["cbs"] = {{"max_reservation", net.cbs.max_reservation}, {"ports", ports}};
  json shaped = json::array();
  for (const auto& e : net.ats.shaped_queues) {
    shaped.push_back({{"port", e.port}, {"id", e.id}, {"upstream", e.upstream}, {"priority", e.priority}});
  }
  root["ats"] = {{"shaped_queues", shaped}};
  root["queues"] = json::array();
  for (const auto& q : net.queues) {
    root["queues"].push_back({{"port", q.port}, {"priority", q.priority}, {"kind", to_string(q.kind)}});
  }
  if (net.precision) root["precision"] = *net.precision;
  if (net.be_interferer) root["be_interferer"] = *net.be_interferer;
  return root.dump(2) + "\n";
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path);
  out << dump_network(net);
}

}  // namespace tsncalc::net
