#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "tsncalc/engine/engine.hpp"
#include "tsncalc/error.hpp"

namespace tsncalc::engine {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + p.string());
  out << text;
}

}  // namespace

std::string flows_csv(const AnalysisReport& r) {
  std::string s = "id,priority,architecture,wcd_us,lb_us,jitter_us\n";
  for (const auto& f : r.flows) {
    s += f.id + "," + std::to_string(f.priority) + "," + to_string(r.architecture) + "," +
         num(f.delay) + "," + num(f.lower) + "," + num(f.jitter) + "\n";
  }
  return s;
}

std::string queues_csv(const AnalysisReport& r) {
  std::string s = "node,port,queue,backlog_bits\n";
  for (const auto& q : r.queues)
    s += q.node + "," + q.port + "," + std::to_string(q.priority) + "," + num(q.backlog) + "\n";
  return s;
}

std::string report_json(const AnalysisReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["architecture"] = to_string(r.architecture);
  j["credit_mode"] = r.credit_mode ? ordered_json(to_string(*r.credit_mode)) : ordered_json(nullptr);
  j["horizon_us"] = r.horizon;
  j["fixed_point_iterations"] = r.iterations;
  auto& flows = j["flows"] = ordered_json::array();
  for (const auto& f : r.flows) {
    flows.push_back({{"id", f.id},
                     {"kind", net::to_string(f.kind)},
                     {"priority", f.priority},
                     {"wcd_us", f.delay},
                     {"lb_us", f.lower},
                     {"jitter_us", f.jitter},
                     {"hop_delays_us", f.hops}});
  }
  auto& queues = j["queues"] = ordered_json::array();
  for (const auto& q : r.queues) {
    queues.push_back({{"node", q.node},
                      {"port", q.port},
                      {"queue", q.priority},
                      {"kind", net::to_string(q.kind)},
                      {"delay_us", q.delay ? ordered_json(*q.delay) : ordered_json(nullptr)},
                      {"backlog_bits", q.backlog}});
  }
  auto& shaped = j["shaped_queues"] = ordered_json::array();
  for (const auto& s : r.shaped) {
    shaped.push_back({{"port", s.port},
                      {"id", s.id},
                      {"upstream", s.upstream},
                      {"priority", s.priority},
                      {"delay_us", s.delay},
                      {"backlog_bits", s.backlog},
                      {"clamped", s.clamped}});
  }
  j["warnings"] = r.warnings;
  return j.dump(2) + "\n";
}

void write_report(const AnalysisReport& r, const std::string& dir) {
  std::filesystem::path d(dir);
  std::filesystem::create_directories(d);
  write_file(d / "flows.csv", flows_csv(r));
  write_file(d / "queues.csv", queues_csv(r));
  write_file(d / "report.json", report_json(r));
}

}  // namespace tsncalc::engine
