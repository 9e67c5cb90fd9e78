#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "fixtures.hpp"
#include "tsncalc/error.hpp"
#include "tsncalc/testgen/testgen.hpp"

using namespace tsncalc;
using namespace tsncalc::testgen;

namespace {

// Every pair of gate windows on a port, over the whole cycle, must be disjoint.
bool windows_disjoint(const net::Network& n) {
  for (const auto& g : n.gcls)
    for (std::size_t i = 0; i < g.windows.size(); ++i) {
      const auto& a = g.windows[i];
      if (a.offset < -1e-9 || a.offset + a.length > g.period + 1e-9) return false;
      for (std::size_t j = i + 1; j < g.windows.size(); ++j) {
        const auto& b = g.windows[j];
        if (a.offset < b.offset + b.length - 1e-9 && b.offset < a.offset + a.length - 1e-9) return false;
      }
    }
  return true;
}

// BFS hop count, computed separately from the generator.
int hops(const net::Network& n, const std::string& s, const std::string& d) {
  std::map<std::string, int> dist{{s, 0}};
  std::vector<std::string> frontier{s};
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const auto& v : frontier)
      for (const auto& l : n.links)
        if (l.from == v && !dist.count(l.to)) {
          dist[l.to] = dist[v] + 1;
          next.push_back(l.to);
        }
    frontier = next;
  }
  return dist.count(d) ? dist[d] : -1;
}

}  // namespace

TEST_CASE("topologies validate and are connected") {
  for (auto t : {Topology::SRM, Topology::MR, Topology::MM, Topology::ST, Topology::MT}) {
    auto n = make_topology(t);
    CHECK(net::validate(n).empty());
    std::vector<std::string> es;
    for (const auto& x : n.nodes)
      if (x.kind == net::NodeKind::EndSystem) es.push_back(x.id);
    CHECK(es.size() >= 6);
    for (const auto& a : es)
      for (const auto& b : es)
        if (a != b) {
          auto r = shortest_route(n, a, b);
          CHECK(static_cast<int>(r.size()) == hops(n, a, b));
        }
    CHECK(parse_topology(to_string(t)) == t);
  }
  CHECK_THROWS_AS(parse_topology("XX"), ArgumentError);
}

TEST_CASE("generation is deterministic in the seed") {
  GenSpec s;
  s.load = 0.3;
  s.seed = 42;
  auto a = generate(Topology::MM, s);
  auto b = generate(Topology::MM, s);
  CHECK(a == b);
  s.seed = 43;
  CHECK_FALSE(generate(Topology::MM, s) == a);
}

TEST_CASE("zero load yields no flows") {
  GenSpec s;
  s.load = 0.0;
  auto n = generate(Topology::SRM, s);
  CHECK(n.flows.empty());
  CHECK(n.gcls.empty());
}

TEST_CASE("auto flow count reaches the load target") {
  for (double target : {0.1, 0.3, 0.6}) {
    GenSpec s;
    s.load = target;
    s.seed = 7;
    auto n = generate(Topology::MM, s);
    auto st = load_stats(n);
    CHECK(st.average >= target - 1e-12);
    CHECK(st.average <= target + s.tolerance + 1e-12);
    CHECK(st.max <= s.max_link_load + 1e-12);
    CHECK(net::validate(n).empty());
  }
}

TEST_CASE("fixed flow count lands near the target") {
  GenSpec s;
  s.flow_count = 15;
  s.load = 0.17;
  s.priorities = {4, 5};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    s.seed = seed;
    auto n = generate(Topology::MM, s);
    REQUIRE(n.flows.size() == 15);
    auto st = load_stats(n);
    CHECK(st.average >= 0.12);
    CHECK(st.average <= 0.22);
    std::set<int> prios;
    for (const auto& f : n.flows) {
      prios.insert(f.priority);
      CHECK(f.frame_size >= s.min_frame);
      CHECK(f.frame_size <= s.max_frame);
    }
    CHECK(prios == std::set<int>{4, 5});
  }
}

TEST_CASE("bad specs are refused") {
  GenSpec s;
  s.load = 1.2;
  CHECK_THROWS_AS(generate(Topology::MM, s), ArgumentError);
  s = {};
  s.periods.clear();
  CHECK_THROWS_AS(generate(Topology::MM, s), ArgumentError);
  s = {};
  s.flow_count = 2;
  s.load = 0.9;
  CHECK_THROWS_AS(generate(Topology::MM, s), GenerationError);
}

TEST_CASE("a lone TT flow is placed at its cumulative latency") {
  auto n = fixtures::line();
  n.links[0].propagation_delay = 0.5;
  n.links[0].forwarding_delay = 3.0;
  n.links[1].forwarding_delay = 2.0;
  n.flows.push_back(fixtures::periodic("t", net::TrafficClass::TT, 8000, 1000, 7,
                                       {"ES1-SW1", "SW1-SW2", "SW2-ES2"}));
  gcl_place(n);
  const auto& o = n.flows[0].offsets;
  REQUIRE(o.size() == 3);
  CHECK(o[0] == doctest::Approx(0.0));
  CHECK(o[1] == doctest::Approx(80.0 + 0.5 + 3.0));
  CHECK(o[2] == doctest::Approx(o[1] + 80.0 + 2.0));
  CHECK(n.gcls.size() == 3);
  CHECK(net::validate(n).empty());
}

TEST_CASE("colliding TT frames are shifted behind earlier windows") {
  auto n = fixtures::line();
  n.flows.push_back(fixtures::periodic("a", net::TrafficClass::TT, 8000, 1000, 7,
                                       {"ES1-SW1", "SW1-SW2", "SW2-ES2"}));
  n.flows.push_back(fixtures::periodic("b", net::TrafficClass::TT, 4000, 500, 7,
                                       {"ES3-SW1", "SW1-SW2", "SW2-ES2"}));
  gcl_place(n);
  // b (shorter period) goes first: 0, 40, 80 on its three links
  const auto& b = n.flows[1].offsets;
  CHECK(b[0] == doctest::Approx(0.0));
  CHECK(b[1] == doctest::Approx(40.0));
  // a is ready on SW1-SW2 at 80, free since b's window there is [40, 80)
  const auto& a = n.flows[0].offsets;
  CHECK(a[1] == doctest::Approx(80.0));
  // and on SW2-ES2 at 160; b holds [80,120) and [580,620)
  CHECK(a[2] == doctest::Approx(160.0));
  CHECK(windows_disjoint(n));
  CHECK(net::validate(n).empty());
  for (const auto& g : n.gcls) CHECK(g.period == doctest::Approx(1000.0));
}

TEST_CASE("a frame that does not fit is reported") {
  auto n = fixtures::line();
  n.flows.push_back(fixtures::periodic("big", net::TrafficClass::TT, 12000, 100, 7,
                                       {"ES1-SW1", "SW1-SW2", "SW2-ES2"}));
  CHECK_THROWS_AS(gcl_place(n), InfeasibleError);
}

TEST_CASE("ten TT flows give non-overlapping gate lists") {
  GenSpec s;
  s.flow_count = 10;
  s.tt_fraction = 1.0;
  s.load = 0.15;
  s.periods = {500, 1000, 2000};
  s.seed = 3;
  auto n = generate(Topology::SRM, s);
  CHECK(n.flows.size() == 10);
  CHECK(windows_disjoint(n));
  CHECK(net::validate(n).empty());
  for (const auto& f : n.flows) {
    REQUIRE(f.offsets.size() == f.route.size());
    CHECK(f.offsets.back() + f.frame_size / 100.0 <= *f.period + 1e-9);
    for (std::size_t h = 1; h < f.offsets.size(); ++h)
      CHECK(f.offsets[h] >= f.offsets[h - 1] + f.frame_size / 100.0 - 1e-9);
  }
}

TEST_CASE("mixed TT and SP population") {
  GenSpec s;
  s.load = 0.4;
  s.tt_fraction = 0.3;
  s.seed = 11;
  auto n = generate(Topology::MT, s);
  int tt = 0;
  for (const auto& f : n.flows) tt += f.kind == net::TrafficClass::TT;
  CHECK(tt > 0);
  CHECK(tt < static_cast<int>(n.flows.size()));
  CHECK(windows_disjoint(n));
  CHECK(net::validate(n).empty());
}

TEST_CASE("flow tables load over a topology") {
  auto topo = make_topology(Topology::ST);
  std::string csv =
      "id,kind,size_bytes,period_us,priority,source,dest\n"
      "x,SP,500,1000,5,ES1,ES6\n"
      "y,TT,100,500,7,ES3,ES1\n";
  auto n = load_flow_table(csv, topo);
  REQUIRE(n.flows.size() == 2);
  CHECK(n.flows[0].frame_size == 4000);
  CHECK(n.flows[0].route.size() == 4);
  CHECK(n.flows[1].offsets.size() == 4);
  CHECK(net::validate(n).empty());
  CHECK_THROWS_AS(load_flow_table("id,kind\nx,SP\n", topo), ParseError);
  CHECK_THROWS_AS(load_flow_table(csv + "z,QQ,1,1,1,ES1,ES2\n", topo), ParseError);
}
