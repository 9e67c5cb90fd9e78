#include "tsncalc/testgen/testgen.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "tsncalc/error.hpp"

namespace tsncalc::testgen {

using net::Flow;
using net::Network;
using net::NodeKind;
using net::TrafficClass;

const char* to_string(Topology t) {
  switch (t) {
    case Topology::SRM: return "SRM";
    case Topology::MR: return "MR";
    case Topology::MM: return "MM";
    case Topology::ST: return "ST";
    case Topology::MT: return "MT";
  }
  return "?";
}

Topology parse_topology(const std::string& s) {
  for (auto t : {Topology::SRM, Topology::MR, Topology::MM, Topology::ST, Topology::MT})
    if (s == to_string(t)) return t;
  throw ArgumentError("unknown topology '" + s + "' (SRM, MR, MM, ST, MT)");
}

namespace {

struct Builder {
  Network n;
  double rate;
  void sw(const std::string& id) { n.nodes.push_back({id, NodeKind::Switch}); }
  void es(const std::string& id) { n.nodes.push_back({id, NodeKind::EndSystem}); }
  void duplex(const std::string& a, const std::string& b) {
    n.links.push_back({a + "-" + b, a, b, rate, 0.0, 0.0});
    n.links.push_back({b + "-" + a, b, a, rate, 0.0, 0.0});
  }
  // `per` end systems on each listed switch, numbered in order.
  void hosts(const std::vector<std::string>& switches, int per) {
    int k = 1;
    for (const auto& s : switches)
      for (int i = 0; i < per; ++i) {
        std::string e = "ES" + std::to_string(k++);
        es(e);
        duplex(e, s);
      }
  }
};

std::string sw(int i) { return "SW" + std::to_string(i); }

}  // namespace

Network make_topology(Topology t, double rate) {
  Builder b{{}, rate};
  std::vector<std::string> edge;  // switches that host end systems
  switch (t) {
    case Topology::SRM:
      // four-switch ring with one chord
      for (int i = 1; i <= 4; ++i) b.sw(sw(i));
      for (int i = 1; i <= 4; ++i) b.duplex(sw(i), sw(i % 4 + 1));
      b.duplex(sw(1), sw(3));
      b.hosts({sw(1), sw(2), sw(3), sw(4)}, 2);
      break;
    case Topology::MR:
      for (int i = 1; i <= 8; ++i) b.sw(sw(i));
      for (int i = 1; i <= 8; ++i) b.duplex(sw(i), sw(i % 8 + 1));
      for (int i = 1; i <= 8; ++i) edge.push_back(sw(i));
      b.hosts(edge, 1);
      break;
    case Topology::MM:
      // 3x3 grid
      for (int i = 1; i <= 9; ++i) b.sw(sw(i));
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          int id = r * 3 + c + 1;
          if (c < 2) b.duplex(sw(id), sw(id + 1));
          if (r < 2) b.duplex(sw(id), sw(id + 3));
        }
      for (int i = 1; i <= 9; ++i) edge.push_back(sw(i));
      b.hosts(edge, 1);
      break;
    case Topology::ST:
      // root SW1, leaves SW2..SW4
      for (int i = 1; i <= 4; ++i) b.sw(sw(i));
      for (int i = 2; i <= 4; ++i) b.duplex(sw(1), sw(i));
      b.hosts({sw(2), sw(3), sw(4)}, 2);
      break;
    case Topology::MT:
      // root SW1, SW2/SW3 below it, two leaves under each
      for (int i = 1; i <= 7; ++i) b.sw(sw(i));
      b.duplex(sw(1), sw(2));
      b.duplex(sw(1), sw(3));
      b.duplex(sw(2), sw(4));
      b.duplex(sw(2), sw(5));
      b.duplex(sw(3), sw(6));
      b.duplex(sw(3), sw(7));
      b.hosts({sw(4), sw(5), sw(6), sw(7)}, 2);
      break;
  }
  return std::move(b.n);
}

// --- routing -----------------------------------------------------------------

std::vector<std::string> shortest_route(const Network& n, const std::string& src,
                                        const std::string& dst) {
  std::map<std::string, std::vector<const net::Link*>> out, in;
  for (const auto& l : n.links) {
    out[l.from].push_back(&l);
    in[l.to].push_back(&l);
  }
  // hop distance to dst, then walk forward picking the smallest next node
  std::map<std::string, int> dist{{dst, 0}};
  std::deque<std::string> q{dst};
  while (!q.empty()) {
    std::string v = q.front();
    q.pop_front();
    for (const auto* l : in[v])
      if (!dist.count(l->from)) {
        dist[l->from] = dist[v] + 1;
        q.push_back(l->from);
      }
  }
  if (!dist.count(src) || src == dst) return {};
  std::vector<std::string> route;
  std::string cur = src;
  while (cur != dst) {
    const net::Link* best = nullptr;
    for (const auto* l : out[cur]) {
      auto it = dist.find(l->to);
      if (it == dist.end() || it->second != dist[cur] - 1) continue;
      // only switches may relay
      if (l->to != dst && std::any_of(n.nodes.begin(), n.nodes.end(), [&](const net::Node& x) {
            return x.id == l->to && x.kind == NodeKind::EndSystem;
          }))
        continue;
      if (!best || l->to < best->to) best = l;
    }
    if (!best) return {};
    route.push_back(best->id);
    cur = best->to;
  }
  return route;
}

// --- load ----------------------------------------------------------------------

LoadStats load_stats(const Network& n) {
  std::map<std::string, double> rate;
  for (const auto& l : n.links) rate[l.id] = l.rate;
  std::map<std::string, double> use;
  double hops = 0.0;
  for (const auto& f : n.flows) {
    double r = net::periodic_bucket_of(f).rate;
    for (const auto& p : f.route) use[p] += r / rate.at(p);
    hops += static_cast<double>(f.route.size());
  }
  LoadStats s;
  s.used_links = use.size();
  for (const auto& [p, u] : use) {
    s.average += u;
    s.max = std::max(s.max, u);
  }
  if (s.used_links) s.average /= static_cast<double>(s.used_links);
  if (!n.flows.empty()) s.average_hops = hops / static_cast<double>(n.flows.size());
  return s;
}

namespace {

double round_to_byte(double bits) { return 8.0 * std::round(bits / 8.0); }

struct Draft {
  std::string src, dst;
  std::vector<std::string> route;
  double period = 0.0;
  double u = 0.0;  // size quantile
  bool tt = false;
  bool sporadic = false;
  int priority = 0;
};

class Generator {
 public:
  Generator(Topology t, const GenSpec& spec) : spec_(spec), rng_(spec.seed) {
    check_spec();
    base_ = make_topology(t);
    for (const auto& nd : base_.nodes)
      if (nd.kind == NodeKind::EndSystem) hosts_.push_back(nd.id);
    std::sort(hosts_.begin(), hosts_.end());
    for (const auto& l : base_.links) rate_[l.id] = l.rate;
  }

  Network run() {
    if (spec_.load <= 0.0) return finish({});
    for (int attempt = 0; attempt < 100; ++attempt) {
      std::vector<Flow> flows = spec_.flow_count ? fixed_count() : fill();
      if (flows.empty()) continue;
      Network n = finish(flows);
      try {
        gcl_place(n);
      } catch (const InfeasibleError&) {
        continue;
      }
      return n;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "could not reach average load %.3f within 100 attempts", spec_.load);
    throw GenerationError(buf);
  }

 private:
  void check_spec() const {
    if (spec_.load < 0.0 || spec_.load >= 1.0) throw ArgumentError("load must lie in [0, 1)");
    if (spec_.periods.empty()) throw ArgumentError("empty period set");
    if (spec_.priorities.empty()) throw ArgumentError("empty priority set");
    if (!(spec_.min_frame > 0.0 && spec_.min_frame <= spec_.max_frame))
      throw ArgumentError("bad frame-size range");
    if (spec_.tt_fraction < 0.0 || spec_.tt_fraction > 1.0) throw ArgumentError("tt_fraction outside [0, 1]");
  }

  // Endpoints given: src/dst. Otherwise uniform over distinct pairs.
  Draft draw_endpoints(const std::string* src = nullptr, const std::string* dst = nullptr) {
    std::uniform_int_distribution<std::size_t> pick(0, hosts_.size() - 1);
    Draft d;
    if (src) {
      d.src = *src;
      d.dst = *dst;
    } else {
      d.src = hosts_[pick(rng_)];
      do d.dst = hosts_[pick(rng_)];
      while (d.dst == d.src);
    }
    d.route = shortest_route(base_, d.src, d.dst);
    std::uniform_int_distribution<std::size_t> per(0, spec_.periods.size() - 1);
    d.period = spec_.periods[per(rng_)];
    d.u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    std::uniform_int_distribution<std::size_t> pr(0, spec_.priorities.size() - 1);
    d.priority = spec_.priorities[pr(rng_)];
    d.sporadic = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < spec_.sporadic_fraction;
    return d;
  }

  // Sizes follow u^((1-k)/k): k -> 0 gives the smallest frames, k = 1/2 the
  // uniform draw, k -> 1 the largest.
  double size_at(double u, double k) const {
    double e = (1.0 - k) / k;
    return round_to_byte(spec_.min_frame + (spec_.max_frame - spec_.min_frame) * std::pow(u, e));
  }

  Flow make_flow(const Draft& d, double bits, std::size_t index) const {
    Flow f;
    f.id = "f" + std::to_string(index + 1);
    f.kind = d.tt ? TrafficClass::TT : spec_.kind;
    f.frame_size = bits;
    f.priority = d.tt ? spec_.tt_priority : d.priority;
    f.route = d.route;
    if (d.sporadic && !d.tt) {
      f.burst = bits;
      f.rate = bits / d.period;
    } else {
      f.period = d.period;
    }
    return f;
  }

  std::pair<double, double> loads(const std::vector<Draft>& ds, const std::vector<double>& sizes) const {
    std::map<std::string, double> use;
    for (std::size_t i = 0; i < ds.size(); ++i)
      for (const auto& p : ds[i].route) use[p] += sizes[i] / ds[i].period / rate_.at(p);
    double avg = 0.0, mx = 0.0;
    for (const auto& [p, u] : use) {
      avg += u;
      mx = std::max(mx, u);
    }
    return {use.empty() ? 0.0 : avg / static_cast<double>(use.size()), mx};
  }

  std::vector<Flow> fixed_count() {
    const std::size_t n = spec_.flow_count;
    const std::size_t n_tt = static_cast<std::size_t>(std::lround(spec_.tt_fraction * static_cast<double>(n)));
    pos_ = 0;
    std::vector<Draft> ds;
    for (std::size_t i = 0; i < n; ++i) {
      auto [src, dst] = next_pair();
      Draft d = draw_endpoints(&src, &dst);
      d.tt = i < n_tt;
      if (!d.tt) d.priority = spec_.priorities[(i - n_tt) % spec_.priorities.size()];
      ds.push_back(d);
    }
    auto sizes = [&](double k) {
      std::vector<double> s;
      for (const auto& d : ds) s.push_back(size_at(d.u, k));
      return s;
    };
    double lo = 1e-3, hi = 1.0 - 1e-3;
    if (loads(ds, sizes(hi)).first < spec_.load - spec_.tolerance) return {};
    if (loads(ds, sizes(lo)).first > spec_.load + spec_.tolerance) return {};
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      auto [avg, mx] = loads(ds, sizes(mid));
      if (std::fabs(avg - spec_.load) <= spec_.tolerance / 4) {
        lo = hi = mid;
        break;
      }
      (avg < spec_.load ? lo : hi) = mid;
    }
    auto s = sizes(0.5 * (lo + hi));
    auto [avg, mx] = loads(ds, s);
    if (std::fabs(avg - spec_.load) > spec_.tolerance || mx > spec_.max_link_load) return {};
    std::vector<Flow> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(make_flow(ds[i], s[i], i));
    return out;
  }

  // Add random flows while every link stays under the cap, first TT up to its
  // share, then the rest, until the average reaches the target.
  std::vector<Flow> fill() {
    pos_ = 0;
    std::vector<Draft> ds;
    std::vector<double> sizes;
    std::map<std::string, double> use;
    double total = 0.0;  // sum of utilizations over used links
    const double tt_target = spec_.load * spec_.tt_fraction;
    auto avg = [&](double tot, std::size_t links) { return links ? tot / static_cast<double>(links) : 0.0; };
    for (int phase = 0; phase < 2; ++phase) {
      const bool tt = phase == 0;
      const double target = tt ? tt_target : spec_.load;
      if (tt && tt_target <= 0.0) continue;
      int misses = 0;
      while (avg(total, use.size()) < target) {
        if (misses > 500) return {};
        auto [src, dst] = next_pair();
        Draft d = draw_endpoints(&src, &dst);
        d.tt = tt;
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double bits = round_to_byte(spec_.min_frame + (spec_.max_frame - spec_.min_frame) * u(rng_));
        bool ok = true;
        double tot = total;
        std::size_t links = use.size();
        for (const auto& p : d.route) {
          auto it = use.find(p);
          double add = bits / d.period / rate_.at(p);
          if (it == use.end()) ++links;
          if ((it == use.end() ? 0.0 : it->second) + add > spec_.max_link_load) ok = false;
          tot += add;
        }
        if (!ok || avg(tot, links) > target + spec_.tolerance) {
          ++misses;
          continue;
        }
        misses = 0;
        for (const auto& p : d.route) use[p] += bits / d.period / rate_.at(p);
        total = tot;
        ds.push_back(d);
        sizes.push_back(bits);
      }
    }
    std::vector<Flow> out;
    for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(make_flow(ds[i], sizes[i], i));
    return out;
  }

  // Balanced endpoints: per round of |ES| pairs every end system sends once
  // and receives once, so access links share the load evenly.
  std::pair<std::string, std::string> next_pair() {
    const std::size_t H = hosts_.size();
    if (pos_ % H == 0) {
      perm_.resize(H);
      std::iota(perm_.begin(), perm_.end(), std::size_t{0});
      std::shuffle(perm_.begin(), perm_.end(), rng_);
      shift_ = std::uniform_int_distribution<std::size_t>(1, H - 1)(rng_);
    }
    std::size_t j = pos_++ % H;
    return {hosts_[perm_[j]], hosts_[perm_[(j + shift_) % H]]};
  }

  Network finish(std::vector<Flow> flows) const {
    Network n = base_;
    n.flows = std::move(flows);
    n.be_interferer = spec_.be_interferer;
    return n;
  }

  GenSpec spec_;
  std::mt19937_64 rng_;
  Network base_;
  std::vector<std::string> hosts_;
  std::map<std::string, double> rate_;
  std::vector<std::size_t> perm_;
  std::size_t shift_ = 1, pos_ = 0;
};

}  // namespace

Network generate(Topology t, const GenSpec& spec) { return Generator(t, spec).run(); }

// --- GCL placement ---------------------------------------------------------------

void gcl_place(Network& n) {
  std::vector<Flow*> tt;
  for (auto& f : n.flows)
    if (f.kind == TrafficClass::TT) tt.push_back(&f);
  n.gcls.clear();
  if (tt.empty()) return;
  long long hyper = 1;
  for (auto* f : tt) {
    if (!f->period) throw ArgumentError("TT flow " + f->id + " has no period");
    long long p = std::llround(*f->period);
    if (std::fabs(static_cast<double>(p) - *f->period) > 1e-9)
      throw ArgumentError("TT periods must be whole microseconds for the hyperperiod");
    hyper = std::lcm(hyper, p);
  }
  const double T = static_cast<double>(hyper);
  std::sort(tt.begin(), tt.end(), [](const Flow* a, const Flow* b) {
    if (*a->period != *b->period) return *a->period < *b->period;
    return a->id < b->id;
  });
  std::map<std::string, const net::Link*> links;
  for (const auto& l : n.links) links[l.id] = &l;
  std::map<std::string, std::vector<std::pair<double, double>>> busy;  // port -> [start, end)

  auto free_at = [&](const std::string& port, double o, double len, double period) {
    const auto& w = busy[port];
    for (double k = 0; k < T / period - 0.5; ++k) {
      double s = o + k * period, e = s + len;
      for (const auto& [bs, be] : w)
        if (s < be - 1e-9 && bs < e - 1e-9) return false;
    }
    return true;
  };

  for (Flow* f : tt) {
    f->offsets.clear();
    const double P = *f->period;
    double ready = 0.0;
    for (std::size_t h = 0; h < f->route.size(); ++h) {
      const auto& port = f->route[h];
      const net::Link* l = links.at(port);
      double len = f->frame_size / l->rate;
      // candidates: the ready time and every window end after it (mod P)
      std::set<double> cand{ready};
      for (const auto& [bs, be] : busy[port]) {
        double e = std::fmod(be, P);
        for (double c = e; c < P; c += P)
          if (c > ready) cand.insert(c);
      }
      double chosen = -1.0;
      for (double c : cand) {
        if (c + len > P + 1e-9) break;
        if (free_at(port, c, len, P)) {
          chosen = c;
          break;
        }
      }
      if (chosen < 0.0)
        throw InfeasibleError("no free slot for TT flow " + f->id + " on link " + port);
      f->offsets.push_back(chosen);
      for (double k = 0; k < T / P - 0.5; ++k) busy[port].push_back({chosen + k * P, chosen + k * P + len});
      ready = chosen + len + l->propagation_delay + l->forwarding_delay;
    }
  }
  for (auto& [port, w] : busy) {
    std::sort(w.begin(), w.end());
    net::Gcl g;
    g.port = port;
    g.period = T;
    for (const auto& [s, e] : w) g.windows.push_back({s, e - s});
    n.gcls.push_back(std::move(g));
  }
}

// --- CSV flow tables -------------------------------------------------------------

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    auto b = cell.find_first_not_of(" \t\r");
    auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

Network load_flow_table(const std::string& csv_text, const Network& topology) {
  Network n = topology;
  n.flows.clear();
  std::istringstream in(csv_text);
  std::string line;
  std::vector<std::string> header;
  std::map<std::string, std::size_t> col;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv(line);
    if (header.empty()) {
      header = cells;
      for (std::size_t i = 0; i < cells.size(); ++i) col[cells[i]] = i;
      for (const char* c : {"id", "kind", "size_bytes", "period_us", "priority", "source", "dest"})
        if (!col.count(c)) throw ParseError(std::string("flow table lacks column ") + c);
      continue;
    }
    auto get = [&](const char* c) -> const std::string& {
      std::size_t i = col.at(c);
      if (i >= cells.size()) throw ParseError("line " + std::to_string(lineno) + ": missing " + c);
      return cells[i];
    };
    Flow f;
    f.id = get("id");
    std::string kind = get("kind");
    if (kind == "TT") f.kind = TrafficClass::TT;
    else if (kind == "SP") f.kind = TrafficClass::SP;
    else if (kind == "AVB" || kind == "RC") f.kind = TrafficClass::AVB;
    else if (kind == "BE") f.kind = TrafficClass::BE;
    else throw ParseError("line " + std::to_string(lineno) + ": unknown kind " + kind);
    try {
      f.frame_size = 8.0 * std::stod(get("size_bytes"));
      f.period = std::stod(get("period_us"));
      f.priority = std::stoi(get("priority"));
    } catch (const std::logic_error&) {
      throw ParseError("line " + std::to_string(lineno) + ": bad number");
    }
    f.route = shortest_route(n, get("source"), get("dest"));
    if (f.route.empty())
      throw ParseError("line " + std::to_string(lineno) + ": no route from " + get("source") + " to " +
                       get("dest"));
    n.flows.push_back(std::move(f));
  }
  gcl_place(n);
  return n;
}

}  // namespace tsncalc::testgen
