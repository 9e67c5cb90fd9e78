#include "tsncalc/engine/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <set>
#include <thread>

#include "tsncalc/error.hpp"
#include "tsncalc/minplus/curve.hpp"
#include "tsncalc/shapers/shapers.hpp"

namespace tsncalc::engine {

using minplus::Curve;
using net::Flow;
using net::TrafficClass;

const char* to_string(Architecture a) {
  switch (a) {
    case Architecture::TAS: return "TAS";
    case Architecture::ATS: return "ATS";
    case Architecture::CBS: return "CBS";
    case Architecture::SP: return "SP";
    case Architecture::TAS_SP: return "TAS+SP";
    case Architecture::TAS_CBS: return "TAS+CBS";
    case Architecture::TAS_ATS_SP: return "TAS+ATS+SP";
    case Architecture::TAS_ATS_CBS: return "TAS+ATS+CBS";
  }
  return "?";
}

const char* to_string(CreditMode m) { return m == CreditMode::Frozen ? "frozen" : "nonfrozen"; }

const std::vector<Architecture>& all_architectures() {
  static const std::vector<Architecture> all{
      Architecture::TAS,    Architecture::ATS,     Architecture::CBS,        Architecture::SP,
      Architecture::TAS_SP, Architecture::TAS_CBS, Architecture::TAS_ATS_SP, Architecture::TAS_ATS_CBS};
  return all;
}

Architecture parse_architecture(const std::string& s) {
  std::string u;
  for (char c : s) u += c == '_' ? '+' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto a : all_architectures())
    if (u == to_string(a)) return a;
  throw ArgumentError("unknown architecture '" + s + "'");
}

CreditMode parse_credit_mode(const std::string& s) {
  if (s == "frozen" || s == "F" || s == "f") return CreditMode::Frozen;
  if (s == "nonfrozen" || s == "non-frozen" || s == "NF" || s == "nf") return CreditMode::NonFrozen;
  throw ArgumentError("unknown credit mode '" + s + "' (frozen or nonfrozen)");
}

bool has_tas(Architecture a) {
  return a == Architecture::TAS || a == Architecture::TAS_SP || a == Architecture::TAS_CBS ||
         a == Architecture::TAS_ATS_SP || a == Architecture::TAS_ATS_CBS;
}
bool has_ats(Architecture a) {
  return a == Architecture::ATS || a == Architecture::TAS_ATS_SP || a == Architecture::TAS_ATS_CBS;
}
bool has_cbs(Architecture a) {
  return a == Architecture::CBS || a == Architecture::TAS_CBS || a == Architecture::TAS_ATS_CBS;
}

const FlowResult& AnalysisReport::flow(const std::string& id) const {
  for (const auto& f : flows)
    if (f.id == id) return f;
  throw ArgumentError("report has no flow " + id);
}

const QueueResult& AnalysisReport::queue(const std::string& port, int priority) const {
  for (const auto& q : queues)
    if (q.port == port && q.priority == priority) return q;
  throw ArgumentError("report has no queue " + port + "/" + std::to_string(priority));
}

double default_horizon(const net::Network& network) {
  double m = 0.0;
  for (const auto& g : network.gcls) m = std::max(m, g.period);
  for (const auto& f : network.flows)
    if (f.period) m = std::max(m, *f.period);
  if (m <= 0.0) {
    for (const auto& f : network.flows)
      if (f.burst && f.rate && *f.rate > 0.0) m = std::max(m, *f.burst / *f.rate);
  }
  return 4.0 * (m > 0.0 ? m : 1000.0);
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Runs fn(0..n-1); with several threads the lowest-index failure is rethrown
// so errors do not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errs(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next++;
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        errs[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  unsigned k = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

std::string qname(const std::string& port, int prio) { return port + "/" + std::to_string(prio); }

struct Queue {
  std::string node, port;
  int priority = 0;
  std::size_t port_index = 0;
  std::size_t class_index = 0;  // 0 = highest priority at the port
  std::vector<std::size_t> flows;
  double rate = 0.0;
  double lmax = 0.0, lmin = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> deps;

  Curve arrival, service;
  std::optional<Curve> shaping;
  double delay = 0.0, backlog = 0.0;
};

struct Port {
  std::string id;
  const net::Link* link = nullptr;
  const net::Gcl* gcl = nullptr;  // TAS architectures with at least one window
  std::vector<std::size_t> classes;
  std::vector<double> l_lower;
  std::optional<Curve> alpha_tt, alpha_gbtt, beta_tt;
  std::vector<double> idle;
  std::vector<shapers::CreditBounds> credit;
};

class Analyzer {
 public:
  Analyzer(const net::Network& n, Architecture arch, const Options& opt)
      : net_(n), idx_(n), arch_(arch), opt_(opt) {
    threads_ = opt.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.threads;
    horizon_ = opt.horizon.value_or(default_horizon(n));
    if (!(horizon_ > 0.0)) throw ArgumentError("horizon must be positive");
    if (has_tas(arch) && has_cbs(arch)) mode_ = opt.credit_mode.value_or(CreditMode::Frozen);
  }

  AnalysisReport run() {
    classify();
    build_queues();
    build_ports();
    AnalysisReport r;
    r.architecture = arch_;
    if (has_tas(arch_) && has_cbs(arch_)) r.credit_mode = mode_;
    r.horizon = horizon_;
    if (has_ats(arch_)) {
      parallel_for(queues_.size(), threads_, [&](std::size_t q) { ats_shared(q); });
      shaped_queues(r);
    } else {
      r.iterations = evaluate();
    }
    assemble(r);
    return r;
  }

 private:
  // --- setup ---------------------------------------------------------------

  bool scheduled(const Flow& f) const { return f.kind == TrafficClass::TT && has_tas(arch_); }
  bool analyzed(const Flow& f) const {
    return f.kind != TrafficClass::BE && !scheduled(f);
  }

  void classify() {
    if (arch_ == Architecture::TAS) {
      for (const auto& f : net_.flows)
        if (f.kind == TrafficClass::SP || f.kind == TrafficClass::AVB)
          throw ConfigurationError("architecture TAS carries only TT traffic, but flow " + f.id +
                                   " is " + net::to_string(f.kind));
    }
    buckets_.resize(net_.flows.size());
    for (std::size_t i = 0; i < net_.flows.size(); ++i)
      if (analyzed(net_.flows[i])) buckets_[i] = net::periodic_bucket_of(net_.flows[i]);
  }

  void build_queues() {
    std::map<std::pair<std::string, int>, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < net_.flows.size(); ++i) {
      const Flow& f = net_.flows[i];
      if (!analyzed(f)) continue;
      for (const auto& p : f.route) members[{p, f.priority}].push_back(i);
    }
    // Ordering key: node, port, class index (higher priority first).
    std::vector<std::pair<std::string, int>> keys;
    for (const auto& [k, v] : members) keys.push_back(k);
    std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
      const auto& la = idx_.link(a.first);
      const auto& lb = idx_.link(b.first);
      if (la.from != lb.from) return la.from < lb.from;
      if (a.first != b.first) return a.first < b.first;
      return a.second > b.second;
    });
    for (const auto& k : keys) {
      Queue q;
      q.port = k.first;
      q.priority = k.second;
      const auto& link = idx_.link(k.first);
      q.node = link.from;
      q.rate = link.rate;
      q.flows = members[k];
      for (std::size_t f : q.flows) {
        q.lmax = std::max(q.lmax, net_.flows[f].frame_size);
        q.lmin = std::min(q.lmin, net_.flows[f].frame_size);
      }
      queue_of_[k] = queues_.size();
      queues_.push_back(std::move(q));
    }
    hop_queue_.assign(net_.flows.size(), {});
    for (std::size_t i = 0; i < net_.flows.size(); ++i) {
      const Flow& f = net_.flows[i];
      if (!analyzed(f)) continue;
      for (const auto& p : f.route) hop_queue_[i].push_back(queue_of_.at({p, f.priority}));
    }
  }

  double l_lower(const std::string& port, int prio) const {
    double l = net_.be_interferer.value_or(0.0);
    for (std::size_t f : idx_.flows_at(port)) {
      const Flow& fl = net_.flows[f];
      if (fl.kind == TrafficClass::BE || (analyzed(fl) && fl.priority < prio))
        l = std::max(l, fl.frame_size);
    }
    return l;
  }

  void build_ports() {
    std::map<std::string, std::size_t> port_index;
    for (std::size_t q = 0; q < queues_.size(); ++q) {
      auto [it, fresh] = port_index.emplace(queues_[q].port, ports_.size());
      if (fresh) {
        Port p;
        p.id = queues_[q].port;
        p.link = &idx_.link(p.id);
        ports_.push_back(std::move(p));
      }
      queues_[q].port_index = it->second;
      ports_[it->second].classes.push_back(q);  // already in priority order
    }
    if (has_tas(arch_)) check_tt_ports();
    parallel_for(ports_.size(), threads_, [&](std::size_t i) { setup_port(ports_[i]); });

    for (auto& q : queues_) {
      std::set<std::size_t> deps;
      for (std::size_t f : q.flows) {
        int h = idx_.hop_of(f, q.port);
        if (h > 0) deps.insert(hop_queue_[f][static_cast<std::size_t>(h - 1)]);
      }
      const Port& p = ports_[q.port_index];
      // Leftover service needs the arrivals of the class just above.
      if (!has_cbs(arch_) && q.class_index > 0) deps.insert(p.classes[q.class_index - 1]);
      q.deps.assign(deps.begin(), deps.end());
    }
  }

  void check_tt_ports() const {
    for (const auto& f : net_.flows) {
      if (!scheduled(f)) continue;
      for (const auto& p : f.route) {
        const net::Gcl* g = idx_.gcl(p);
        if (!g || g->windows.empty())
          throw ConfigurationError("TT flow " + f.id + " crosses port " + p +
                                   " which has no gate control list");
      }
    }
  }

  void setup_port(Port& p) {
    const double C = p.link->rate;
    const double H2 = 2.0 * horizon_;
    for (std::size_t k = 0; k < p.classes.size(); ++k) {
      Queue& q = queues_[p.classes[k]];
      q.class_index = k;
      p.l_lower.push_back(l_lower(p.id, q.priority));
    }
    if (has_tas(arch_)) {
      const net::Gcl* g = idx_.gcl(p.id);
      if (g && !g->windows.empty()) {
        p.gcl = g;
        auto gb = net::guard_bands(idx_, p.id);
        p.alpha_gbtt = shapers::tt_arrival_curve(*g, gb, C, shapers::TtVariant::GuardBandTT, H2);
        if (has_cbs(arch_)) {
          p.alpha_tt = shapers::tt_arrival_curve(*g, gb, C, shapers::TtVariant::TT, H2);
          p.beta_tt = shapers::tt_service_curve(*g, C, H2);
        }
      }
    }
    if (!has_cbs(arch_)) return;

    // Idle slopes: configured, or the reservable share split by class load.
    double total = 0.0;
    std::vector<double> load(p.classes.size(), 0.0);
    for (std::size_t k = 0; k < p.classes.size(); ++k) {
      for (std::size_t f : queues_[p.classes[k]].flows) load[k] += buckets_[f].rate;
      total += load[k];
    }
    std::vector<shapers::CbsClassInput> in;
    for (std::size_t k = 0; k < p.classes.size(); ++k) {
      const Queue& q = queues_[p.classes[k]];
      double oper = idx_.idle_slope(p.id, q.priority)
                        .value_or(net_.cbs.max_reservation * C * load[k] / total);
      double idsl = shapers::effective_idle_slope(oper, p.gcl);
      p.idle.push_back(idsl);
      in.push_back({idsl, q.lmax});
    }
    shapers::GuardBandEnvelope env;
    if (p.gcl) env = shapers::guard_band_envelope(*p.gcl, net::guard_bands(idx_, p.id), C);
    for (std::size_t k = 0; k < p.classes.size(); ++k) {
      std::string ctx = "port " + p.id + " class " + std::to_string(queues_[p.classes[k]].priority);
      p.credit.push_back(shapers::cbs_credit_bounds(C, in, k, p.l_lower[k], env, ctx));
    }
  }

  // --- per-queue steps -----------------------------------------------------

  const Curve* blocking(const Port& p, bool guard_band) const {
    if (!p.gcl) return nullptr;
    return guard_band ? &*p.alpha_gbtt : &*p.alpha_tt;
  }

  Curve arrival(std::size_t qi, const std::vector<double>& D) const {
    const Queue& q = queues_[qi];
    std::map<std::size_t, shapers::UpstreamGroup> groups;  // kNone = source
    for (std::size_t f : q.flows) {
      int h = idx_.hop_of(f, q.port);
      const auto& hops = hop_queue_[f];
      if (h == 0) {
        auto& g = groups[kNone];
        g.from_source = true;
        g.flows.push_back(buckets_[f]);
        continue;
      }
      std::size_t up = hops[static_cast<std::size_t>(h - 1)];
      double acc = 0.0;
      for (int k = 0; k + 1 < h; ++k) acc += D[hops[static_cast<std::size_t>(k)]];
      auto& g = groups[up];
      g.flows.push_back({buckets_[f].burst + buckets_[f].rate * acc, buckets_[f].rate});
      g.delay = D[up];
      g.link_rate = queues_[up].rate;
      g.max_frame = queues_[up].lmax;
      if (has_cbs(arch_)) g.cbs_shaping = queues_[up].shaping;
    }
    std::vector<shapers::UpstreamGroup> list;
    for (auto& [k, g] : groups) list.push_back(std::move(g));
    return shapers::unshaped_queue_arrival(list);
  }

  // Service, and shaping for CBS; needs arrivals of higher classes in place.
  void service(std::size_t qi) {
    Queue& q = queues_[qi];
    const Port& p = ports_[q.port_index];
    const double C = q.rate;
    std::string ctx = "queue " + qname(q.port, q.priority);
    if (has_cbs(arch_)) {
      const auto& cb = p.credit[q.class_index];
      bool frozen = mode_ == CreditMode::Frozen;
      double c = frozen ? cb.c_max : cb.c_max_nf;
      if (!p.gcl) c = cb.c_max;
      const double idsl = p.idle[q.class_index];
      q.service = shapers::cbs_service_curve(idsl, c, C, blocking(p, frozen));
      q.shaping = shapers::cbs_shaping_curve(idsl, c, cb.c_min, C,
                                             p.beta_tt ? &*p.beta_tt : nullptr);
      return;
    }
    std::vector<Curve> higher;
    for (std::size_t k = 0; k < q.class_index; ++k) higher.push_back(queues_[p.classes[k]].arrival);
    const Curve* blk = blocking(p, true);
    auto closure = arch_ == Architecture::ATS ? shapers::Closure::NonNegative
                                              : shapers::Closure::Running;
    q.service = shapers::sp_service_curve(C, blk ? *blk : Curve::zero(), higher,
                                          p.l_lower[q.class_index], closure, ctx);
  }

  void bounds(std::size_t qi) {
    Queue& q = queues_[qi];
    std::string ctx = "queue " + qname(q.port, q.priority);
    q.delay = minplus::hdev(q.arrival, q.service, minplus::kInfinity, ctx).value;
    q.backlog = minplus::vdev(q.arrival, q.service, minplus::kInfinity, ctx).value;
  }

  void ats_shared(std::size_t qi) {
    Queue& q = queues_[qi];
    std::vector<net::LeakyBucket> b;
    for (std::size_t f : q.flows) b.push_back(buckets_[f]);
    q.arrival = shapers::shared_queue_arrival_ats(b);
  }

  // --- evaluation order ----------------------------------------------------

  int evaluate() {
    const std::size_t n = queues_.size();
    std::vector<std::size_t> indeg(n, 0);
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t q = 0; q < n; ++q)
      for (std::size_t d : queues_[q].deps) {
        ++indeg[q];
        out[d].push_back(q);
      }
    std::vector<std::size_t> level;
    for (std::size_t q = 0; q < n; ++q)
      if (indeg[q] == 0) level.push_back(q);
    std::vector<double> D(n, 0.0);
    std::size_t done = 0;
    std::vector<std::size_t> order;
    while (!level.empty()) {
      parallel_for(level.size(), threads_, [&](std::size_t i) {
        std::size_t q = level[i];
        queues_[q].arrival = arrival(q, D);
      });
      // Service may read the arrival of the class above, which sits in an
      // earlier level, so this second pass is safe to run in parallel too.
      parallel_for(level.size(), threads_, [&](std::size_t i) {
        std::size_t q = level[i];
        service(q);
        bounds(q);
        D[q] = queues_[q].delay;
      });
      done += level.size();
      std::vector<std::size_t> next;
      for (std::size_t q : level)
        for (std::size_t s : out[q])
          if (--indeg[s] == 0) next.push_back(s);
      std::sort(next.begin(), next.end());
      level = std::move(next);
    }
    if (done == n) return 0;
    if (!opt_.fixed_point) throw CycleError(describe_cycle(indeg));
    return fixed_point();
  }

  std::string describe_cycle(const std::vector<std::size_t>& indeg) const {
    // Walk dependencies backwards inside the unresolved set until a queue repeats.
    std::size_t start = 0;
    while (indeg[start] == 0) ++start;
    std::vector<std::size_t> path;
    std::map<std::size_t, std::size_t> seen;
    std::size_t cur = start;
    while (!seen.count(cur)) {
      seen[cur] = path.size();
      path.push_back(cur);
      for (std::size_t d : queues_[cur].deps)
        if (indeg[d] > 0) {
          cur = d;
          break;
        }
    }
    std::vector<std::size_t> cyc(path.begin() + static_cast<long>(seen[cur]), path.end());
    std::reverse(cyc.begin(), cyc.end());  // upstream first
    std::string s = "cyclic queue dependency: ";
    for (std::size_t q : cyc) s += qname(queues_[q].port, queues_[q].priority) + " -> ";
    s += qname(queues_[cyc.front()].port, queues_[cyc.front()].priority);
    s += " (use the fixed-point option to iterate)";
    return s;
  }

  int fixed_point() {
    const std::size_t n = queues_.size();
    std::vector<double> D(n);
    for (std::size_t q = 0; q < n; ++q) D[q] = queues_[q].lmin / queues_[q].rate;
    // CBS service and shaping do not depend on arrivals; have them ready for
    // the first round of upstream shaping terms.
    if (has_cbs(arch_)) parallel_for(n, threads_, [&](std::size_t q) { service(q); });
    for (int it = 1; it <= 100; ++it) {
      parallel_for(n, threads_, [&](std::size_t q) { queues_[q].arrival = arrival(q, D); });
      parallel_for(n, threads_, [&](std::size_t q) {
        service(q);
        bounds(q);
      });
      double change = 0.0;
      for (std::size_t q = 0; q < n; ++q) {
        change = std::max(change, std::fabs(queues_[q].delay - D[q]));
        D[q] = queues_[q].delay;
      }
      if (change < 0.01) return it;
    }
    throw DivergenceError("fixed-point iteration did not settle within 100 rounds");
  }

  // --- ATS shaped queues ---------------------------------------------------

  void shaped_queues(AnalysisReport& r) {
    parallel_for(queues_.size(), threads_, [&](std::size_t q) {
      service(q);
      bounds(q);
    });
    // (port, shaped queue id) -> flows
    struct Key {
      std::string port, id, upstream;
      int priority;
      bool operator<(const Key& o) const {
        return std::tie(port, id, upstream, priority) < std::tie(o.port, o.id, o.upstream, o.priority);
      }
    };
    std::map<Key, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < net_.flows.size(); ++i) {
      const Flow& f = net_.flows[i];
      if (!analyzed(f)) continue;
      for (std::size_t h = 1; h < f.route.size(); ++h) {
        const std::string& port = f.route[h];
        const std::string& up = f.route[h - 1];
        std::string id = up + ":" + std::to_string(f.priority);
        for (const auto& e : net_.ats.shaped_queues)
          if (e.port == port && e.upstream == up && e.priority == f.priority) id = e.id;
        groups[{port, id, up, f.priority}].push_back(i);
      }
    }
    std::vector<std::pair<Key, std::vector<std::size_t>>> list(groups.begin(), groups.end());
    r.shaped.resize(list.size());
    parallel_for(list.size(), threads_, [&](std::size_t k) {
      const auto& [key, flows] = list[k];
      const Queue& up = queues_[queue_of_.at({key.upstream, key.priority})];
      shapers::UpstreamGroup g;
      double lmin = std::numeric_limits<double>::infinity();
      for (std::size_t f : flows) {
        g.flows.push_back(buckets_[f]);
        lmin = std::min(lmin, net_.flows[f].frame_size);
      }
      g.delay = up.delay;
      g.link_rate = up.rate;
      g.max_frame = up.lmax;
      if (has_cbs(arch_)) g.cbs_shaping = up.shaping;
      auto res = shapers::shaped_queue_analysis(g, lmin);
      ShapedQueueReport& s = r.shaped[k];
      s.port = key.port;
      s.id = key.id;
      s.upstream = key.upstream;
      s.priority = key.priority;
      s.delay = res.delay;
      s.backlog = res.backlog;
      s.upstream_delay = up.delay;
      s.min_frame = lmin;
      s.link_rate = up.rate;
      s.clamped = res.clamped;
    });
    for (const auto& s : r.shaped)
      if (s.clamped)
        r.warnings.push_back("shaped queue " + s.port + ":" + s.id +
                             ": upstream bound below l_min/C, delay clamped to 0");
  }

  // --- report --------------------------------------------------------------

  void assemble(AnalysisReport& r) {
    for (std::size_t i = 0; i < net_.flows.size(); ++i) {
      const Flow& f = net_.flows[i];
      if (f.kind == TrafficClass::BE) continue;
      FlowResult fr;
      fr.id = f.id;
      fr.priority = f.priority;
      fr.kind = f.kind;
      if (scheduled(f)) {
        std::vector<const net::Link*> route;
        for (const auto& p : f.route) route.push_back(&idx_.link(p));
        auto tb = shapers::tas_flow_bounds(f, route, net_.precision.value_or(0.0));
        fr.delay = tb.delay;
        fr.lower = tb.delay;
        fr.jitter = tb.jitter;
      } else {
        double D = 0.0, d = 0.0;
        for (std::size_t h = 0; h < f.route.size(); ++h) {
          const auto& link = idx_.link(f.route[h]);
          double dq = queues_[hop_queue_[i][h]].delay;
          double fixed = link.propagation_delay + link.forwarding_delay;
          fr.hops.push_back(dq);
          D += dq + fixed;
          d += f.frame_size / link.rate + fixed;
        }
        double last_fwd = idx_.link(f.route.back()).forwarding_delay;
        fr.delay = D - last_fwd;
        fr.lower = d - last_fwd;
        fr.jitter = fr.delay - fr.lower;
      }
      r.flows.push_back(std::move(fr));
    }
    std::sort(r.flows.begin(), r.flows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

    const TrafficClass qkind = has_cbs(arch_) ? TrafficClass::AVB : TrafficClass::SP;
    for (const auto& q : queues_) {
      QueueResult qr;
      qr.node = q.node;
      qr.port = q.port;
      qr.priority = q.priority;
      qr.kind = qkind;
      qr.delay = q.delay;
      qr.backlog = q.backlog;
      qr.max_frame = q.lmax;
      qr.min_frame = q.lmin;
      r.queues.push_back(std::move(qr));
    }
    // TT queues: one per (port, priority), backlog = largest assigned frame.
    std::map<std::pair<std::string, int>, std::vector<double>> tt;
    for (const auto& f : net_.flows)
      if (scheduled(f))
        for (const auto& p : f.route) tt[{p, f.priority}].push_back(f.frame_size);
    for (const auto& [k, frames] : tt) {
      QueueResult qr;
      qr.node = idx_.link(k.first).from;
      qr.port = k.first;
      qr.priority = k.second;
      qr.kind = TrafficClass::TT;
      qr.backlog = shapers::tas_queue_backlog(frames);
      qr.max_frame = qr.backlog;
      qr.min_frame = *std::min_element(frames.begin(), frames.end());
      r.queues.push_back(std::move(qr));
    }
    std::sort(r.queues.begin(), r.queues.end(), [](const auto& a, const auto& b) {
      return std::tie(a.port, a.priority) < std::tie(b.port, b.priority);
    });
    std::sort(r.shaped.begin(), r.shaped.end(), [](const auto& a, const auto& b) {
      return std::tie(a.port, a.id) < std::tie(b.port, b.id);
    });
  }

  const net::Network& net_;
  net::NetworkIndex idx_;
  Architecture arch_;
  Options opt_;
  CreditMode mode_ = CreditMode::Frozen;
  unsigned threads_ = 1;
  double horizon_ = 0.0;

  std::vector<net::LeakyBucket> buckets_;
  std::vector<Queue> queues_;
  std::vector<Port> ports_;
  std::map<std::pair<std::string, int>, std::size_t> queue_of_;
  std::vector<std::vector<std::size_t>> hop_queue_;
};

}  // namespace

AnalysisReport analyze(const net::Network& network, Architecture arch, const Options& opt) {
  if (opt.credit_mode && !(has_tas(arch) && has_cbs(arch))) {
    throw ArgumentError(std::string("credit mode applies to TAS+CBS and TAS+ATS+CBS, not ") +
                        to_string(arch));
  }
  auto violations = net::validate(network);
  if (!violations.empty()) {
    std::string msg = "network does not validate:";
    for (std::size_t i = 0; i < violations.size() && i < 10; ++i)
      msg += "\n  " + std::string(net::to_string(violations[i].kind)) + " " + violations[i].subject +
             ": " + violations[i].message;
    if (violations.size() > 10) msg += "\n  ...";
    throw ValidationError(msg);
  }
  return Analyzer(network, arch, opt).run();
}

// --- closed-form ATS ---------------------------------------------------------

double ats_delta(const net::NetworkIndex& idx, const std::string& port, const std::string& flow) {
  const Flow& f = idx.flow(flow);
  const double C = idx.link(port).rate;
  double r_high = 0.0, l_same = 0.0;
  bool found = false;
  for (std::size_t i : idx.flows_at(port)) {
    const Flow& g = idx.network().flows[i];
    if (g.kind == TrafficClass::BE) continue;
    if (g.priority > f.priority) r_high += net::periodic_bucket_of(g).rate;
    if (g.priority == f.priority) l_same = std::max(l_same, g.frame_size);
    if (g.id == f.id) found = true;
  }
  if (!found) throw ArgumentError("flow " + flow + " does not cross port " + port);
  if (r_high >= C) throw InstabilityError("higher priorities saturate port " + port);
  return l_same / (C - r_high) - l_same / C;
}

double ats_closed_form_delay(const net::NetworkIndex& idx, const AnalysisReport& report,
                             const std::string& port, const std::string& flow) {
  if (!has_ats(report.architecture)) throw ArgumentError("closed-form cross-check needs an ATS report");
  const Flow& f = idx.flow(flow);
  const auto& q = report.queue(port, f.priority);
  return q.delay.value_or(0.0) - ats_delta(idx, port, flow);
}

double ats_closed_form_e2e(const net::NetworkIndex& idx, const AnalysisReport& report,
                           const std::string& flow) {
  if (!has_ats(report.architecture)) throw ArgumentError("closed-form cross-check needs an ATS report");
  const Flow& f = idx.flow(flow);
  double d = report.flow(flow).delay;
  for (const auto& p : f.route) d -= ats_delta(idx, p, flow);
  return d;
}

// --- difference ratios -------------------------------------------------------

const char* to_string(Metric m) {
  switch (m) {
    case Metric::Delay: return "delay";
    case Metric::Jitter: return "jitter";
    case Metric::Backlog: return "backlog";
  }
  return "?";
}

Metric parse_metric(const std::string& s) {
  for (auto m : {Metric::Delay, Metric::Jitter, Metric::Backlog})
    if (s == to_string(m)) return m;
  throw ArgumentError("unknown metric '" + s + "'");
}

namespace {

std::map<std::string, double> items_of(const AnalysisReport& r, Metric m) {
  std::map<std::string, double> out;
  if (m == Metric::Backlog) {
    for (const auto& q : r.queues) out[qname(q.port, q.priority)] = q.backlog;
  } else {
    for (const auto& f : r.flows) out[f.id] = m == Metric::Delay ? f.delay : f.jitter;
  }
  return out;
}

}  // namespace

RatioResult difference_ratio(const AnalysisReport& r1, const AnalysisReport& r2, Metric metric) {
  auto a = items_of(r1, metric), b = items_of(r2, metric);
  if (a.size() != b.size() ||
      !std::equal(a.begin(), a.end(), b.begin(), [](const auto& x, const auto& y) { return x.first == y.first; })) {
    throw ArgumentError("difference ratio needs reports over the same items");
  }
  RatioResult out;
  double sum = 0.0;
  for (const auto& [k, x1] : a) {
    double x2 = b.at(k);
    if (x2 == 0.0) {
      out.skipped.push_back(k);
      continue;
    }
    double v = (x1 - x2) / x2;
    out.items[k] = v;
    sum += v;
  }
  out.mean = out.items.empty() ? 0.0 : sum / static_cast<double>(out.items.size());
  return out;
}

}  // namespace tsncalc::engine
