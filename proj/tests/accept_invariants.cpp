// Criteria 7 (property suites) and 8 (determinism).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "acceptance.hpp"
#include "tsncalc/error.hpp"
#include "tsncalc/cli/sweep.hpp"
#include "tsncalc/engine/engine.hpp"
#include "tsncalc/shapers/shapers.hpp"
#include "tsncalc/testgen/testgen.hpp"

using namespace tsncalc;
using engine::Architecture;
using testgen::Topology;

namespace {

const Topology kTopologies[] = {Topology::SRM, Topology::MR, Topology::MM, Topology::ST, Topology::MT};

// Pin CBS reservations to what the full traffic implies, so that removing a
// flow changes traffic only, never configuration.
void pin_idle_slopes(net::Network& n) {
  std::map<std::string, std::map<int, double>> load;
  for (const auto& f : n.flows)
    if (f.kind != net::TrafficClass::TT)
      for (const auto& p : f.route) load[p][f.priority] += net::periodic_bucket_of(f).rate;
  n.cbs.ports.clear();
  for (const auto& [port, cls] : load) {
    double C = 0.0, total = 0.0;
    for (const auto& l : n.links)
      if (l.id == port) C = l.rate;
    for (const auto& [p, r] : cls) total += r;
    net::CbsPort cp{port, {}};
    for (auto it = cls.rbegin(); it != cls.rend(); ++it)
      cp.classes.push_back({it->first, n.cbs.max_reservation * C * it->second / total});
    n.cbs.ports.push_back(cp);
  }
}

std::string monotonicity(int& instances) {
  const Architecture archs[] = {Architecture::SP,         Architecture::ATS,        Architecture::CBS,
                                Architecture::TAS_SP,     Architecture::TAS_CBS,    Architecture::TAS_ATS_SP,
                                Architecture::TAS_ATS_CBS};
  std::mt19937_64 rng(77);
  int violations = 0;
  std::string first;
  for (int k = 0; instances < 200 && k < 2000; ++k) {
    Architecture a = archs[k % 7];
    testgen::GenSpec g;
    g.seed = 1000 + static_cast<std::uint64_t>(k);
    g.flow_count = 8 + static_cast<std::size_t>(k % 7);
    g.load = 0.15 + 0.05 * (k % 4);
    g.tt_fraction = engine::has_tas(a) ? 0.3 : 0.0;
    g.priorities = k % 2 ? std::vector<int>{6, 5, 4} : std::vector<int>{5};
    net::Network full;
    try {
      full = testgen::generate(kTopologies[k % 5], g);
    } catch (const GenerationError&) {
      continue;
    }
    if (engine::has_cbs(a)) pin_idle_slopes(full);
    engine::Options opt;
    opt.horizon = engine::default_horizon(full);
    engine::AnalysisReport r1;
    try {
      r1 = engine::analyze(full, a, opt);
    } catch (const Error&) {
      continue;  // unstable instance, nothing to compare
    }
    std::vector<std::size_t> removable;
    for (std::size_t i = 0; i < full.flows.size(); ++i)
      if (full.flows[i].kind != net::TrafficClass::TT) removable.push_back(i);
    if (removable.empty()) continue;
    auto less = full;
    std::size_t gone = removable[std::uniform_int_distribution<std::size_t>(0, removable.size() - 1)(rng)];
    std::string gone_id = less.flows[gone].id;
    less.flows.erase(less.flows.begin() + static_cast<std::ptrdiff_t>(gone));
    ++instances;
    engine::AnalysisReport r2;
    try {
      r2 = engine::analyze(less, a, opt);
    } catch (const Error& e) {
      ++violations;
      if (first.empty()) first = std::string("removal made analysis fail: ") + e.what();
      continue;
    }
    auto note = [&](const std::string& what) {
      ++violations;
      if (first.empty()) first = std::string(engine::to_string(a)) + " without " + gone_id + ": " + what;
    };
    for (const auto& f : r2.flows) {
      const auto& before = r1.flow(f.id);
      if (f.delay > before.delay + 1e-6) note(f.id + " delay " + std::to_string(before.delay) + " -> " + std::to_string(f.delay));
      if (f.jitter > before.jitter + 1e-6) note(f.id + " jitter grew");
    }
    for (const auto& q : r2.queues) {
      const auto& before = r1.queue(q.port, q.priority);
      if (q.backlog > before.backlog + 1e-6) note(q.port + " backlog grew");
      if (q.delay && before.delay && *q.delay > *before.delay + 1e-6) note(q.port + " delay grew");
    }
  }
  return std::to_string(violations) + " violations" + (first.empty() ? "" : " (" + first + ")");
}

std::string credit_dominance(int& instances) {
  std::mt19937_64 rng(78);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int violations = 0;
  std::string first;
  const double C = 100.0;
  while (instances < 200) {
    net::Gcl g;
    g.port = "p";
    g.period = 500.0 + std::floor(U(rng) * 19) * 500.0;
    int w = 1 + static_cast<int>(U(rng) * 6);
    std::vector<double> cuts;
    for (int i = 0; i < 2 * w; ++i) cuts.push_back(U(rng) * g.period);
    std::sort(cuts.begin(), cuts.end());
    for (int i = 0; i < w; ++i)
      if (cuts[2 * i + 1] - cuts[2 * i] > 1e-3) g.windows.push_back({cuts[2 * i], cuts[2 * i + 1] - cuts[2 * i]});
    if (g.windows.empty()) continue;
    double l_interest = 512 + U(rng) * 11664;
    std::vector<double> gb;
    for (std::size_t j = 0; j < g.windows.size(); ++j) gb.push_back(net::guard_band_length(g, j, l_interest, C));
    auto env = shapers::guard_band_envelope(g, gb, C);
    if (!(env.rho > 0.0)) continue;
    std::size_t n = 1 + static_cast<std::size_t>(U(rng) * 3);
    std::vector<shapers::CbsClassInput> cls;
    for (std::size_t j = 0; j < n; ++j) cls.push_back({C * (0.02 + 0.15 * U(rng)), 512 + U(rng) * 11664});
    double l_lower = U(rng) < 0.2 ? 0.0 : 512 + U(rng) * 11664;
    bool counted = false;
    for (std::size_t i = 0; i < n; ++i) {
      shapers::CreditBounds cb;
      try {
        cb = shapers::cbs_credit_bounds(C, cls, i, l_lower, env);
      } catch (const ConfigurationError&) {
        continue;
      }
      counted = true;
      if (cb.c_max_nf < cb.c_max - 1e-9 * std::max(1.0, std::fabs(cb.c_max))) {
        ++violations;
        if (first.empty()) first = "c_nf " + std::to_string(cb.c_max_nf) + " < c " + std::to_string(cb.c_max);
      }
    }
    if (counted) ++instances;
  }
  return std::to_string(violations) + " violations" + (first.empty() ? "" : " (" + first + ")");
}

std::string ats_identity(int& instances, int& entries) {
  const Architecture archs[] = {Architecture::ATS, Architecture::TAS_ATS_SP, Architecture::TAS_ATS_CBS};
  int violations = 0;
  std::string first;
  for (int k = 0; instances < 200 && k < 2000; ++k) {
    Architecture a = archs[k % 3];
    testgen::GenSpec g;
    g.seed = 2000 + static_cast<std::uint64_t>(k);
    g.flow_count = 10 + static_cast<std::size_t>(k % 11);
    g.load = 0.15 + 0.05 * (k % 5);
    g.tt_fraction = a == Architecture::ATS ? 0.0 : 0.25;
    g.priorities = k % 2 ? std::vector<int>{6, 5} : std::vector<int>{5};
    g.sporadic_fraction = 0.3;
    engine::AnalysisReport r;
    try {
      auto n = testgen::generate(kTopologies[k % 5], g);
      r = engine::analyze(n, a);
    } catch (const Error&) {
      continue;
    }
    if (r.shaped.empty()) continue;
    ++instances;
    for (const auto& s : r.shaped) {
      ++entries;
      double shared = *r.queue(s.upstream, s.priority).delay;
      double lhs = s.delay + s.min_frame / s.link_rate;
      bool ok = s.upstream_delay == shared &&
                (s.clamped ? s.delay == 0.0 && shared < s.min_frame / s.link_rate
                           : std::fabs(lhs - shared) <= 1e-9 * std::max(1.0, shared));
      if (!ok) {
        ++violations;
        if (first.empty())
          first = s.port + "/" + s.id + ": " + std::to_string(lhs) + " vs " + std::to_string(shared);
      }
    }
  }
  return std::to_string(violations) + " violations" + (first.empty() ? "" : " (" + first + ")");
}

std::string gcl_windows(int& instances) {
  int violations = 0;
  std::string first;
  auto note = [&](const std::string& what) {
    ++violations;
    if (first.empty()) first = what;
  };
  for (int k = 0; instances < 200 && k < 2000; ++k) {
    testgen::GenSpec g;
    g.seed = 3000 + static_cast<std::uint64_t>(k);
    g.load = 0.1 + 0.05 * (k % 6);
    g.tt_fraction = k % 3 == 0 ? 1.0 : 0.5;
    if (k % 2) g.flow_count = 10 + static_cast<std::size_t>(k % 9);
    net::Network n;
    try {
      n = testgen::generate(kTopologies[k % 5], g);
    } catch (const Error&) {
      continue;
    }
    ++instances;
    std::map<std::string, const net::Gcl*> by_port;
    for (const auto& gcl : n.gcls) {
      by_port[gcl.port] = &gcl;
      for (std::size_t i = 0; i < gcl.windows.size(); ++i) {
        const auto& x = gcl.windows[i];
        if (x.offset < 0 || x.offset + x.length > gcl.period + 1e-9) note(gcl.port + " window outside the cycle");
        for (std::size_t j = 0; j < gcl.windows.size(); ++j) {
          if (i == j) continue;
          const auto& y = gcl.windows[j];
          if (x.offset < y.offset + y.length - 1e-9 && y.offset < x.offset + x.length - 1e-9)
            note(gcl.port + " overlapping windows");
        }
      }
    }
    for (const auto& f : n.flows) {
      if (f.kind != net::TrafficClass::TT) continue;
      double C = 100.0, len = f.frame_size / C;
      for (std::size_t h = 0; h < f.route.size(); ++h) {
        if (h > 0 && !(f.offsets[h] > f.offsets[h - 1])) note(f.id + " offsets not increasing");
        if (h > 0 && f.offsets[h] < f.offsets[h - 1] + len - 1e-9) note(f.id + " forwarded before reception");
        const auto* gcl = by_port.at(f.route[h]);
        for (double t = f.offsets[h]; t < gcl->period - 1e-9; t += *f.period) {
          bool found = false;
          for (const auto& w : gcl->windows)
            found |= std::fabs(w.offset - t) < 1e-9 && std::fabs(w.length - len) < 1e-9;
          if (!found) note(f.id + " instance without its window on " + f.route[h]);
        }
      }
    }
  }
  return std::to_string(violations) + " violations" + (first.empty() ? "" : " (" + first + ")");
}

}  // namespace

Outcome criterion_invariants() {
  int mono = 0, credit = 0, ats = 0, ats_entries = 0, gcl = 0;
  std::string m = monotonicity(mono);
  std::string c = credit_dominance(credit);
  std::string a = ats_identity(ats, ats_entries);
  std::string g = gcl_windows(gcl);
  bool pass = mono >= 200 && credit >= 200 && ats >= 200 && gcl >= 200 && m.rfind("0 ", 0) == 0 &&
              c.rfind("0 ", 0) == 0 && a.rfind("0 ", 0) == 0 && g.rfind("0 ", 0) == 0;
  std::string detail = "removal monotonicity: " + std::to_string(mono) + " instances, " + m +
                       " | NF credit dominance: " + std::to_string(credit) + " instances, " + c +
                       " | shaped-queue identity: " + std::to_string(ats) + " instances / " +
                       std::to_string(ats_entries) + " queues, " + a + " | GCL windows: " +
                       std::to_string(gcl) + " instances, " + g;
  return {pass, detail};
}

Outcome criterion_determinism() {
  int runs = 0, diffs = 0;
  std::string first;
  for (int k = 0; k < 10; ++k) {
    testgen::GenSpec g;
    g.seed = 4000 + static_cast<std::uint64_t>(k);
    g.load = 0.3;
    g.tt_fraction = 0.3;
    g.priorities = {6, 5};
    auto n1 = testgen::generate(kTopologies[k % 5], g);
    auto n2 = testgen::generate(kTopologies[k % 5], g);
    if (net::dump_network(n1) != net::dump_network(n2)) {
      ++diffs;
      if (first.empty()) first = "generator output differs for seed " + std::to_string(g.seed);
    }
    for (auto a : engine::all_architectures()) {
      if (a == Architecture::TAS) continue;  // the fixtures carry SP traffic
      engine::Options one, many;
      many.threads = 8;
      std::string s1, s8;
      try {
        auto r1 = engine::analyze(n1, a, one);
        s1 = engine::flows_csv(r1) + engine::queues_csv(r1) + engine::report_json(r1);
      } catch (const Error& e) {
        s1 = e.what();
      }
      try {
        auto r8 = engine::analyze(n1, a, many);
        s8 = engine::flows_csv(r8) + engine::queues_csv(r8) + engine::report_json(r8);
      } catch (const Error& e) {
        s8 = e.what();
      }
      ++runs;
      if (s1 != s8) {
        ++diffs;
        if (first.empty()) first = std::string(engine::to_string(a)) + " differs between 1 and 8 threads";
      }
    }
  }
  // sweep fan-out
  cli::SweepSpec s;
  s.loads = {0.2, 0.4};
  s.seeds = {1, 2, 3, 4};
  s.workers = 1;
  auto w1 = cli::sweep_csv(cli::run_sweep(s));
  s.workers = 8;
  auto w8 = cli::sweep_csv(cli::run_sweep(s));
  ++runs;
  if (w1 != w8) {
    ++diffs;
    if (first.empty()) first = "sweep CSV differs between 1 and 8 workers";
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d comparisons (10 generated fixtures x 7 architectures, 1 vs 8 threads; sweep), %d differences", runs, diffs);
  return {diffs == 0, buf + (first.empty() ? std::string() : "; " + first)};
}
