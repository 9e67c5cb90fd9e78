#include "tsncalc/cli/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

namespace tsncalc::cli {

namespace {

constexpr engine::Metric kMetrics[] = {engine::Metric::Delay, engine::Metric::Jitter,
                                       engine::Metric::Backlog};

bool same_load(double a, double b) { return std::fabs(a - b) < 1e-9; }

struct Job {
  double load;
  std::uint64_t seed;
  std::vector<SweepRow> rows;
  std::optional<std::string> error;
};

void run_job(const SweepSpec& spec, Job& job) {
  try {
    testgen::GenSpec g = spec.base;
    g.seed = job.seed;
    g.load = job.load + spec.tt_load;
    g.tt_fraction = g.load > 0.0 ? spec.tt_load / g.load : 0.0;
    auto net = testgen::generate(spec.topology, g);
    engine::Options opt = spec.options;
    opt.threads = 1;
    auto r1 = engine::analyze(net, spec.first, opt);
    auto r2 = engine::analyze(net, spec.second, opt);
    for (auto m : kMetrics)
      job.rows.push_back({job.load, job.seed, m, engine::difference_ratio(r1, r2, m).mean});
  } catch (const std::exception& e) {
    job.rows.clear();
    job.error = e.what();
  }
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

std::optional<double> SweepResult::mean(double load, engine::Metric m) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows)
    if (same_load(r.load, load) && r.metric == m) {
      sum += r.mean_ratio;
      ++n;
    }
  if (!n) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::size_t SweepResult::successes(double load) const {
  std::size_t n = 0;
  for (const auto& r : rows)
    if (same_load(r.load, load) && r.metric == engine::Metric::Delay) ++n;
  return n;
}

SweepResult run_sweep(const SweepSpec& spec) {
  std::vector<Job> jobs;
  for (double l : spec.loads)
    for (auto s : spec.seeds) jobs.push_back({l, s, {}, {}});

  unsigned workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) run_job(spec, jobs[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  SweepResult out;
  out.pair = std::string(engine::to_string(spec.first)) + "/" + engine::to_string(spec.second);
  for (auto& j : jobs) {
    if (j.error) out.failures.push_back({j.load, j.seed, *j.error});
    for (auto& r : j.rows) out.rows.push_back(r);
  }
  return out;
}

std::string sweep_csv(const SweepResult& r) {
  std::string s = "load,seed,metric,architecture_pair,mean_ratio\n";
  std::vector<double> loads;
  for (const auto& row : r.rows) {
    if (loads.empty() || !same_load(loads.back(), row.load)) loads.push_back(row.load);
    s += num(row.load) + "," + std::to_string(row.seed) + "," + engine::to_string(row.metric) + "," +
         r.pair + "," + num(row.mean_ratio) + "\n";
  }
  for (double l : loads)
    for (auto m : kMetrics)
      if (auto v = r.mean(l, m))
        s += num(l) + ",mean," + engine::to_string(m) + "," + r.pair + "," + num(*v) + "\n";
  return s;
}

std::string sweep_failures_csv(const SweepResult& r) {
  std::string s = "load,seed,error\n";
  for (const auto& f : r.failures) {
    std::string msg = f.message;
    std::replace(msg.begin(), msg.end(), '"', '\'');
    s += num(f.load) + "," + std::to_string(f.seed) + ",\"" + msg + "\"\n";
  }
  return s;
}

}  // namespace tsncalc::cli
