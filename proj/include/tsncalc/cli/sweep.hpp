#pragma once

// Load sweeps: generate one network per (load, seed), analyse it under two
// architectures and record the mean difference ratio per metric.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tsncalc/engine/engine.hpp"
#include "tsncalc/testgen/testgen.hpp"

namespace tsncalc::cli {

struct SweepSpec {
  testgen::Topology topology = testgen::Topology::MM;
  testgen::GenSpec base;           // load, tt_fraction and seed are overwritten
  std::vector<double> loads;       // non-TT load per point
  double tt_load = 0.0;            // added on top of every point, carried by TT flows
  std::vector<std::uint64_t> seeds;
  engine::Architecture first = engine::Architecture::ATS;
  engine::Architecture second = engine::Architecture::SP;
  engine::Options options;         // per analysis; threads is forced to 1
  unsigned workers = 1;            // (load, seed) jobs in flight, 0 = hardware
};

struct SweepRow {
  double load = 0.0;
  std::uint64_t seed = 0;
  engine::Metric metric = engine::Metric::Delay;
  double mean_ratio = 0.0;
};

struct SweepFailure {
  double load = 0.0;
  std::uint64_t seed = 0;
  std::string message;
};

struct SweepResult {
  std::string pair;  // "ATS/SP"
  std::vector<SweepRow> rows;           // by load, seed, metric
  std::vector<SweepFailure> failures;   // by load, seed

  // Mean over the seeds that succeeded at this load; nullopt when none did.
  std::optional<double> mean(double load, engine::Metric m) const;
  std::size_t successes(double load) const;
};

SweepResult run_sweep(const SweepSpec& spec);

// load,seed,metric,architecture_pair,mean_ratio; per-load means follow the
// per-seed rows with seed "mean".
std::string sweep_csv(const SweepResult& r);
std::string sweep_failures_csv(const SweepResult& r);

}  // namespace tsncalc::cli
