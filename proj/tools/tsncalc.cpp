// tsncalc: validate, analyse, generate, compare and sweep TSN configurations.
//
// Exit status: 0 ok, 1 parse error, 2 validation/configuration, 3 instability,
// starvation or divergence, 4 cyclic dependency, 5 anything else.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tsncalc/cli/sweep.hpp"
#include "tsncalc/engine/engine.hpp"
#include "tsncalc/error.hpp"
#include "tsncalc/netmodel/network.hpp"
#include "tsncalc/testgen/testgen.hpp"

using namespace tsncalc;

namespace {

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return 1;
    case ErrorKind::Validation:
    case ErrorKind::Configuration: return 2;
    case ErrorKind::Instability:
    case ErrorKind::Starvation:
    case ErrorKind::Divergence: return 3;
    case ErrorKind::Cycle: return 4;
    default: return 5;
  }
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + p.string());
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "1-20" or "3,5,8"
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoull(part));
      } else {
        auto a = std::stoull(part.substr(0, dash)), b = std::stoull(part.substr(dash + 1));
        for (auto x = a; x <= b; ++x) out.push_back(x);
      }
    } catch (const std::logic_error&) {
      throw ArgumentError("bad seed list '" + s + "'");
    }
  }
  if (out.empty()) throw ArgumentError("empty seed list");
  return out;
}

struct Common {
  std::string network;
  std::string arch = "SP";
  std::string credit_mode;
  std::string out_dir = ".";
  double horizon = 0.0;
  bool fixed_point = false;
  unsigned threads = 1;

  engine::Options options() const {
    engine::Options o;
    if (!credit_mode.empty()) o.credit_mode = engine::parse_credit_mode(credit_mode);
    if (horizon > 0.0) o.horizon = horizon;
    o.fixed_point = fixed_point;
    o.threads = threads;
    return o;
  }
};

void add_network(CLI::App* app, Common& c) {
  app->add_option("--network,-n", c.network, "Network description (JSON)")
      ->required()
      ->envname("TSNCALC_NETWORK");
}

void add_analysis(CLI::App* app, Common& c) {
  app->add_option("--arch,-a", c.arch, "Architecture: TAS ATS CBS SP TAS+SP TAS+CBS TAS+ATS+SP TAS+ATS+CBS")
      ->envname("TSNCALC_ARCH")
      ->capture_default_str();
  app->add_option("--credit-mode", c.credit_mode, "frozen or nonfrozen (TAS+CBS, TAS+ATS+CBS)")
      ->envname("TSNCALC_CREDIT_MODE");
  app->add_option("--horizon-us", c.horizon, "Analysis horizon in us (default: 4 x longest cycle)")
      ->envname("TSNCALC_HORIZON_US");
  app->add_flag("--fixed-point", c.fixed_point, "Iterate on cyclic dependencies instead of failing")
      ->envname("TSNCALC_FIXED_POINT");
  app->add_option("--threads", c.threads, "Worker threads, 0 = all cores")
      ->envname("TSNCALC_THREADS")
      ->capture_default_str();
}

void add_out_dir(CLI::App* app, Common& c) {
  app->add_option("--out-dir,-o", c.out_dir, "Output directory")
      ->envname("TSNCALC_OUT_DIR")
      ->capture_default_str();
}

struct GenOpts {
  std::string topology = "MM";
  double load = 0.2;
  std::size_t flows = 0;
  double tt_fraction = 0.0;
  std::vector<int> priorities{5};
  std::vector<double> periods{1000, 2000, 5000, 10000};
  std::string kind = "SP";
  double sporadic = 0.0;
  double be_interferer = 0.0;
  std::uint64_t seed = 1;

  testgen::GenSpec spec() const {
    testgen::GenSpec g;
    g.flow_count = flows;
    g.load = load;
    g.tt_fraction = tt_fraction;
    g.priorities = priorities;
    g.periods = periods;
    if (kind == "SP") g.kind = net::TrafficClass::SP;
    else if (kind == "AVB") g.kind = net::TrafficClass::AVB;
    else throw ArgumentError("--kind must be SP or AVB");
    g.sporadic_fraction = sporadic;
    if (be_interferer > 0.0) g.be_interferer = be_interferer;
    g.seed = seed;
    return g;
  }
};

void add_gen(CLI::App* app, GenOpts& g, bool with_load) {
  app->add_option("--topology,-t", g.topology, "SRM MR MM ST MT")->capture_default_str();
  if (with_load) app->add_option("--load", g.load, "Target average link load")->capture_default_str();
  app->add_option("--flows", g.flows, "Exact flow count (0: add flows until the load is met)")
      ->capture_default_str();
  app->add_option("--priorities", g.priorities, "Priorities for non-TT flows")->delimiter(',');
  app->add_option("--periods", g.periods, "Period set in us")->delimiter(',');
  app->add_option("--kind", g.kind, "Non-TT traffic class: SP or AVB")->capture_default_str();
  app->add_option("--sporadic", g.sporadic, "Share of non-TT flows given as leaky buckets");
  app->add_option("--be-interferer", g.be_interferer, "Declare a BE interferer of this many bits");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case delay, jitter and backlog bounds for TSN shaper combinations"};
  app.require_subcommand(1);

  Common c;
  GenOpts g;

  auto* validate = app.add_subcommand("validate", "Check a network description");
  add_network(validate, c);

  auto* analyze = app.add_subcommand("analyze", "Bound every flow and queue; writes flows.csv, queues.csv, report.json");
  add_network(analyze, c);
  add_analysis(analyze, c);
  add_out_dir(analyze, c);

  std::string gen_out = "network.json", flow_table;
  auto* generate = app.add_subcommand("generate", "Write a synthetic network");
  add_gen(generate, g, true);
  generate->add_option("--tt-fraction", g.tt_fraction, "Share of the load carried by TT flows");
  generate->add_option("--seed", g.seed, "Random seed")->envname("TSNCALC_SEED")->capture_default_str();
  generate->add_option("--flow-table", flow_table, "CSV flow table to route over the topology instead");
  generate->add_option("--out,-o", gen_out, "Output file")->capture_default_str();

  std::string against = "SP";
  auto* compare = app.add_subcommand("compare", "Difference ratios (X1 - X2) / X2 between two architectures");
  add_network(compare, c);
  add_analysis(compare, c);
  add_out_dir(compare, c);
  compare->add_option("--against", against, "Second architecture (X2)")->capture_default_str();

  std::vector<double> loads{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::string seeds = "1-20";
  double tt_load = 0.0;
  unsigned workers = 0;
  auto* sweep = app.add_subcommand("sweep", "Load sweep of difference ratios over generated networks");
  add_gen(sweep, g, false);
  add_analysis(sweep, c);
  add_out_dir(sweep, c);
  sweep->add_option("--against", against, "Second architecture (X2)")->capture_default_str();
  sweep->add_option("--loads", loads, "Non-TT loads")->delimiter(',');
  sweep->add_option("--seeds", seeds, "Seeds, e.g. 1-20 or 3,5,8")->envname("TSNCALC_SEED")->capture_default_str();
  sweep->add_option("--tt-load", tt_load, "TT load added at every point");
  sweep->add_option("--workers", workers, "Parallel (load, seed) jobs, 0 = all cores")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 5;
  }

  try {
    if (*validate) {
      auto n = net::load_network(c.network);
      auto v = net::validate(n);
      for (const auto& x : v)
        std::fprintf(stderr, "%s %s: %s\n", net::to_string(x.kind), x.subject.c_str(), x.message.c_str());
      if (!v.empty()) return 2;
      std::printf("ok: %zu nodes, %zu links, %zu flows\n", n.nodes.size(), n.links.size(), n.flows.size());
      return 0;
    }
    if (*analyze) {
      auto n = net::load_network(c.network);
      auto r = engine::analyze(n, engine::parse_architecture(c.arch), c.options());
      for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      engine::write_report(r, c.out_dir);
      std::printf("%s: %zu flows, %zu queues -> %s\n", engine::to_string(r.architecture), r.flows.size(),
                  r.queues.size(), c.out_dir.c_str());
      return 0;
    }
    if (*generate) {
      auto topo = testgen::make_topology(testgen::parse_topology(g.topology));
      net::Network n = flow_table.empty() ? testgen::generate(testgen::parse_topology(g.topology), g.spec())
                                          : testgen::load_flow_table(read_file(flow_table), topo);
      net::save_network(n, gen_out);
      auto st = testgen::load_stats(n);
      std::printf("%zu flows, average load %.3f, max %.3f, average hops %.2f -> %s\n", n.flows.size(),
                  st.average, st.max, st.average_hops, gen_out.c_str());
      return 0;
    }
    if (*compare) {
      auto n = net::load_network(c.network);
      auto a1 = engine::parse_architecture(c.arch), a2 = engine::parse_architecture(against);
      auto opt = c.options();
      auto r1 = engine::analyze(n, a1, opt);
      auto r2 = engine::analyze(n, a2, opt);
      std::string csv = "metric,item,ratio\n";
      for (auto m : {engine::Metric::Delay, engine::Metric::Jitter, engine::Metric::Backlog}) {
        auto d = engine::difference_ratio(r1, r2, m);
        for (const auto& s : d.skipped)
          std::fprintf(stderr, "warning: %s %s skipped (zero in %s)\n", engine::to_string(m), s.c_str(),
                       engine::to_string(a2));
        char buf[64];
        for (const auto& [k, v] : d.items) {
          std::snprintf(buf, sizeof buf, "%.6f", v);
          csv += std::string(engine::to_string(m)) + "," + k + "," + buf + "\n";
        }
        std::snprintf(buf, sizeof buf, "%.6f", d.mean);
        csv += std::string(engine::to_string(m)) + ",mean," + buf + "\n";
        std::printf("%s/%s %s mean ratio %s\n", engine::to_string(a1), engine::to_string(a2),
                    engine::to_string(m), buf);
      }
      write_file(std::filesystem::path(c.out_dir) / "compare.csv", csv);
      return 0;
    }
    if (*sweep) {
      cli::SweepSpec s;
      s.topology = testgen::parse_topology(g.topology);
      s.base = g.spec();
      s.loads = loads;
      s.tt_load = tt_load;
      s.seeds = parse_seeds(seeds);
      s.first = engine::parse_architecture(c.arch);
      s.second = engine::parse_architecture(against);
      s.options = c.options();
      s.workers = workers;
      auto r = cli::run_sweep(s);
      write_file(std::filesystem::path(c.out_dir) / "sweep.csv", cli::sweep_csv(r));
      write_file(std::filesystem::path(c.out_dir) / "sweep_failures.csv", cli::sweep_failures_csv(r));
      for (double l : loads) {
        auto d = r.mean(l, engine::Metric::Delay);
        auto b = r.mean(l, engine::Metric::Backlog);
        std::printf("load %.2f: %zu/%zu ok", l, r.successes(l), s.seeds.size());
        if (d) std::printf("  delay %+.4f  backlog %+.4f", *d, *b);
        std::printf("\n");
      }
      return 0;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s error: %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 5;
  }
  return 5;
}
