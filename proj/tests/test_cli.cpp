#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "tsncalc/netmodel/network.hpp"

namespace fs = std::filesystem;
using namespace fixtures;

namespace {

struct Run {
  int status;
  std::string out;
};

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("tsncalc_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

Run run(const std::string& args, const fs::path& dir, const std::string& env = "") {
  auto log = dir / "log.txt";
  std::string cmd = env + " " + std::string(TSNCALC_CLI) + " " + args + " > " + log.string() + " 2>&1";
  int raw = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ss.str()};
}

Network simple() {
  auto n = line();
  n.flows = {periodic("f1", TrafficClass::SP, 4000, 1000, 5, {"ES1-SW1", "SW1-SW2", "SW2-ES2"}),
             periodic("f2", TrafficClass::SP, 8000, 500, 5, {"ES3-SW1", "SW1-SW2", "SW2-ES2"})};
  return n;
}

}  // namespace

TEST_CASE("analyze writes three files and exits 0") {
  auto dir = scratch("ok");
  save_network(simple(), (dir / "net.json").string());
  auto r = run("analyze --network " + (dir / "net.json").string() + " --arch SP --out-dir " +
                   (dir / "out").string(),
               dir);
  CHECK(r.status == 0);
  CHECK(fs::exists(dir / "out" / "flows.csv"));
  CHECK(fs::exists(dir / "out" / "queues.csv"));
  CHECK(fs::exists(dir / "out" / "report.json"));
}

TEST_CASE("validate never writes outputs") {
  auto dir = scratch("validate");
  save_network(simple(), (dir / "net.json").string());
  auto before = std::distance(fs::directory_iterator(dir), fs::directory_iterator());
  auto r = run("validate --network net.json", dir, "cd " + dir.string() + " &&");
  CHECK(r.status == 0);
  // only the captured log appeared
  CHECK(std::distance(fs::directory_iterator(dir), fs::directory_iterator()) == before + 1);
}

TEST_CASE("over-reserved CBS exits 2 naming the port and classes") {
  auto dir = scratch("cbs");
  auto n = simple();
  n.cbs.ports = {{"SW1-SW2", {{5, 50.0}, {4, 40.0}}}};
  save_network(n, (dir / "net.json").string());
  auto r = run("analyze -n " + (dir / "net.json").string() + " -a CBS -o " + (dir / "out").string(), dir);
  CHECK(r.status == 2);
  CHECK(r.out.find("SW1-SW2") != std::string::npos);
  CHECK(r.out.find("classes 5,4") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("cyclic ring exits 4 listing the cycle, fixed point succeeds") {
  auto dir = scratch("ring");
  save_network(ring(3), (dir / "ring.json").string());
  auto net = (dir / "ring.json").string();
  auto r = run("analyze -n " + net + " -o " + (dir / "out").string(), dir);
  CHECK(r.status == 4);
  CHECK(r.out.find("S1-S2/5") != std::string::npos);
  CHECK(r.out.find("S2-S3/5") != std::string::npos);
  CHECK(r.out.find("S3-S1/5") != std::string::npos);
  r = run("analyze -n " + net + " --fixed-point -o " + (dir / "out").string(), dir);
  CHECK(r.status == 0);
}

TEST_CASE("exit codes for parse errors, bad arguments and credit modes") {
  auto dir = scratch("codes");
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK(run("analyze -n " + (dir / "bad.json").string(), dir).status == 1);
  save_network(simple(), (dir / "net.json").string());
  CHECK(run("analyze -n " + (dir / "net.json").string() + " -a NOPE", dir).status == 5);
  CHECK(run("analyze -n " + (dir / "net.json").string() + " -a SP --credit-mode frozen", dir).status == 5);
  CHECK(run("frobnicate", dir).status == 5);
  CHECK(run("--help", dir).status == 0);
}

TEST_CASE("environment variables stand in for flags") {
  auto dir = scratch("env");
  save_network(simple(), (dir / "net.json").string());
  auto r = run("analyze", dir,
               "TSNCALC_NETWORK=" + (dir / "net.json").string() + " TSNCALC_ARCH=ATS TSNCALC_OUT_DIR=" +
                   (dir / "out").string());
  CHECK(r.status == 0);
  std::ifstream in(dir / "out" / "flows.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(row.find(",ATS,") != std::string::npos);
}

TEST_CASE("generate then compare, and a trivial sweep") {
  auto dir = scratch("gen");
  auto g = run("generate -t SRM --load 0.2 --seed 5 -o " + (dir / "g.json").string(), dir);
  REQUIRE(g.status == 0);
  auto net = tsncalc::net::load_network((dir / "g.json").string());
  CHECK(tsncalc::net::validate(net).empty());
  auto c = run("compare -n " + (dir / "g.json").string() + " -a SP --against SP -o " + dir.string(), dir);
  CHECK(c.status == 0);
  CHECK(fs::exists(dir / "compare.csv"));

  auto s = run("sweep -t MM --loads 0.1 --seeds 1 -a SP --against SP -o " + dir.string(), dir);
  REQUIRE(s.status == 0);
  std::ifstream in(dir / "sweep.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "load,seed,metric,architecture_pair,mean_ratio");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0.000000");
  }
  CHECK(rows == 6);  // three metrics for seed 1, three means
}
