#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "chj/cli.hpp"

namespace fs = std::filesystem;
using namespace chj;
using namespace chj::cli;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("chjlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

/// Runs the CLI and returns its exit status; output goes to `log`.
int chjlab(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(CHJLAB_EXE) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::string> manifest_files(const fs::path& dir) {
  std::vector<std::string> out;
  std::istringstream s(slurp(dir / "manifest"));
  std::string line;
  while (std::getline(s, line)) {
    if (line.rfind("file=", 0) == 0) out.push_back(line.substr(5));
  }
  return out;
}

const char* kCD = "model.a = 1\nmodel.b = 1\nmodel.V = 0\nmodel.lambda = 0.5\ngrid.n = 64\n";

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = ExperimentConfig::parse("# comment\n\nmodel.lambda = 0.5\n  grid.n=128  \nbifurcate.lambdas = -0.2, 0, 0.2\n");
  CHECK(c.number("model.lambda", 0.0) == 0.5);
  CHECK(c.integer("grid.n", 0) == 128);
  CHECK(c.list("bifurcate.lambdas") == std::vector<double>{-0.2, 0.0, 0.2});
  CHECK(c.text("evolve.phi", "0") == "0");
  CHECK_THROWS_AS(ExperimentConfig::parse("model.lambda 0.5\n"), Error);
  CHECK_THROWS_AS(ExperimentConfig::parse("lambda = 0.5\n"), Error);
  CHECK_THROWS_AS(ExperimentConfig::parse("model.colour = red\n"), Error);
  ExperimentConfig bad = ExperimentConfig::parse("evolve.dt = -1\ngrid.n = 1.5\n");
  CHECK_THROWS_AS(bad.positive("evolve.dt", 1.0), Error);
  CHECK_THROWS_AS(bad.integer("grid.n", 64), Error);
}

TEST_CASE("config hash ignores layout but not values") {
  const auto a = ExperimentConfig::parse("model.lambda = 0.5\ngrid.n = 64\n");
  const auto b = ExperimentConfig::parse("grid.n=64\n# note\nmodel.lambda   =   0.5\n");
  const auto c = ExperimentConfig::parse("model.lambda = 0.25\ngrid.n = 64\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != c.hash());
}

TEST_CASE("exit code mapping") {
  CHECK(exit_code_for(ErrorCode::AssumptionViolated) == 2);
  CHECK(exit_code_for(ErrorCode::NotConverged) == 3);
  CHECK(exit_code_for(ErrorCode::ConfigError) == 4);
  CHECK(exit_code_for(ErrorCode::ParseError) == 4);
  CHECK(exit_code_for(ErrorCode::BlowUp) == 1);
}

TEST_CASE("float formatting uses 17 significant digits") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  for (double v : {-2.5e-20, 1.0 / 3.0, 6.02e23, 0.012665147955292222}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(INFINITY) == "inf");
}

TEST_CASE("orbit command on CD(1,0.5)") {
  const fs::path d = scratch("orbit");
  write(d / "cd.cfg", kCD);
  REQUIRE(chjlab("orbit --config " + (d / "cd.cfg").string() + " --out " + (d / "out").string(), d / "log") == 0);
  const std::string csv = slurp(d / "out" / "orbit.csv");
  CHECK(csv.rfind("x,t,p,u,B,f\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 65);
  const std::string meta = slurp(d / "out" / "orbit_meta.txt");
  CHECK(meta.find("period_T=1\n") != std::string::npos);
  CHECK(meta.find("Z=-1\n") != std::string::npos);
  const auto files = manifest_files(d / "out");
  CHECK(files == std::vector<std::string>{"orbit.csv", "orbit_meta.txt", "manifest"});
  CHECK(slurp(d / "out" / "manifest").find("exit_status=0") != std::string::npos);
}

TEST_CASE("check-model exits 2 when H4 fails") {
  const fs::path d = scratch("check");
  write(d / "bad.cfg", "model.b = 1\nmodel.lambda = -0.5\n");
  CHECK(chjlab("check-model --config " + (d / "bad.cfg").string() + " --out " + (d / "out").string(), d / "log") == 2);
  CHECK(slurp(d / "log").find("H4") != std::string::npos);
  CHECK(slurp(d / "out" / "check.txt").find("H4=fail") != std::string::npos);
  CHECK(slurp(d / "out" / "manifest").find("exit_status=2") != std::string::npos);

  write(d / "good.cfg", kCD);
  CHECK(chjlab("check-model --config " + (d / "good.cfg").string() + " --out " + (d / "ok").string(), d / "log2") == 0);
}

TEST_CASE("configuration errors exit 4 and still write a manifest") {
  const fs::path d = scratch("config");
  write(d / "unknown.cfg", "model.lambda = 0.5\nmodel.colour = red\n");
  CHECK(chjlab("orbit --config " + (d / "unknown.cfg").string() + " --out " + (d / "a").string(), d / "log") == 4);
  CHECK(fs::exists(d / "a" / "manifest"));
  write(d / "expr.cfg", "model.lambda = 0.5\nmodel.V = cos(2*pi*x\n");
  CHECK(chjlab("orbit --config " + (d / "expr.cfg").string() + " --out " + (d / "b").string(), d / "log") == 4);
  write(d / "neg.cfg", "model.lambda = 0.5\ngrid.n = 64\nevolve.dt = -0.001\n");
  CHECK(chjlab("evolve --config " + (d / "neg.cfg").string() + " --out " + (d / "c").string(), d / "log") == 4);
  CHECK(chjlab("orbit --config " + (d / "missing.cfg").string() + " --out " + (d / "d").string(), d / "log") == 4);
  CHECK(chjlab("no-such-command --config x", d / "log") == 4);
}

TEST_CASE("evolve is deterministic and its manifest is complete") {
  const fs::path d = scratch("evolve");
  write(d / "e.cfg", std::string(kCD) + "evolve.T = 0.5\nevolve.phi = 0.05*sin(2*pi*x)\nevolve.snapshot_every = 0.1\n");
  REQUIRE(chjlab("evolve --plot --config " + (d / "e.cfg").string() + " --out " + (d / "r1").string(), d / "log") == 0);
  REQUIRE(chjlab("evolve --plot --config " + (d / "e.cfg").string() + " --out " + (d / "r2").string(), d / "log") == 0);
  for (const std::string f : {"field.csv", "trace.csv", "supnorm.csv", "evolve.txt", "plot.gp"}) {
    INFO(f);
    CHECK(slurp(d / "r1" / f) == slurp(d / "r2" / f));
  }
  // every file in the directory is listed, and every listed file exists
  std::vector<std::string> listed = manifest_files(d / "r1");
  std::vector<std::string> present;
  for (const auto& e : fs::directory_iterator(d / "r1")) present.push_back(e.path().filename().string());
  std::sort(listed.begin(), listed.end());
  std::sort(present.begin(), present.end());
  CHECK(listed == present);
  const std::string trace = slurp(d / "r1" / "trace.csv");
  CHECK(trace.rfind("t,x,value\n", 0) == 0);
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 1 + 6 * 64);
  CHECK(slurp(d / "r1" / "plot.gp").find("supnorm.csv") != std::string::npos);
}

TEST_CASE("bifurcate writes five rows with the lambda = 0 row degenerate") {
  const fs::path d = scratch("bifurcate");
  write(d / "b.cfg", std::string(kCD) + "bifurcate.lambdas = -0.4, -0.2, 0, 0.2, 0.4\n");
  REQUIRE(chjlab("bifurcate --plot --jobs 2 --config " + (d / "b.cfg").string() + " --out " + (d / "out").string(),
                 d / "log") == 0);
  std::istringstream csv(slurp(d / "out" / "bifurcation.csv"));
  std::vector<std::string> lines;
  for (std::string l; std::getline(csv, l);) lines.push_back(l);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "lambda,class,amplitude,period,min_abs_B");
  CHECK(lines[1].find(",fixed_point,") != std::string::npos);
  CHECK(lines[2].find(",fixed_point,") != std::string::npos);
  CHECK(lines[3].rfind("0,degenerate,", 0) == 0);
  CHECK(lines[4].find(",periodic,") != std::string::npos);
  CHECK(lines[5].find(",periodic,") != std::string::npos);
  CHECK(slurp(d / "out" / "plot.gp").find("bifurcation.csv") != std::string::npos);
}

TEST_CASE("bifurcate does not need model.lambda") {
  const fs::path d = scratch("bifurcate_nolambda");
  write(d / "b.cfg", "model.b = 1\ngrid.n = 64\nbifurcate.lambdas = -0.2, 0.2\n");
  REQUIRE(chjlab("bifurcate --config " + (d / "b.cfg").string() + " --out " + (d / "out").string(), d / "log") == 0);
  const std::string csv = slurp(d / "out" / "bifurcation.csv");
  CHECK(csv.find(",fixed_point,") != std::string::npos);
  CHECK(csv.find(",periodic,") != std::string::npos);
}

TEST_CASE("periodic command writes slices and a slice plot") {
  const fs::path d = scratch("periodic");
  write(d / "p.cfg", std::string(kCD) + "periodic.slices = 16\n");
  REQUIRE(chjlab("periodic --plot --config " + (d / "p.cfg").string() + " --out " + (d / "out").string(), d / "log") == 0);
  const std::string csv = slurp(d / "out" / "periodic.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 16 * 64);
  const std::string plot = slurp(d / "out" / "plot.gp");
  CHECK(plot.find("slice 14") != std::string::npos);
  CHECK(std::count(plot.begin(), plot.end(), '\n') > 8);
}

TEST_CASE("normalize-c subtracts the critical value") {
  const fs::path d = scratch("normalize");
  write(d / "n.cfg", "model.b = 1\nmodel.V = 0.7\nmodel.lambda = 0.5\ngrid.n = 64\ncritical.n = 64\ncritical.T = 10\n");
  REQUIRE(chjlab("check-model --normalize-c --config " + (d / "n.cfg").string() + " --out " + (d / "out").string(),
                 d / "log") == 0);
  const std::string c = slurp(d / "out" / "critical_value.txt");
  REQUIRE(c.rfind("c=", 0) == 0);
  CHECK(std::stod(c.substr(2)) == Catch::Approx(0.7).margin(2e-3));
  // without normalization the constant potential breaks condition C
  CHECK(chjlab("check-model --config " + (d / "n.cfg").string() + " --out " + (d / "raw").string(), d / "log") == 2);
}

TEST_CASE("selftest fast passes") {
  const fs::path d = scratch("selftest");
  CHECK(chjlab("selftest --level fast", d / "log") == 0);
  CHECK(slurp(d / "log").find("FAIL") == std::string::npos);
}

TEST_CASE("selftest full with a seeded d_u sign fault fails on the H4 margin check") {
  const fs::path d = scratch("fault");
  CHECK(chjlab("selftest --level full --seed-fault", d / "log") == 1);
  const std::string log = slurp(d / "log");
  CHECK(log.find("FAIL H4 margin") != std::string::npos);
}
