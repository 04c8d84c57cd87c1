#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& stderr_file = "/dev/null") {
  const std::string cmd = std::string(SHADOWCTL) + " " + args + " > /dev/null 2> " + stderr_file.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("shadowctl-test-" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("identical config and seed give byte-identical csv") {
  const fs::path d = scratch_dir("repro");
  const std::string common = "lyapunov --model lorenz63 --seed 5 --time 20 --record-every 100";
  REQUIRE(run(common + " --out " + (d / "a").string()) == 0);
  REQUIRE(run(common + " --out " + (d / "b").string() + " --workers 2") == 0);
  CHECK(slurp(d / "a" / "lyapunov.csv") == slurp(d / "b" / "lyapunov.csv"));
  CHECK(slurp(d / "a" / "lyapunov_running.csv") == slurp(d / "b" / "lyapunov_running.csv"));
  const auto side = nlohmann::json::parse(slurp(d / "a" / "lyapunov.json"));
  const auto other = nlohmann::json::parse(slurp(d / "b" / "lyapunov.json"));
  CHECK(side["seed"] == 5);
  CHECK(side["config_hash"] == other["config_hash"]);
  CHECK(side.contains("runtime_seconds"));
}

TEST_CASE("config file and flags") {
  const fs::path d = scratch_dir("config");
  std::ofstream(d / "run.ini") << "[config]\nversion = 1\n[model]\nname = lorenz63\n[run]\nseed = 3\n"
                                  "[simulate]\ntime = 1\nobservables = z\n";
  REQUIRE(run("simulate --config " + (d / "run.ini").string() + " --out " + d.string()) == 0);
  const std::string csv = slurp(d / "simulate.csv");
  CHECK(csv.rfind("step,time,z\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 202);
  const auto side = nlohmann::json::parse(slurp(d / "simulate.json"));
  CHECK(side["seed"] == 3);
}

TEST_CASE("invalid configuration exits nonzero with a json report") {
  const fs::path d = scratch_dir("bad");
  std::ofstream(d / "bad.ini") << "[model]\nname = lorenz63\nbogus = 1\n[lyapunov]\nk = many\nunknown = 2\n";
  const int code = run("lyapunov --config " + (d / "bad.ini").string() + " --out " + d.string(), d / "err.json");
  CHECK(code != 0);
  const auto report = nlohmann::json::parse(slurp(d / "err.json"));
  CHECK(report["status"] == "error");
  CHECK(report["kind"] == "config");
  CHECK(report["keys"].size() == 3);
}

TEST_CASE("numerical failures are reported") {
  const fs::path d = scratch_dir("param");
  const int code = run("simulate --model rijke --model-tau 0.001 --out " + d.string(), d / "err.json");
  CHECK(code != 0);
  const auto report = nlohmann::json::parse(slurp(d / "err.json"));
  CHECK(report["kind"] == "parameter");
}
