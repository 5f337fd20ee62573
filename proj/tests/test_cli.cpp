#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "retrain_cli_tests";

int run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + RETRAIN_CLI + " " + args + " > " +
                    (kRoot / "stdout.txt").string() + " 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

fs::path fresh(const std::string& name) {
  auto p = kRoot / name;
  fs::remove_all(p);
  fs::create_directories(kRoot);
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help exits zero for every subcommand") {
  fresh("help");
  CHECK(run("--help") == 0);
  for (const char* sub : {"gen", "run", "sweep", "bound", "robust"}) CHECK(run(std::string(sub) + " --help") == 0);
}

TEST_CASE("gen reruns are byte-identical and write every dataset") {
  auto a = fresh("gen_a");
  auto b = fresh("gen_b");
  REQUIRE(run("gen --world circles --seed 5 --n 400 --out " + a.string()) == 0);
  REQUIRE(run("gen --world circles --seed 5 --n 400 --out " + b.string()) == 0);
  auto files = dir_contents(a);
  CHECK(files == dir_contents(b));
  CHECK(files.size() == 7 + 1 + 8 + 1);
  CHECK(files.count("pe.csv") == 1);
  CHECK(files.count("dataset_-7.csv") == 1);
  CHECK(files.at("dataset_0.csv").rfind("x1,x2,y,split\n", 0) == 0);
}

TEST_CASE("usage errors exit 2 and write nothing") {
  auto out = fresh("bad");
  CHECK(run("gen --world nowhere --out " + out.string()) == 2);
  CHECK(run("run --alpha 0.1 --set world.kind=nowhere --out " + out.string()) == 2);
  CHECK(run("run --alpha 0.1 --set world.colour=red --out " + out.string()) == 2);
  CHECK(run("run --alpha 0.1 --policy magic --out " + out.string()) == 2);
  CHECK(run("run --out " + out.string()) == 2);
  CHECK(run("bound --alpha 1 --out " + out.string()) == 2);
  CHECK(run("frobnicate") == 2);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("missing data exits 3") {
  auto out = fresh("missing");
  CHECK(run("bound --alpha 1 --pe " + (kRoot / "absent.csv").string() + " --out " + out.string()) == 3);
}

TEST_CASE("overrides win over config file values") {
  auto out = fresh("override");
  fs::create_directories(kRoot);
  auto cfg = kRoot / "cfg.json";
  std::ofstream(cfg) << R"({"world": {"kind": "gauss", "n": 300}, "trials": 3, "policies": ["oracle", "never"]})";
  REQUIRE(run("sweep --config " + cfg.string() + " --set trials=1 --set world.kind=circles --out " + out.string()) ==
          0);
  auto written = nlohmann::json::parse(slurp(out / "config.json"));
  CHECK(written["trials"] == 1);
  CHECK(written["world"]["kind"] == "circles");
  CHECK(written["world"]["n"] == 300);
  CHECK(written["policies"] == nlohmann::json::array({"oracle", "never"}));
}

TEST_CASE("output directory defaults to the environment variable") {
  auto out = fresh("env_out");
  REQUIRE(run("bound --L 0.015 --T 8 --alpha 0.96", "RETRAIN_OUT_DIR=" + out.string()) == 0);
  auto j = nlohmann::json::parse(slurp(out / "bound.json"));
  CHECK(j["verdict"] == "no retraining justified");
  CHECK(j["bound"].get<double>() < 1.0);

  auto flag = fresh("flag_out");
  REQUIRE(run("bound --L 0.02 --T 8 --alpha 0.5 --out " + flag.string(), "RETRAIN_OUT_DIR=" + out.string()) == 0);
  CHECK(nlohmann::json::parse(slurp(flag / "bound.json"))["verdict"] != "no retraining justified");
}

TEST_CASE("run writes a trace with one row per step") {
  auto out = fresh("run");
  REQUIRE(run("run --policy always --alpha 0.3 --seed 2 --set world.n=300 --out " + out.string()) == 0);
  std::istringstream trace(slurp(out / "trace.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(trace, line)) ++rows;
  CHECK(rows == 8);
  CHECK(slurp(out / "result.csv").find("always,0.3,0,") != std::string::npos);
}

}
