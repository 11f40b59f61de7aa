#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ERGO_BINARY) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli smoothness") {
  const auto r = run("--seed 7 smoothness --p 3 --q 2 --samples 10000");
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["pass"] == true);
  CHECK(j["self_ratio"].get<double>() == doctest::Approx(6.0));
}

TEST_CASE("cli bounds") {
  auto r = run("bounds hoeffding --q 4 --b 1 --n 100 --x 40");
  CHECK(r.code == 0);
  CHECK(r.out.find("exponential") != std::string::npos);
  r = run("--format json bounds pinelis94 --q 2 --b 1 --n 1 --x 1.4142135623730951");
  CHECK(r.code == 0);
  CHECK(r.out.find("0.73575888") != std::string::npos);
  r = run("bounds nosuch --q 2");
  CHECK(r.code == 2);
  r = run("bounds hoeffding --q 1 --b 1 --n 10 --x 1");
  CHECK(r.code == 2);
}

TEST_CASE("cli usage errors") {
  CHECK(run("").code == 2);
  CHECK(run("--bogus").code == 2);
  CHECK(run("tower").code == 2);
}

TEST_CASE("cli tower and ulam") {
  auto r = run("tower --gamma 0.5 --k 10");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("k,x_k,y_k,mass_k,tail_k\r\n", 0) == 0);
  r = run("ulam --gamma 0.5 --m 256");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("t,F\r\n", 0) == 0);
}

TEST_CASE("cli simulate") {
  auto r = run("--threads 1 --format json simulate --mode mz --dim 2 --q 3 --p 3 --n 8 --replicas 2000");
  CHECK(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["pass"] == true);
  r = run("--format json simulate --mode markov --chain sticky --stay 0.9 --p 3 --q 3 --n 8");
  CHECK(r.code == 0);
}

TEST_CASE("cli experiment writes a run directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ergo_cli_experiment";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"kind":"scaling","gamma":0.25,"p":2,"n_grid":[256,512,1024,2048],"replicas":50,"burn_in":1000,"ulam_m":1024,"tolerance":10})";
  const fs::path out = dir / "run";
  const auto r = run("--threads 1 --out " + out.string() + " experiment --config " + cfg.string());
  CHECK(r.code == 0);
  for (const char* f : {"manifest.json", "config.json", "raw.csv", "aggregate.csv", "verdict.json"})
    CHECK(fs::exists(out / f));
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["status"] == "pass");
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(nlohmann::json::parse(slurp(out / "verdict.json"))["pass"] == true);

  std::ofstream(cfg) << R"({"gamma":1.5})";
  CHECK(run("experiment --config " + cfg.string()).code == 2);
  fs::remove_all(dir);
}
