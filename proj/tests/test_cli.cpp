#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "metastab/disorder.hpp"

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return METASTAB_CLI_PATH; }

int run(const std::string& args, const std::string& log = "/dev/null") {
  const std::string cmd =
      std::string(cli_path()) + " " + args + " > " + log + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path workdir() {
  auto d = fs::temp_directory_path() / "metastab_cli_tests";
  fs::create_directories(d);
  return d;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("gen writes a coupling file that round-trips bit-exactly") {
  auto dir = workdir();
  write_file(dir / "dis.json",
             R"({"model": {"N": 10, "k_J": 1.0},
                 "disorder": {"kind": "erdos_renyi", "p": 0.5}})");
  const auto out = dir / "J.txt";
  CHECK(run("gen --config " + (dir / "dis.json").string() + " --seed 42 --out " +
            out.string()) == 0);
  auto f = metastab::read_coupling_file(out.string());
  CHECK(f.cm.N == 10);
  CHECK(f.seed.master_seed == 42);
  // Regenerating from the recorded seed reproduces the file contents exactly.
  auto again = metastab::sample_couplings(f.spec, f.seed);
  CHECK(again.J == f.cm.J);
}

TEST_CASE("exact reports the hitting identity on a generated instance") {
  auto dir = workdir();
  write_file(dir / "dis.json",
             R"({"model": {"N": 8, "k_J": 1.0},
                 "disorder": {"kind": "erdos_renyi", "p": 0.5}})");
  const auto J = dir / "J8.txt";
  REQUIRE(run("gen --config " + (dir / "dis.json").string() +
              " --seed 7 --out " + J.string()) == 0);
  const auto log = dir / "exact.log";
  CHECK(run("exact --couplings " + J.string() +
            " --beta 1.4 --field 0.1 --A-level 0 --B-level 8",
            log.string()) == 0);
  const std::string text = slurp(log);
  CHECK(text.find("cap,") != std::string::npos);
  CHECK(text.find("mean_hitting_identity,") != std::string::npos);
  CHECK(text.find("lambda0,") != std::string::npos);
}

TEST_CASE("simulate agrees with exact within its reported error bar") {
  auto dir = workdir();
  write_file(dir / "dis.json",
             R"({"model": {"N": 8, "k_J": 1.0},
                 "disorder": {"kind": "erdos_renyi", "p": 0.5}})");
  const auto J = dir / "Jsim.txt";
  REQUIRE(run("gen --config " + (dir / "dis.json").string() +
              " --seed 3 --out " + J.string()) == 0);
  const auto log = dir / "sim.log";
  CHECK(run("simulate --couplings " + J.string() +
            " --beta 1.2 --field 0.1 --A-level 0 --B-level 8 --runs 2000 "
            "--seed 5",
            log.string()) == 0);
  const std::string text = slurp(log);
  auto pos = text.find("deviation = ");
  REQUIRE(pos != std::string::npos);
  const double dev = std::abs(std::strtod(text.c_str() + pos + 12, nullptr));
  CHECK(dev < 4.0);
}

TEST_CASE("lumped solves the annealed chain at sizes far beyond enumeration") {
  auto dir = workdir();
  const auto log = dir / "lumped.log";
  CHECK(run("lumped --beta 2 --field 0.05 --pbar 1 --N 10000 --out-prefix " +
            (dir / "lump").string(), log.string()) == 0);
  const std::string text = slurp(log);
  CHECK(text.find("log cap") != std::string::npos);
  CHECK(fs::exists(dir / "lump_chain.csv"));
  CHECK(fs::exists(dir / "lump_free_energy.csv"));
}

TEST_CASE("experiment writes all reports plus a manifest with stable digests") {
  auto dir = workdir();
  write_file(dir / "exp.json",
             R"({"model": {"N": 8, "beta": 2.0, "h": 0.05, "k_J": 1.0},
                 "disorder": {"kind": "erdos_renyi", "p": 1.0},
                 "replicas": 120, "seed": 11, "threads": 1})");
  const auto rep1 = dir / "rep1";
  const auto rep2 = dir / "rep2";
  CHECK(run("experiment --config " + (dir / "exp.json").string() + " --out " +
            rep1.string()) == 0);
  for (const char* name :
       {"replicas.csv", "capacity_concentration.csv",
        "harmonic_concentration.csv", "ratio_tail.csv", "xi_tail.csv",
        "ratio_moments.csv", "localization.csv", "manifest.json"})
    CHECK(fs::exists(rep1 / name));
  // Rerunning the identical config reproduces every output digest.
  CHECK(run("experiment --config " + (dir / "exp.json").string() + " --out " +
            rep2.string()) == 0);
  const std::string m1 = slurp(rep1 / "manifest.json");
  const std::string m2 = slurp(rep2 / "manifest.json");
  auto digests = [](const std::string& m) {
    std::string acc;
    std::size_t pos = 0;
    while ((pos = m.find("fnv1a64:", pos)) != std::string::npos) {
      acc += m.substr(pos, 24) + "\n";
      pos += 8;
    }
    return acc;
  };
  CHECK(digests(m1) == digests(m2));
  CHECK(digests(m1).find("fnv1a64:") != std::string::npos);
}

TEST_CASE("exit codes follow the documented taxonomy") {
  auto dir = workdir();
  // 1: unreadable input file.
  CHECK(run("exact --couplings /nonexistent/J.txt --beta 1.0 "
            "--A-level 0 --B-level 4") == 1);
  // 2: config errors (malformed JSON, missing keys, invalid values).
  write_file(dir / "broken.json", "{ not json");
  CHECK(run("gen --config " + (dir / "broken.json").string() +
            " --out " + (dir / "x.txt").string()) == 2);
  write_file(dir / "nokeys.json", R"({"model": {"N": 8}})");
  CHECK(run("gen --config " + (dir / "nokeys.json").string() +
            " --out " + (dir / "x.txt").string()) == 2);
  CHECK(run("lumped --beta 0.5 --pbar 1 --N 100") == 2);  // single minimum
  // 2: unknown flags (argument parsing).
  CHECK(run("exact --no-such-flag") == 2);
  // 3: capability limit (exact enumeration beyond the supported size).
  CHECK(run("exact --annealed --N 24 --pbar 1 --beta 1.5 "
            "--A-level 0 --B-level 24") == 3);
}

TEST_CASE("check runs the built-in invariants") {
  CHECK(run("check") == 0);
}

}  // TEST_SUITE
