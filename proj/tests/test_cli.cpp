#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "chamberflow/io.hpp"
#include "chamberflow/verify.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <set>
#include <fstream>
#include <sstream>

using namespace chamberflow;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

// Runs the CLI with the given arguments (and optional environment prefix), capturing stdout.
Run cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" CHAMBERFLOW_CLI "\" " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  std::size_t k;
  while ((k = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, k);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("chamberflow_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Mat from_rows(const json& m) { return matrix_from_json(m); }

}  // namespace

TEST_CASE("decompose reconstructs the input") {
  TempDir t;
  const auto m = t.write("g.json", R"({"n": 3, "rows": [[2, 1, 0], [0.5, 1, 0.3], [0.1, -0.4, 0.9]]})");
  const Mat g = matrix_from_json(load_json_file(m));
  const Mat gs = g / std::cbrt(g.determinant());
  std::ofstream(t.file("g.json")) << dump_json(matrix_json(gs));
  const Run r = cli("decompose " + m);
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  const auto expd = [](const json& a) {
    Vec v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = std::exp(a[i].get<double>());
    return Mat(v.asDiagonal());
  };
  CHECK((from_rows(j["kan"]["k"]) * expd(j["kan"]["a"]) * from_rows(j["kan"]["u"]) - gs).norm() < 1e-12);
  CHECK((from_rows(j["kak"]["k1"]) * expd(j["kak"]["a"]) * from_rows(j["kak"]["k2"]) - gs).norm() < 1e-12);
  CHECK(j.contains("bruhat"));
  CHECK(j["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("transverse exit codes") {
  TempDir t;
  const auto e = t.write("e.json", R"({"rep": {"n": 3, "rows": [[1,0,0],[0,1,0],[0,0,1]]}, "canonical": true})");
  const auto w = t.write("w.json", R"({"rep": {"n": 3, "rows": [[0,0,1],[0,-1,0],[1,0,0]]}, "canonical": true})");
  const Run yes = cli("transverse " + e + " " + w);
  CHECK(yes.code == 0);
  CHECK(json::parse(yes.out)["transverse"] == true);
  CHECK(json::parse(yes.out)["margin"].get<double>() > 0.5);
  const Run no = cli("transverse " + e + " " + e);
  CHECK(no.code == 1);
  CHECK(json::parse(no.out)["transverse"] == false);
}

TEST_CASE("cocycle and lox") {
  TempDir t;
  const auto w = t.write("w.json", R"({"rep": {"n": 3, "rows": [[0,0,1],[0,-1,0],[1,0,0]]}})");
  const auto e = t.write("e.json", R"({"n": 3, "rows": [[1,0,0],[0,1,0],[0,0,1]]})");
  const auto d = t.write("d.json", R"({"n": 3, "rows": [[-4,0,0],[0,-1,0],[0,0,0.25]]})");
  const Run c = cli("cocycle --s1 " + w + " --s0 " + w + " --g " + d + " --xi " + e);
  REQUIRE(c.code == 0);
  const json cj = json::parse(c.out);
  CHECK(cj["m"] == json({-1, -1, 1}));
  CHECK(cj["a"][0].get<double>() == doctest::Approx(std::log(4.0)));
  const Run l = cli("lox " + d);
  REQUIRE(l.code == 0);
  const json lj = json::parse(l.out);
  CHECK(lj["lambda"][0].get<double>() == doctest::Approx(std::log(4.0)));
  CHECK(lj["gap"].get<double>() == doctest::Approx(std::log(4.0)));
  // 17 significant digits.
  CHECK(l.out.find("1.3862943611198906") != std::string::npos);
  const auto rot = t.write("rot.json", R"({"n": 2, "rows": [[0, -1], [1, 0]]})");
  CHECK(cli("lox " + rot).code == 1);
}

TEST_CASE("input and configuration errors exit with 2") {
  TempDir t;
  const auto bad = t.write("bad.json", "{\"n\": 3, \"rows\": [[1, 2");
  CHECK(cli("lox " + bad).code == 2);
  CHECK(cli("lox " + t.file("missing.json")).code == 2);
  const auto sing = t.write("s.json", R"({"n": 2, "rows": [[1, 2], [2, 4]]})");
  CHECK(cli("lox " + sing).code == 2);
  const auto cfg = t.write("cfg.json", R"({"seeed": 3})");
  CHECK(cli("--config " + cfg + " verify hopf").code == 2);
  CHECK(cli("verify hopf", "CHAMBERFLOW_SEED=abc").code == 2);
  CHECK(cli("verify no-such-suite").code == 2);
  CHECK(cli("no-such-command").code == 2);
  CHECK(cli("density select --input " + bad).code == 2);
}

TEST_CASE("config precedence: defaults, flags, config file, environment") {
  TempDir t;
  const auto cfg = t.write("cfg.json", R"({"seed": 7})");
  const auto seed_of = [](const Run& r) { return json::parse(r.out)["config"]["seed"].get<std::uint64_t>(); };
  CHECK(seed_of(cli("verify hopf")) == 42);
  CHECK(seed_of(cli("--seed 5 verify hopf")) == 5);
  CHECK(seed_of(cli("verify hopf --seed 5 --config " + cfg)) == 7);
  CHECK(seed_of(cli("--seed 5 --config " + cfg + " verify hopf", "CHAMBERFLOW_SEED=9")) == 9);
  // The hash follows the config, not the worker count.
  const auto h1 = json::parse(cli("--workers 1 verify hopf").out)["config_hash"];
  const auto h2 = json::parse(cli("--workers 3 verify hopf").out)["config_hash"];
  const auto h3 = json::parse(cli("--seed 1 verify hopf").out)["config_hash"];
  CHECK(h1 == h2);
  CHECK(h1 != h3);
}

TEST_CASE("verify reports failures with residuals") {
  TempDir t;
  const auto cfg = t.write("cfg.json", R"({"tolerances": {"tol_recon": 1e-15}})");
  const Run r = cli("--config " + cfg + " verify decompositions");
  CHECK(r.code == 1);
  const json j = json::parse(r.out);
  CHECK(j["pass"] == false);
  bool some_failed = false;
  for (const auto& row : j["identities"]) {
    CHECK(row.contains("max_residual"));
    if (row["pass"] == false) {
      some_failed = true;
      CHECK(row["max_residual"].get<double>() > 1e-15);
    }
  }
  CHECK(some_failed);
  const Run ok = cli("verify decompositions cocycles hopf");
  CHECK(ok.code == 0);
  CHECK(json::parse(ok.out)["identities"].size() == 8);
}

TEST_CASE("verify is deterministic modulo timing") {
  const Run a = cli("--workers 1 verify loxodromic density");
  const Run b = cli("--workers 4 verify loxodromic density");
  REQUIRE(a.code == 0);
  CHECK(dump_json(strip_volatile(json::parse(a.out))) == dump_json(strip_volatile(json::parse(b.out))));
}

TEST_CASE("limit cone files") {
  TempDir t;
  std::vector<std::size_t> rows;
  for (int len : {4, 5, 6}) {
    const std::string dir = t.file("len" + std::to_string(len));
    const Run r = cli("--out-dir " + dir + " limit-cone --fixture sl3-cone-family --max-len " + std::to_string(len));
    REQUIRE(r.code == 0);
    const std::string csv = slurp(dir + "/cone.csv");
    CHECK(csv.rfind("word_id,length,lambda_1,lambda_2,lambda_3,dir_x,dir_y\n", 0) == 0);
    rows.push_back(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1);
    CHECK(fs::exists(dir + "/cone.svg"));
  }
  CHECK(rows[0] < rows[1]);
  CHECK(rows[1] < rows[2]);
  // Byte-identical SVG at a fixed config.
  const std::string d2 = t.file("again");
  REQUIRE(cli("--out-dir " + d2 + " limit-cone --fixture sl3-cone-family --max-len 6").code == 0);
  CHECK(slurp(d2 + "/cone.svg") == slurp(t.file("len6") + "/cone.svg"));
  CHECK(slurp(d2 + "/cone.csv") == slurp(t.file("len6") + "/cone.csv"));

  // Single generator: every sample has the same direction.
  const auto gen = t.write("one.json", R"([{"n": 3, "rows": [[4, 0, 0], [0, 1, 0], [0, 0, 0.25]]}])");
  const std::string d3 = t.file("single");
  REQUIRE(cli("--out-dir " + d3 + " schottky limit-cone --input " + gen + " --max-len 4").code == 0);
  std::istringstream csv(slurp(d3 + "/cone.csv"));
  std::string line;
  std::getline(csv, line);
  std::set<std::string> dirs;
  while (std::getline(csv, line)) dirs.insert(line.substr(line.rfind(',', line.rfind(',') - 1)));
  CHECK(dirs.size() == 1);

  // n = 2: CSV only.
  const std::string d4 = t.file("sl2");
  REQUIRE(cli("--out-dir " + d4 + " limit-cone --fixture sl2-pair --max-len 3").code == 0);
  CHECK(fs::exists(d4 + "/cone.csv"));
  CHECK_FALSE(fs::exists(d4 + "/cone.svg"));
}

TEST_CASE("schottky subcommands") {
  const Run b = cli("schottky build --fixture sl2-pair");
  REQUIRE(b.code == 0);
  CHECK(json::parse(b.out)["generators"][0]["power"] == 3);
  const Run s = cli("sign-group --fixture sl3-sign-family --max-len 4");
  REQUIRE(s.code == 0);
  CHECK(json::parse(s.out)["order"] == 4);
  const Run d = cli("schottky decor-check --fixture sl3-sign-family --max-len 4");
  CHECK(d.code == 0);
  CHECK(json::parse(d.out)["rows"].size() == 4);
  const Run p = cli("mix-probe --fixture sl3-cone-family --max-len 6 --lo 40 --hi 120 --delta0 2");
  REQUIRE(p.code == 0);
  const json pj = json::parse(p.out);
  CHECK(pj["theta_interior"] == true);
  CHECK(pj["hits"].get<int>() > 0);
  CHECK(cli("schottky build --fixture sl2-pair --r 0.2 --eps 0.05").code == 1);
}

TEST_CASE("density subcommands") {
  TempDir t;
  const auto pts = t.write("pts.json", R"([{"v": [1.0]}, {"v": [1.4142135623730951]}])");
  const Run s = cli("density select --input " + pts + " --delta 0.05 --window -1,1");
  REQUIRE(s.code == 0);
  const json sj = json::parse(s.out);
  CHECK(sj["covered"] == true);
  CHECK(sj["reverified"] == true);
  CHECK(sj["subset"].size() <= 3);
  const Run c = cli("density cone --input " + pts + " --delta 0.05");
  REQUIRE(c.code == 0);
  CHECK(json::parse(c.out).contains("v_F"));
  const auto lattice = t.write("lat.json", R"([{"v": [1.0]}, {"v": [2.0]}])");
  CHECK(cli("density select --input " + lattice + " --delta 0.1 --window -1,1").code == 1);
  CHECK(cli("density select --input " + pts + " --window 1").code == 2);
}
