#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fusetrack/cli.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using fusetrack::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("fusetrack_cli_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string operator/(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  fs::path path_;
};

}  // namespace

TEST_CASE("usage errors exit with 2") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"teleport"}).code == 2);
  CHECK(cli({"simulate"}).code == 2);
  CHECK(cli({"track", "--log", "x.jsonl"}).code == 2);
  CHECK(cli({"track", "--log", "x.jsonl", "--query", "1", "--query-plate", "a"}).code == 2);
  CHECK(cli({"bench", "--seeds", "0"}).code == 2);
  CHECK(cli({"retrieve", "--log", "x", "--query", "1", "-k", "-3"}).code == 2);
  const auto help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("simulate") != std::string::npos);
}

TEST_CASE("simulate, track and retrieve end to end") {
  TempDir dir("e2e");
  const auto sim = cli({"simulate", "--seed", "4", "--out", dir.path().string()});
  REQUIRE(sim.code == 0);
  const auto log = slurp(dir / "events.jsonl");
  const auto records = lines_of(log).size();
  CHECK(sim.out.find(std::to_string(records) + " records") == 0);
  CHECK(fs::exists(dir / "scenario.json"));
  CHECK_FALSE(fs::exists(dir / "events.jsonl.tmp"));

  const auto tr = cli({"track", "--log", dir / "events.jsonl", "--world", dir / "scenario.json", "--query-plate",
                       "a", "--out", dir / "a.geojson"});
  REQUIRE(tr.code == 0);
  CHECK(tr.out.find("trajectory D B A") != std::string::npos);
  CHECK(tr.out.find("exact order true") != std::string::npos);
  CHECK(tr.out.find("wall time") != std::string::npos);
  const auto geo = nlohmann::json::parse(slurp(dir / "a.geojson"));
  CHECK(geo["type"] == "FeatureCollection");
  CHECK(geo["properties"]["mode"] == "gated");

  const auto full = cli({"track", "--log", dir / "events.jsonl", "--world", dir / "scenario.json", "--query-plate",
                         "a", "--no-gate", "--out", dir / "full.geojson"});
  REQUIRE(full.code == 0);
  CHECK(full.out.find("mode full-scan") != std::string::npos);
  const auto full_geo = nlohmann::json::parse(slurp(dir / "full.geojson"));
  CHECK(full_geo["properties"]["comparisons"].get<int>() > geo["properties"]["comparisons"].get<int>());

  const auto stdout_geo = cli({"track", "--log", dir / "events.jsonl", "--world", dir / "scenario.json",
                               "--query-plate", "a"});
  REQUIRE(stdout_geo.code == 0);
  CHECK(stdout_geo.out == slurp(dir / "a.geojson"));

  const auto ret = cli({"retrieve", "--log", dir / "events.jsonl", "--query", "0", "-k", "5"});
  REQUIRE(ret.code == 0);
  const auto rows = lines_of(ret.out);
  CHECK(rows.size() == 6);
  CHECK(rows[0].rfind("rank", 0) == 0);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].find("\t0\t") == std::string::npos);

  const auto none = cli({"retrieve", "--log", dir / "events.jsonl", "--query", "0", "-k", "0"});
  CHECK(none.code == 0);
  CHECK(lines_of(none.out).size() == 1);
}

TEST_CASE("a malformed configuration exits 3 and writes nothing") {
  TempDir dir("badcfg");
  spit(dir / "cfg.json", R"({"seed": 1, "gating": {"tau": 0.1, "tua": 2}})");
  const auto out = dir.path() / "out";
  const auto r = cli({"simulate", "--config", dir / "cfg.json", "--out", out.string()});
  CHECK(r.code == 3);
  CHECK(r.err.find("tua") != std::string::npos);
  CHECK_FALSE(fs::exists(out));

  spit(dir / "syntax.json", "{\n \"seed\": }");
  const auto s = cli({"simulate", "--config", dir / "syntax.json", "--out", out.string()});
  CHECK(s.code == 3);
  CHECK(s.err.find("line 2") != std::string::npos);
}

TEST_CASE("log problems map to exit codes") {
  TempDir dir("logs");
  REQUIRE(cli({"simulate", "--seed", "2", "--out", dir.path().string()}).code == 0);
  auto lines = lines_of(slurp(dir / "events.jsonl"));
  REQUIRE(lines.size() > 3);

  std::swap(lines[0], lines[3]);
  std::string unsorted;
  for (const auto& l : lines) unsorted += l + "\n";
  spit(dir / "unsorted.jsonl", unsorted);
  CHECK(cli({"track", "--log", dir / "unsorted.jsonl", "--query", "1"}).code == 3);

  spit(dir / "broken.jsonl", lines[1] + "\n{\"camera\": \n");
  const auto broken = cli({"track", "--log", dir / "broken.jsonl", "--query", "0"});
  CHECK(broken.code == 3);
  CHECK(broken.err.find("line 2") != std::string::npos);

  auto record = nlohmann::json::parse(lines[1]);
  record["camera"] = "Z";
  const auto unknown = cli({"track", "--log", dir / "events.jsonl", "--query-json", record.dump()});
  CHECK(unknown.code == 4);

  CHECK(cli({"track", "--log", dir / "missing.jsonl", "--query", "0"}).code == 4);
  CHECK(cli({"track", "--log", dir / "events.jsonl", "--query", "100000"}).code == 4);
  CHECK(cli({"track", "--log", dir / "events.jsonl", "--query-plate", "nobody"}).code == 4);
}

TEST_CASE("an empty log with a raw query gives an origin-only trajectory") {
  TempDir dir("empty");
  spit(dir / "empty.jsonl", "");
  nlohmann::json rec = {{"camera", "D"}, {"t", 10.0}, {"class", "car"}, {"shape", {0.0, 1.0}}};
  std::vector<double> hist(256, 0.0);
  hist[0] = 1.0;
  rec["hist"] = hist;
  const auto r = cli({"track", "--log", dir / "empty.jsonl", "--query-json", rec.dump(), "--out", dir / "t.geojson"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("trajectory D\n") != std::string::npos);
  const auto geo = nlohmann::json::parse(slurp(dir / "t.geojson"));
  CHECK(geo["features"].size() == 1);
  CHECK(geo["properties"]["comparisons"] == 0);
}

TEST_CASE("simulate and track are byte-for-byte reproducible") {
  TempDir a("det_a"), b("det_b");
  REQUIRE(cli({"simulate", "--seed", "11", "--out", a.path().string()}).code == 0);
  REQUIRE(cli({"simulate", "--seed", "11", "--out", b.path().string()}).code == 0);
  CHECK(slurp(a / "events.jsonl") == slurp(b / "events.jsonl"));
  CHECK(slurp(a / "scenario.json") == slurp(b / "scenario.json"));
  for (const auto* d : {&a, &b}) {
    REQUIRE(cli({"track", "--log", *d / "events.jsonl", "--world", *d / "scenario.json", "--query-plate", "d",
                 "--out", *d / "d.geojson"})
                .code == 0);
  }
  CHECK(slurp(a / "d.geojson") == slurp(b / "d.geojson"));
}

TEST_CASE("device outputs are written in place") {
  TempDir dir("device");
  REQUIRE(cli({"simulate", "--seed", "5", "--out", dir.path().string()}).code == 0);
  REQUIRE(fs::is_character_file("/dev/null"));
  CHECK(cli({"track", "--log", dir / "events.jsonl", "--query", "0", "--out", "/dev/null"}).code == 0);
  CHECK(fs::is_character_file("/dev/null"));
  CHECK_FALSE(fs::exists("/dev/null.tmp"));
}

TEST_CASE("bench writes one CSV row per seed") {
  TempDir dir("bench");
  const auto r = cli({"bench", "--seed", "3", "--seeds", "3", "--out", dir / "bench.csv"});
  REQUIRE(r.code == 0);
  const auto rows = lines_of(slurp(dir / "bench.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "seed,exact_order_gated,exact_order_full,comparisons_gated,comparisons_full,saved_fraction");
  CHECK(rows[1].rfind("3,", 0) == 0);
  CHECK(rows[3].rfind("5,", 0) == 0);
  const auto narrow = cli({"bench", "--seeds", "1", "--gate-threshold", "0"});
  CHECK(narrow.code == 3);
}
