#include <catch2/catch.hpp>

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jbt/cli.hpp"

using namespace jbt;
using namespace jbt::cli;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "jbt");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  int code = run(int(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("jbt_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::vector<double> scanned_column(const json& doc) {
  std::vector<double> out;
  for (const auto& r : doc["rows"]) out.push_back(r["lambda_scanned"].get<double>());
  return out;
}

}  // namespace

TEST_CASE("complex number parsing", "[cli]") {
  CHECK(parse_complex("3") == cplx(3, 0));
  CHECK(parse_complex("-2.5") == cplx(-2.5, 0));
  CHECK(parse_complex("i") == cplx(0, 1));
  CHECK(parse_complex("-i") == cplx(0, -1));
  CHECK(parse_complex("2i") == cplx(0, 2));
  CHECK(parse_complex("1+2i") == cplx(1, 2));
  CHECK(parse_complex("1-i") == cplx(1, -1));
  CHECK(parse_complex("-3+0.5i") == cplx(-3, 0.5));
  CHECK(parse_complex("1e-3-4e-2i") == cplx(1e-3, -4e-2));
  CHECK(parse_complex("1e+2") == cplx(100, 0));
  CHECK_THROWS_AS(parse_complex("abc"), InvalidParameters);
  CHECK_THROWS_AS(parse_complex(""), InvalidParameters);
}

TEST_CASE("grid, window and list parsing", "[cli]") {
  auto g = parse_grid("1i:4+1i:4");
  CHECK(g.start == cplx(0, 1));
  CHECK(g.stop == cplx(4, 1));
  CHECK(g.count == 4);
  RunConfig cfg;
  cfg.lambda_grid = g;
  auto pts = grid_points(cfg);
  REQUIRE(pts.size() == 4);
  CHECK(std::abs(pts[1] - cplx(4.0 / 3, 1)) < 1e-15);
  CHECK_THROWS_AS(parse_grid("0:1"), InvalidParameters);
  CHECK_THROWS_AS(parse_grid("0:1:0"), InvalidParameters);
  CHECK(parse_window("-0.5:20") == std::pair{-0.5, 20.0});
  CHECK_THROWS_AS(parse_window("3:1"), InvalidParameters);
  CHECK(parse_list("0, 1.5,-2") == std::vector<double>{0, 1.5, -2});
}

TEST_CASE("gram-schmidt command", "[cli]") {
  auto r = invoke({"gram-schmidt", "--alpha", "0.5", "--beta", "0.5", "--power", "1"});
  REQUIRE(r.code == kOk);
  auto doc = json::parse(r.out);
  const auto& u = doc["u"][0];
  CHECK(u["endpoint"] == 1);
  CHECK(std::abs(u["terms"][0]["coeff"]["re"].get<double>() - 0.70710678118654752) < 1e-12);

  auto r2 = invoke({"gram-schmidt", "--power", "2"});
  REQUIRE(r2.code == kOk);
  auto d2 = json::parse(r2.out);
  CHECK(d2["interaction_matrix"].size() == 8);
  CHECK(d2["pass"] == true);
  CHECK(d2["max_deviation"].get<double>() < 1e-9);

  auto bad = invoke({"gram-schmidt", "--alpha", "1.5"});
  CHECK(bad.code == kUsage);
  CHECK(bad.err.find("alpha") != std::string::npos);

  auto tight = invoke({"gram-schmidt", "--power", "2", "--tolerance", "1e-30"});
  CHECK(tight.code == kCheckFailed);

  auto csv = invoke({"gram-schmidt", "--power", "1", "--format", "csv"});
  CHECK(csv.code == kOk);
  CHECK(csv.out.rfind("endpoint,k,coeff_re", 0) == 0);
}

TEST_CASE("spectrum command", "[cli]") {
  auto r = invoke({"spectrum", "--extension", "friedrichs", "--power", "1", "--window", "-0.5:20"});
  REQUIRE(r.code == kOk);
  auto s = scanned_column(json::parse(r.out));
  REQUIRE(s.size() == 4);
  for (size_t i = 0; i < 4; ++i) CHECK(std::abs(s[i] - std::vector<double>{0, 3, 8, 15}[i]) < 1e-8);

  auto r1 = invoke({"spectrum", "--extension", "gamma1", "--power", "1", "--window", "-2:10"});
  REQUIRE(r1.code == kOk);
  auto s1 = scanned_column(json::parse(r1.out));
  REQUIRE(s1.size() == 4);
  for (size_t i = 0; i < 4; ++i) CHECK(std::abs(s1[i] - std::vector<double>{-1, 0, 3, 8}[i]) < 1e-8);

  auto rp = invoke({"spectrum", "--extension", "periodic", "--power", "1", "--window", "-2:10", "--format", "csv"});
  REQUIRE(rp.code == kOk);
  std::istringstream lines(rp.out);
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == "index,lambda_closed_form,lambda_scanned,residual");
  int rows = 0;
  while (std::getline(lines, row)) {
    ++rows;
    CHECK(row.find(",,") != std::string::npos);  // no closed-form column value
  }
  CHECK(rows >= 2);

  // An impossible tolerance leaves closed-form points without a partner.
  auto tight = invoke({"spectrum", "--power", "1", "--window", "-0.5:20", "--tolerance", "1e-300"});
  CHECK(tight.code == kUnmatchedPole);
}

TEST_CASE("mfunction command", "[cli]") {
  auto r = invoke({"mfunction", "--power", "1", "--lambda-grid", "1i:2+1i:3"});
  REQUIRE(r.code == kOk);
  auto doc = json::parse(r.out);
  REQUIRE(doc["records"].size() == 3);
  for (const auto& rec : doc["records"]) {
    CHECK(rec["matrix"].size() == 2);
    CHECK(rec["matrix"][0].size() == 2);
  }
  CHECK(doc["config"]["n"] == 1);

  auto sep = invoke({"mfunction", "--extension", "separated", "--theta", "0,1,2", "--power", "1", "--lambda", "i"});
  CHECK(sep.code == kUsage);

  auto on = invoke({"mfunction", "--power", "1", "--lambda", "3", "--lambda", "i"});
  CHECK(on.code == kSkippedPoints);
  CHECK(json::parse(on.out)["records"].size() == 1);
  CHECK(on.err.find("skipped 1") != std::string::npos);

  CHECK(invoke({"mfunction", "--power", "1"}).code == kUsage);
}

TEST_CASE("mfunction output is deterministic", "[cli][property]") {
  std::vector<std::string> args = {"mfunction", "--power", "2", "--lambda-grid", "-3+0.5i:10+0.1i:7"};
  CHECK(invoke(args).out == invoke(args).out);
  args.push_back("--format");
  args.push_back("csv");
  CHECK(invoke(args).out == invoke(args).out);
}

TEST_CASE("saved m-function grids reproduce the in-memory Herglotz verdicts", "[cli][property]") {
  for (std::string fmt : {"json", "csv"})
    for (std::string ext : {"friedrichs", "gamma1", "periodic"})
      for (int n : {1, 2}) {
        std::vector<std::string> args = {"mfunction",  "--power", std::to_string(n), "--extension", ext,
                                         "--lambda",   "i",       "--lambda",         "-i",          "--lambda",
                                         "1+2i",       "--lambda", "-3+0.5i",         "--format",    fmt};
        auto r = invoke(args);
        REQUIRE(r.code == kOk);
        std::string path = temp_path("grid." + fmt);
        write_file(path, r.out);

        std::ifstream in(path);
        auto recs = read_records(in);
        REQUIRE(recs.size() == 4);
        auto verdicts = herglotz_from_records(recs, kHerglotzPositivityTol, kHerglotzSymmetryTol);

        Parameters pr(0.3, 0.7, n);
        RunConfig cfg;
        cfg.extension = ext;
        cfg.n = n;
        auto spec = extension_of(cfg);
        for (const auto& v : verdicts) {
          if (v.lambda.imag() <= 0) continue;
          auto e = herglotz_check(spec, {v.lambda}, pr).entries[0];
          REQUIRE(v.min_imag_eigenvalue.has_value());
          CHECK(std::abs(*v.min_imag_eigenvalue - e.min_imag_eigenvalue) < 1e-12);
          if (v.symmetry_error) CHECK((*v.symmetry_error < kHerglotzSymmetryTol) == e.symmetric);
          CHECK(v.pass == (e.positive && (!v.symmetry_error || e.symmetric)));
        }
        auto vr = invoke({"verify", "--input", path});
        bool all = std::all_of(verdicts.begin(), verdicts.end(), [](auto& v) { return v.pass; });
        CHECK(vr.code == (all ? kOk : kCheckFailed));
        std::remove(path.c_str());
      }
}

TEST_CASE("TOML config overrides flags", "[cli]") {
  std::string path = temp_path("cfg.toml");
  write_file(path, "alpha = 0.5\nbeta = 0.5\nn = 1\noutput_format = \"json\"\n");
  auto r = invoke({"gram-schmidt", "--alpha", "0.3", "--power", "3", "--config", path});
  REQUIRE(r.code == kOk);
  auto doc = json::parse(r.out);
  CHECK(doc["config"]["alpha"] == 0.5);
  CHECK(doc["config"]["n"] == 1);
  CHECK(std::abs(doc["u"][0]["terms"][0]["coeff"]["re"].get<double>() - 0.70710678118654752) < 1e-12);

  write_file(path, "extension = \"separated\"\ntheta = [0.0, 0.5]\nn = 1\nlambdas = [\"1+1i\", 2.5]\n");
  auto m = invoke({"mfunction", "--config", path});
  CHECK(m.code == kOk);
  CHECK(json::parse(m.out)["records"].size() == 2);

  write_file(path, "alpha = [1\n");
  CHECK(invoke({"gram-schmidt", "--config", path}).code == kUsage);
  std::remove(path.c_str());
}

TEST_CASE("verify reports the first failing suite under an impossible tolerance", "[cli]") {
  auto r = invoke({"verify", "--power", "1", "--tolerance", "1e-15"});
  CHECK(r.code != kOk);
  CHECK(r.err.find("first failing suite:") != std::string::npos);
  CHECK(r.out.find("FAIL") != std::string::npos);
}

TEST_CASE("usage errors", "[cli]") {
  CHECK(invoke({}).code == kUsage);
  CHECK(invoke({"bogus"}).code == kUsage);
  CHECK(invoke({"spectrum", "--extension", "nope"}).code == kUsage);
  CHECK(invoke({"spectrum", "--format", "xml"}).code == kUsage);
  CHECK(invoke({"--help"}).code == kOk);
}
