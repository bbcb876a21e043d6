#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ptspec/cli.hpp"
#include "ptspec/polyrec.hpp"

using namespace ptspec;
namespace fs = std::filesystem;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "ptspec");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("ptspec_cli_" + name);
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("command list") {
  const auto& names = command_names();
  CHECK(names.size() == 13);
  CHECK(names.front() == "poly");
  CHECK(names.back() == "all");
}

TEST_CASE("poly payload") {
  RunConfig cfg;
  cfg.nu = 2;
  const auto rep = dispatch("poly", cfg);
  CHECK(rep.pass());
  const auto p = poly_from_json(rep.payload.at("polynomial"));
  CHECK(p.nu() == 2);
  CHECK(p.coeff(0, 2) == 1);
  CHECK(p.coeff(1, 1) == -3);
  CHECK(p.coeff(2, 0) == 3);
  CHECK(p.coeff(0, 0) == -1);
}

TEST_CASE("runs are deterministic") {
  RunConfig cfg;
  cfg.nu = 2;
  const auto a = dispatch("poly", cfg), b = dispatch("poly", cfg);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.config_digest == cfg.digest());

  cfg.out_dir = scratch("det_a");
  const auto pa = emit(a, cfg);
  cfg.out_dir = scratch("det_b");
  const auto pb = emit(b, cfg);
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    CHECK(pa[i].filename() == pb[i].filename());
    CHECK(slurp(pa[i]) == slurp(pb[i]));
  }
  const std::string csv = slurp(pa.back());
  CHECK(csv.rfind("estimate_id,j,value\n", 0) == 0);
  CHECK(csv.find("estimate_id,j,value", 1) == std::string::npos);
}

TEST_CASE("digest ignores execution settings") {
  RunConfig a, b;
  b.jobs = 4;
  b.out_dir = "/tmp";
  CHECK(a.digest() == b.digest());
  b.nu = 3;
  CHECK(a.digest() != b.digest());
}

TEST_CASE("config validation and merge") {
  RunConfig cfg;
  cfg.merge_json(nlohmann::json{{"nu", 3}, {"L", 15.0}});
  CHECK(cfg.nu == 3);
  CHECK(cfg.L == 15.0);
  CHECK_THROWS_AS(cfg.merge_json(nlohmann::json{{"bogus", 1}}), ConfigError);
  RunConfig bad;
  bad.j_min = 4;
  bad.j_max = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = RunConfig{};
  bad.L = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(dispatch("nonsense", RunConfig{}), UsageError);
}

TEST_CASE("exit codes") {
  const auto out = scratch("codes");
  CHECK(run({"poly", "--nu", "2", "--out", out.string()}) == 0);
  CHECK(fs::exists(out));
  CHECK(run({"nonsense", "--out", out.string()}) == 2);
  CHECK(run({"poly", "--jmin", "5", "--jmax", "1", "--out", out.string()}) == 2);
  CHECK(run({"poly", "--format", "xml", "--out", out.string()}) == 2);
  const auto blocker = scratch("blocker");
  { std::ofstream(blocker) << "x"; }
  CHECK(run({"poly", "--out", (blocker / "sub").string()}) == 3);
  CHECK(run({"poly", "--config", (out / "missing.json").string()}) == 3);
}

TEST_CASE("flags override the config file") {
  const auto out = scratch("override");
  fs::create_directories(out);
  { std::ofstream(out / "cfg.json") << R"({"nu": 3, "format": "csv"})"; }
  CHECK(run({"poly", "--config", (out / "cfg.json").string(), "--nu", "2", "--out", out.string()}) == 0);
  RunConfig expect;
  expect.nu = 2;
  expect.format = OutputFormat::csv;
  CHECK(fs::exists(out / ("poly-" + expect.digest() + ".csv")));
  CHECK_FALSE(fs::exists(out / ("poly-" + expect.digest() + ".json")));
}

}
