#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sawlab/cli.hpp"

using namespace sawlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / "sawlab_cli_test";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

nlohmann::json load(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("selftest") { CHECK(run({"selftest"}) == 0); }

TEST_CASE("saw-enum totals") {
  const fs::path js = scratch() / "enum.json";
  REQUIRE(run({"saw-enum", "--dim", "2", "--nmax", "4", "--json", js.string()}) == 0);
  const auto j = load(js);
  CHECK(j["summary"]["totals"] == nlohmann::json::array({4, 12, 36, 100}));
  CHECK(j["version"] == SAWLAB_VERSION);
  CHECK(j["config_hash"].get<std::string>().size() == 16);
}

TEST_CASE("rw-green sum") {
  const fs::path js = scratch() / "rw.json";
  const fs::path csv = scratch() / "rw.csv";
  REQUIRE(run({"rw-green", "--dim", "3", "--mu", "0.1", "--json", js.string(), "--out", csv.string()}) == 0);
  const auto j = load(js);
  CHECK(j["summary"]["sum_C"].get<double>() == doctest::Approx(2.5).epsilon(1e-12));
  const std::string text = slurp(csv);
  CHECK(text.rfind("# sawlab ", 0) == 0);
  CHECK(text.find("x1,x2,x3,C,certificate") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run({"saw-enum", "--dim", "2", "--nmax", "4", "--bogus"}) == 2);
  CHECK(run({"nosuch"}) == 2);
  CHECK(run({"saw-enum", "--dim", "2", "--nmax", "4", "--torus", "two"}) == 2);
  CHECK(run({"rw-green", "--dim", "3", "--mu", "0.5"}) == 2);
  CHECK(run({"saw-enum", "--dim", "4", "--nmax", "40"}) == 3);
  CHECK(run({"--help"}) == 0);
}

TEST_CASE("identical configs give identical bytes") {
  const fs::path a = scratch() / "mc_a.csv", b = scratch() / "mc_b.csv";
  for (const fs::path& p : {a, b})
    REQUIRE(run({"saw-mc", "--dim", "2", "--z", "0.2", "--steps", "200000", "--burnin", "1000", "--seed", "7",
                 "--chains", "2", "--out", p.string(), "--json", (p.string() + ".summary")}) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a.string() + ".hist") == slurp(b.string() + ".hist"));
  CHECK(slurp(a.string() + ".json") == slurp(b.string() + ".json"));
  const auto side = load(a.string() + ".json");
  CHECK(side["rng"] == kRngId);
  CHECK(side["chains"].size() == 2);
}

TEST_CASE("lace and decomp from a counts cache") {
  const fs::path cache = scratch() / "c5.txt";
  REQUIRE(run({"saw-enum", "--dim", "5", "--nmax", "6", "--cache", cache.string(), "--json",
               (scratch() / "c5.json").string()}) == 0);
  const fs::path lj = scratch() / "lace.json";
  REQUIRE(run({"lace", "--from-counts", cache.string(), "--z", "0.02,0.04,0.06", "--check-assumption", "--out",
               lj.string()}) == 0);
  const auto l = load(lj);
  for (const char* key : {"K1", "K2", "eps", "p", "items"}) CHECK(l["assumption"].contains(key));
  CHECK(l["assumption"]["items"].size() == 5);
  const fs::path dj = scratch() / "decomp.json";
  REQUIRE(run({"decomp", "--from-counts", cache.string(), "--z", "1/20", "--box", "4", "--exact", "--out", dj.string()}) == 0);
  const auto d = load(dj);
  CHECK(d["exact"]["sum_E"] == "0");
  CHECK(d["exact"]["sum_x2_E"] == "0");
  CHECK(d["remainder"]["within"] == true);
}

TEST_CASE("plateau outputs and plot data round trip") {
  const fs::path base = scratch() / "pl";
  const fs::path plot = scratch() / "pl_plot.csv";
  REQUIRE(run({"plateau", "--dim", "2", "--r", "3", "--z-grid", "0.1,0.2", "--nmax", "6", "--zc", "0.379",
               "--out", base.string(), "--plot", plot.string()}) == 0);
  const auto j = load(base.string() + ".json");
  CHECK(j["pass"]["psi_order"] == true);
  PlateauOptions opt;
  opt.zc = 0.379;
  const PlateauReport rep = plateau_report_enum(2, 3, {0.1, 0.2}, 6, opt);
  std::ifstream is(plot);
  CHECK(read_plot_data(is) == plot_rows(rep));
}

TEST_CASE("empty report gives a header-only plot file") {
  PlateauReport rep;
  rep.dim = 2;
  rep.r = 3;
  std::stringstream ss;
  emit_plot_data(ss, rep);
  CHECK(ss.str() == "dim=2\nz,x1,x2,norm_inf,GT,reference\n");
  CHECK(read_plot_data(ss).empty());
}
