#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lyapoqs/cli.hpp"
#include "lyapoqs/config.hpp"
#include "lyapoqs/errors.hpp"
#include "lyapoqs/observables.hpp"

using namespace lyapoqs;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(LYAPOQS_SOURCE_DIR) + "/configs/";

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "lyapunov-oqs");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("lyapoqs_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// First data row of a CSV, skipping comments and the header.
std::vector<double> first_row(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
    return out;
  }
  return {};
}

std::string error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("strict config parsing names the offending key") {
  CHECK(error_message(R"({"level": "l1", "colour": 1})").find("colour") != std::string::npos);
  CHECK(error_message(R"({"resonant_level": {"eps0": 0, "gamma_l": 1, "gamma_r": 1, "beta_l": 1, "beta_r": 1,
                          "typo": 3}})")
            .find("resonant_level.typo") != std::string::npos);
  CHECK(error_message(R"({"level": "l3"})").find("l3") != std::string::npos);
  CHECK(error_message(R"({"time_grid": {"t_max": "ten"}})").find("time_grid.t_max") != std::string::npos);
  CHECK(error_message("{ not json").find("malformed") != std::string::npos);
}

TEST_CASE("resolved config echoes defaults") {
  const RunConfig cfg = parse_config(R"({"resonant_level": {"eps0": 0.1, "gamma_l": 1, "gamma_r": 1,
                                         "beta_l": 1, "beta_r": 1}})");
  const auto j = nlohmann::json::parse(cfg.resolved_json);
  CHECK(j["level"] == "l1");
  CHECK(j["resonant_level"]["mu_l"] == 0.0);
  CHECK(j["quadrature"]["abs_tol"] == 1e-10);
  CHECK(j["time_grid"]["n_points"] == 101);
}

TEST_CASE("time grids") {
  TimeGrid lin{0.0, 2.0, 5, "linear"};
  const auto a = lin.points();
  REQUIRE(a.size() == 5);
  CHECK(a[0] == 0.0);
  CHECK(a[4] == 2.0);
  TimeGrid lg{0.01, 100.0, 5, "log"};
  const auto b = lg.points();
  CHECK(b[0] == doctest::Approx(0.01));
  CHECK(b[2] == doctest::Approx(1.0));
  CHECK(b[4] == doctest::Approx(100.0));
}

TEST_CASE("number formatting round-trips") {
  CHECK(format_number(0.0) == "0");
  for (double x : {0.1, 1.0 / 3.0, -2.5e-17, 6.02e23}) CHECK(std::stod(format_number(x)) == x);
}

TEST_CASE("ness on the resonant level matches the analytic suite") {
  const fs::path out = scratch("rl");
  CHECK(run({"ness", "--config", kConfigs + "resonant_level.json", "--out", out.string()}) == 0);
  const auto row = first_row(out / "ness.csv");
  REQUIRE(row.size() == 2);
  const RunConfig cfg = load_config(kConfigs + "resonant_level.json");
  CHECK(row[0] == doctest::Approx(resonant_level_suite(cfg.resonant_level).occupation).epsilon(1e-10));
  const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
  CHECK(manifest["command"] == "ness");
  CHECK(manifest["config"]["resonant_level"]["eps0"] == 0.5);
  CHECK(manifest.contains("units"));
  const auto diag = nlohmann::json::parse(slurp(out / "diagnostics.json"));
  CHECK(diag.contains("quadrature"));
  CHECK(diag.contains("positivity_defect"));
  CHECK(diag.contains("memory_times"));
}

TEST_CASE("every subcommand runs on the chain example") {
  for (const char* cmd : {"dynamics", "two-time", "chain-current", "conductance", "spectrum", "pert-ness"}) {
    const fs::path out = scratch(std::string("chain_") + cmd);
    CHECK(run({cmd, "--config", kConfigs + "chain4_lorentzian.json", "--out", out.string()}) == 0);
    CHECK(fs::exists(out / "manifest.json"));
  }
  CHECK(run({"dynamics", "--config", kConfigs + "chain4_lorentzian.json", "--out", scratch("chain_l2").string(),
             "--level", "l2"}) == 0);
  CHECK(run({"two-time", "--config", kConfigs + "chain4_lorentzian.json", "--out", scratch("chain_tt_l2").string(),
             "--level", "l2"}) == 2);
  const fs::path out = scratch("chain_header");
  CHECK(run({"ness", "--config", kConfigs + "chain4_lorentzian.json", "--out", out.string()}) == 0);
  CHECK(slurp(out / "ness.csv").find("ReC_0_1,ImC_0_1") != std::string::npos);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("bad");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "unknown.json") << R"({"system": {"epsilon": 0.1, "statistics": "fermion",
      "hamiltonian": {"chain": {"onsite": [0], "hopping": []}}, "baths": [], "extra": 1}})";
    std::ofstream(dir / "malformed.json") << "{ \"level\": ";
  }
  CHECK(run({"ness", "--config", (dir / "unknown.json").string(), "--out", (dir / "o").string()}) == 2);
  CHECK(run({"ness", "--config", (dir / "malformed.json").string(), "--out", (dir / "o").string()}) == 2);
  CHECK(run({"ness", "--config", (dir / "missing.json").string()}) == 2);
  CHECK(run({"ness", "--config", kConfigs + "resonant_level.json", "--level", "l9"}) == 2);
  CHECK(run({"frobnicate"}) == 2);

  // A dark state is a numerical failure: exit 3 with a diagnostic payload.
  std::ofstream(dir / "dark.json") << R"({"system": {"epsilon": 0.3, "statistics": "fermion",
      "hamiltonian": {"chain": {"onsite": [0, 0, 0], "hopping": [1, 1]}},
      "baths": [{"site": 1, "beta": 1, "spectral": {"type": "wide_band", "gamma": 1}}]}})";
  const fs::path out = dir / "dark_out";
  CHECK(run({"ness", "--config", (dir / "dark.json").string(), "--out", out.string()}) == 3);
  const auto diag = nlohmann::json::parse(slurp(out / "diagnostics.json"));
  CHECK(diag["error"] == "NonUniqueNESS");
}

TEST_CASE("thread variable is validated") {
  setenv("LYAPOQS_THREADS", "zero", 1);
  CHECK(run({"ness", "--config", kConfigs + "resonant_level.json", "--out", scratch("thr").string()}) == 2);
  setenv("LYAPOQS_THREADS", "3", 1);
  const fs::path out = scratch("thr3");
  CHECK(run({"ness", "--config", kConfigs + "resonant_level.json", "--out", out.string()}) == 0);
  CHECK(nlohmann::json::parse(slurp(out / "manifest.json"))["threads"] == 3);
  unsetenv("LYAPOQS_THREADS");
}

TEST_CASE("validate subcommand") {
  const fs::path out = scratch("validate");
  CHECK(run({"validate", "--level", "all", "--n", "3", "--seed", "7", "--out", out.string()}) == 0);
  CHECK(fs::exists(out / "validate.csv"));
  CHECK(run({"validate", "--n", "9"}) == 2);
}
