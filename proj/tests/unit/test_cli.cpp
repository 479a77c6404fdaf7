#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "semisep/job.hpp"

using namespace semisep;
using namespace semisep::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir(const std::string& name) {
  const fs::path p = fs::path(SEMISEP_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_binary(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + std::string(SEMISEP_CLI_PATH) + " " + args +
                          " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json det2_rank_one() {
  return {{"command", "det2"},
          {"kernel", {{"family", "rank_one"}}},
          {"alpha", json::array({0.0, 0.5, 2.0, json::array({1.0, 1.0})})},
          {"grid", {{"panels", 4}, {"nodes_per_panel", 8}}}};
}

json tb3_well() {
  return {{"command", "tb3"},
          {"potential", {{"family", "gaussian"}, {"amplitude", -1.0}, {"sigma", 1.0}}},
          {"z", json::array({-1.0, -2.0, json::array({-1.0, 0.3})})}};
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  for (std::string c; std::getline(s, c, ',');) out.push_back(c);
  return out;
}

}  // namespace

TEST_CASE("format_number: seventeen significant digits") {
  CHECK(format_number(1.0) == "1.0000000000000000e+00");
  CHECK(format_number(-0.1) == "-1.0000000000000001e-01");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(INFINITY) == "inf");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(std::stod(format_number(M_PI)) == M_PI);
}

TEST_CASE("commands round-trip through their names") {
  for (auto c : {Command::det2, Command::det1, Command::tb2, Command::tb3, Command::bound_states,
                 Command::bargmann, Command::converge})
    CHECK(parse_command(to_string(c)) == c);
  CHECK_THROWS_AS(parse_command("det3"), ConfigError);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(parse_config(det2_rank_one()));
  CHECK_NOTHROW(parse_config(tb3_well()));

  json both = det2_rank_one();
  both["potential"] = {{"family", "zero"}};
  CHECK_THROWS_AS(parse_config(both), ConfigError);

  json none = det2_rank_one();
  none.erase("kernel");
  CHECK_THROWS_AS(parse_config(none), ConfigError);

  json cut = tb3_well();
  cut["z"] = json::array({0.5});
  CHECK_THROWS_AS(parse_config(cut), ConfigError);
  cut["z"] = json::array({1e-12});
  CHECK_THROWS_AS(parse_config(cut), ConfigError);

  json fam = det2_rank_one();
  fam["kernel"]["family"] = "nonesuch";
  CHECK_THROWS_AS(parse_config(fam), ConfigError);

  json wrong_param = det2_rank_one();
  wrong_param["z"] = json::array({-1.0});
  CHECK_THROWS_AS(parse_config(wrong_param), ConfigError);

  json bad_grid = det2_rank_one();
  bad_grid["grid"]["panels"] = 0;
  CHECK_THROWS_AS(parse_config(bad_grid), ConfigError);

  json bad_tol = det2_rank_one();
  bad_tol["tolerances"] = {{"nonesuch", 1e-3}};
  CHECK_THROWS_AS(parse_config(bad_tol), ConfigError);

  json full_bargmann = {{"command", "bargmann"}, {"potential", {{"family", "gaussian"}, {"amplitude", -1.0}, {"sigma", 1.0}}}};
  CHECK_THROWS_AS(parse_config(full_bargmann), ConfigError);

  json half_tb3 = tb3_well();
  half_tb3["potential"]["domain"] = "half";
  CHECK_THROWS_AS(parse_config(half_tb3), ConfigError);

  json nonherm = {{"command", "bound_states"},
                  {"potential",
                   {{"family", "matrix_coupled"},
                    {"amplitude", json::array({json::array({-1.0, 1.0}), json::array({0.0, -1.0})})},
                    {"profile", {{"family", "gaussian"}, {"amplitude", 1.0}, {"sigma", 1.0}}}}}};
  CHECK_THROWS_AS(parse_config(nonherm), ConfigError);
}

TEST_CASE("parameter lists") {
  json j = det2_rank_one();
  j["alpha"] = {{"linspace", {{"start", 0.0}, {"stop", 1.0}, {"num", 5}}}};
  auto cfg = parse_config(j);
  REQUIRE(cfg.params.size() == 5);
  CHECK(cfg.params[2] == Complex(0.5));
  j["alpha"] = {{"logspace", {{"start", -2.0}, {"stop", 0.0}, {"num", 3}}}};
  cfg = parse_config(j);
  REQUIRE(cfg.params.size() == 3);
  CHECK(std::abs(cfg.params[1] - Complex(0.1)) < 1e-15);
  j["alpha"] = json::array({json{{"re", 1.0}, {"im", -2.0}}});
  CHECK(parse_config(j).params[0] == Complex(1.0, -2.0));
}

TEST_CASE("environment overrides of tolerances") {
  Tolerances t;
  setenv("SEMISEP_TOL_TB3", "1e-9", 1);
  apply_env_overrides(t);
  CHECK(t.tb3 == 1e-9);
  setenv("SEMISEP_TOL_TB3", "abc", 1);
  CHECK_THROWS_AS(apply_env_overrides(t), ConfigError);
  unsetenv("SEMISEP_TOL_TB3");
  for (const auto& n : Tolerances::names()) CHECK_NOTHROW(t.at(n));
}

TEST_CASE("det2 job: the rank-one row at alpha = 0 is exactly one") {
  const fs::path dir = tmp_dir("det2");
  auto cfg = parse_config(det2_rank_one());
  cfg.nystrom = true;
  const JobOutcome r = run_job(cfg, {1, dir.string()});
  CHECK(r.exit_code == kExitOk);
  CHECK(fs::exists(dir / "det2.csv"));
  CHECK(fs::exists(dir / "det2_summary.json"));
  REQUIRE(r.rows.size() == 4);
  for (std::size_t c = 0; c < r.header.size(); ++c) {
    const std::string& h = r.header[c];
    if (h.size() > 3 && h.substr(h.size() - 3) == "_re" && h != "alpha_re") {
      CHECK(r.rows[0][c] == format_number(1.0));
      // (1 - alpha) e^alpha at alpha = 2
      CHECK(std::abs(std::stod(r.rows[2][c]) + std::exp(2.0)) < 1e-8);
    }
  }
  const json s = json::parse(slurp(dir / "det2_summary.json"));
  CHECK(s["all_passed"] == true);
  CHECK(s["exit_code"] == 0);
}

TEST_CASE("det1 job on a trace-consistent kernel") {
  const fs::path dir = tmp_dir("det1");
  json j = {{"command", "det1"},
            {"kernel", {{"family", "exponential_green"}, {"mu", 1.5}}},
            {"alpha", json::array({0.3, -0.7})}};
  const JobOutcome r = run_job(parse_config(j), {1, dir.string()});
  CHECK(r.exit_code == kExitOk);
}

TEST_CASE("tb3 job: zero potential gives ones") {
  const fs::path dir = tmp_dir("tb3zero");
  json j = tb3_well();
  j["potential"] = {{"family", "zero"}};
  const JobOutcome r = run_job(parse_config(j), {1, dir.string()});
  CHECK(r.exit_code == kExitOk);
  for (const auto& row : r.rows)
    for (std::size_t c = 3; c + 1 < r.header.size(); ++c)
      if (r.header[c].find("_re") != std::string::npos && r.header[c].find("det") != std::string::npos)
        CHECK(row[c] == format_number(1.0));
}

TEST_CASE("converge job: errors decrease to the floor") {
  const fs::path dir = tmp_dir("converge");
  json j = {{"command", "converge"},
            {"potential", {{"family", "square_well"}, {"depth", 2.0}, {"width", 1.0}}},
            {"z", json::array({-1.0})}};
  const JobOutcome r = run_job(parse_config(j), {1, dir.string()});
  CHECK(r.exit_code == kExitOk);
  CHECK(r.rows.size() == 6);
  for (const auto& c : r.checks) CHECK_MESSAGE(c.passed, c.name << ": " << c.detail);
}

TEST_CASE("bound_states and bargmann jobs") {
  const fs::path dir = tmp_dir("counting");
  json b = {{"command", "bound_states"},
            {"potential", {{"family", "exponential"}, {"amplitude", -2.0}}}};
  const JobOutcome rb = run_job(parse_config(b), {1, dir.string()});
  CHECK(rb.exit_code == kExitOk);
  REQUIRE(rb.rows.size() == 3);
  for (const auto& row : rb.rows) CHECK(row[2] == "1");
  json g = {{"command", "bargmann"},
            {"potential", {{"family", "exponential"}, {"amplitude", -3.0}}}};
  const JobOutcome rg = run_job(parse_config(g), {1, dir.string()});
  CHECK(rg.exit_code == kExitOk);
  CHECK(std::abs(std::stod(rg.rows[0][1]) - 3.0) < 1e-10);
}

TEST_CASE("exit codes of the binary") {
  const fs::path dir = tmp_dir("exit");
  const fs::path good = write_config(dir, tb3_well());
  CHECK(run_binary("tb3 --config " + good.string() + " --out " + (dir / "o").string()) == kExitOk);

  // configuration errors
  CHECK(run_binary("det2 --config " + good.string()) == kExitConfig);  // command mismatch
  CHECK(run_binary("tb3") == kExitConfig);                              // missing --config
  CHECK(run_binary("tb3 --config " + good.string() + " --threads 0") == kExitConfig);
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK(run_binary("tb3 --config " + bad.string()) == kExitConfig);
  CHECK(run_binary("tb3 --config " + good.string(), "SEMISEP_TOL_TB3=oops") == kExitConfig);

  // I/O errors
  CHECK(run_binary("tb3 --config " + (dir / "missing.json").string()) == kExitIO);
  const fs::path blocker = dir / "afile";
  std::ofstream(blocker) << "x";
  CHECK(run_binary("tb3 --config " + good.string() + " --out " + (blocker / "sub").string()) == kExitIO);

  // inconsistency
  CHECK(run_binary("tb3 --config " + good.string() + " --out " + (dir / "o3").string(),
                   "SEMISEP_TOL_TB3=0") == kExitInconsistent);
  const json s = json::parse(slurp(dir / "o3" / "tb3_summary.json"));
  CHECK(s["all_passed"] == false);
  CHECK(s["exit_code"] == kExitInconsistent);
}

TEST_CASE("output is deterministic and independent of the thread count") {
  const fs::path dir = tmp_dir("determinism");
  json j = det2_rank_one();
  j["kernel"] = {{"family", "random_smooth"}, {"d", 2}, {"n1", 2}, {"n2", 1}, {"seed", 17}};
  j["alpha"] = {{"linspace", {{"start", -1.0}, {"stop", 1.0}, {"num", 7}}}};
  const fs::path cfg = write_config(dir, j);
  std::vector<std::string> outs;
  for (const char* t : {"1", "1", "3"}) {
    const fs::path o = dir / ("o" + std::to_string(outs.size()));
    REQUIRE(run_binary("det2 --config " + cfg.string() + " --threads " + t + " --out " + o.string()) ==
            kExitOk);
    outs.push_back(slurp(o / "det2.csv") + slurp(o / "det2_summary.json"));
  }
  CHECK(outs[0] == outs[1]);
  CHECK(outs[0] == outs[2]);
  const auto header = split(outs[0].substr(0, outs[0].find('\n')));
  CHECK(header.front() == "index");
  CHECK(header.back() == "wall_time_ms");
}

TEST_CASE("square-well oracle of the converge job") {
  // free case: no well, F = 1
  CHECK(std::abs(square_well_jost(0.0, 1.0, 0.0, Complex(0, 1)) - 1.0) < 1e-15);
  // threshold of the inner wave number, q = 0
  const Complex f = square_well_jost(1.0, 1.0, 0.5, Complex(0, 1));
  CHECK(std::isfinite(f.real()));
}
