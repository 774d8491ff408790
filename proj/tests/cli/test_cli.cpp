// Drives the conjoint_wtp executable end to end.
#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../support/fixtures.hpp"
#include "conjoint/io.hpp"

namespace fs = std::filesystem;
using namespace conjoint;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(CONJOINT_TEST_SCRATCH) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("CONJOINT_WTP_THREADS=2 '") + CONJOINT_WTP_BIN + "' " + args +
                          " > '" + out.string() + "' 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// A fast end-to-end configuration.
Json small_config() {
  Json j = to_json(default_run_config());
  j.erase("output_dir");
  j["seed"] = 7;
  j["simulation"]["n_respondents"] = 30;
  j["simulation"]["tasks_per_respondent"] = 10;
  j["model"]["chains"] = 2;
  j["model"]["warmup_per_chain"] = 200;
  j["model"]["draws_per_chain"] = 200;
  j["scenario"]["market_size"] = 200;
  return j;
}

fs::path write_config(const fs::path& dir, const Json& j, const std::string& name = "config.json") {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

Json without_wall_clock(Json report) {
  report.erase("wall_clock_seconds");
  return report;
}

}  // namespace

TEST_CASE("simulate writes a reproducible survey") {
  const fs::path dir = scratch("simulate");
  const Run a = run("simulate --out '" + (dir / "a").string() + "'", dir);
  REQUIRE(a.code == 0);
  const Run b = run("simulate --out '" + (dir / "b").string() + "'", dir);
  REQUIRE(b.code == 0);
  const std::string csv = slurp(dir / "a" / "choices.csv");
  CHECK(csv == slurp(dir / "b" / "choices.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6001);
  CHECK(fs::exists(dir / "a" / "provenance.json"));
  const Run c = run("simulate --seed 99 --out '" + (dir / "c").string() + "'", dir);
  REQUIRE(c.code == 0);
  CHECK(slurp(dir / "c" / "choices.csv") != csv);
}

TEST_CASE("invalid configuration exits 2 and names the field") {
  const fs::path dir = scratch("invalid");
  Json j = small_config();
  j["simulation"]["n_respondents"] = 0;
  Run r = run("simulate --config '" + write_config(dir, j).string() + "' --out '" + dir.string() + "'", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("n_respondents") != std::string::npos);

  j = small_config();
  j["simulaton"] = Json::object();
  r = run("simulate --config '" + write_config(dir, j).string() + "' --out '" + dir.string() + "'", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("simulaton") != std::string::npos);

  r = run("simulate --bogus", dir);
  CHECK(r.code == 2);
  r = run("fit --chains 0 --out '" + dir.string() + "'", dir);
  CHECK(r.code == 2);
  r = run("simulate --config '" + (dir / "missing.json").string() + "'", dir);
  CHECK(r.code == 5);
}

TEST_CASE("fit rejects a malformed CSV with exit 2") {
  const fs::path dir = scratch("malformed");
  std::ofstream(dir / "choices.csv") << "respondent,task,choice\n0,0,1\n";
  const Run r = run("fit --data '" + (dir / "choices.csv").string() + "' --out '" + dir.string() + "'", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("header") != std::string::npos);
}

TEST_CASE("wtp with and without truth, and the sign-safety exit") {
  const fs::path dir = scratch("wtp");
  const fs::path cfg = write_config(dir, small_config());
  const std::string common = " --config '" + cfg.string() + "' --out '" + dir.string() + "'";
  REQUIRE(run("simulate" + common, dir).code == 0);
  REQUIRE(run("fit" + common, dir).code == 0);
  CHECK(fs::exists(dir / "posterior.jsonl"));
  CHECK(fs::exists(dir / "diagnostics.json"));

  Run r = run("wtp" + common, dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "wtp_summary.csv"));
  CHECK(fs::exists(dir / "wtp_draws.csv"));
  CHECK_FALSE(fs::exists(dir / "recovery.json"));
  CHECK(r.out.find("recovery report skipped") != std::string::npos);

  r = run("wtp --truth '" + (dir / "provenance.json").string() + "'" + common, dir);
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "recovery.json"));

  // Fabricate a posterior where 1% of draws have a positive price effect.
  Eigen::MatrixXd mu(1000, 5);
  for (Eigen::Index i = 0; i < 1000; ++i) mu.row(i) << 0.5, 1.2, 1.0, 0.4, i < 10 ? 0.3 : -0.8;
  const PosteriorDraws bad = fixture::synthetic_draws(mu, {}, Eigen::VectorXd::Ones(5));
  {
    std::ofstream out(dir / "bad.jsonl");
    write_posterior(out, bad, ModelConfig{});
  }
  r = run("wtp --posterior '" + (dir / "bad.jsonl").string() + "'" + common, dir);
  CHECK(r.code == 4);
  r = run("revenue --posterior '" + (dir / "bad.jsonl").string() + "'" + common, dir);
  CHECK(r.code == 4);

  std::ofstream(dir / "garbage.jsonl") << "not json\n";
  r = run("wtp --posterior '" + (dir / "garbage.jsonl").string() + "'" + common, dir);
  CHECK(r.code == 2);
}

TEST_CASE("revenue scenarios") {
  const fs::path dir = scratch("revenue");
  Json j = small_config();
  const fs::path cfg = write_config(dir, j);
  const std::string out = " --out '" + dir.string() + "'";
  REQUIRE(run("simulate --config '" + cfg.string() + "'" + out, dir).code == 0);
  REQUIRE(run("fit --config '" + cfg.string() + "'" + out, dir).code == 0);
  Run r = run("revenue --config '" + cfg.string() + "'" + out, dir);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(dir / "revenue_curve.csv"));
  CHECK(fs::exists(dir / "revenue_draws.csv"));
  const Json report = read_json_file(dir / "report.json");
  CHECK(report.at("revenue").contains("argmax_price"));

  // Every revenue value is at most its price column.
  std::istringstream draws(slurp(dir / "revenue_draws.csv"));
  std::string line;
  std::getline(draws, line);
  std::vector<double> prices;
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) prices.push_back(std::stod(cell));
  }
  int rows = 0;
  while (std::getline(draws, line)) {
    std::istringstream row(line);
    std::string cell;
    for (double p : prices) {
      std::getline(row, cell, ',');
      CHECK(std::stod(cell) <= p);
    }
    ++rows;
  }
  CHECK(rows == 400);

  j["scenario"]["price_grid"] = {949};
  r = run("revenue --config '" + write_config(dir, j, "one.json").string() + "'" + out, dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("$949") != std::string::npos);
  CHECK(r.err.find("single point") != std::string::npos);

  j = small_config();
  j["scenario"]["upgrades"] = Json::array({Json{{"attribute", "screen"}, {"level", "OLED"}}});
  r = run("revenue --config '" + write_config(dir, j, "bad.json").string() + "'" + out, dir);
  CHECK(r.code == 2);
}

TEST_CASE("pipeline report, resume and config echo") {
  const fs::path dir = scratch("pipeline");
  const fs::path cfg = write_config(dir, small_config());
  const fs::path first = dir / "first";
  Run r = run("pipeline --config '" + cfg.string() + "' --out '" + first.string() + "'", dir);
  REQUIRE((r.code == 0 || r.code == 1));
  const Json report = read_json_file(first / "report.json");
  for (const char* stage : {"simulate", "fit", "wtp", "revenue"}) {
    CHECK(report.at("wall_clock_seconds").at(stage).get<double>() >= 0.0);
  }
  for (const auto& f : report.at("files")) CHECK(fs::exists(first / f.get<std::string>()));
  CHECK(report.at("overall_pass").get<bool>() == (r.code == 0));

  // Resume from fit: simulation is skipped and the existing survey is reused.
  const auto stamp = fs::last_write_time(first / "choices.csv");
  r = run("pipeline --from fit --config '" + cfg.string() + "' --out '" + first.string() + "'", dir);
  REQUIRE((r.code == 0 || r.code == 1));
  const Json resumed = read_json_file(first / "report.json");
  CHECK(fs::last_write_time(first / "choices.csv") == stamp);
  CHECK(resumed.at("stages_run") == Json::array({"fit", "wtp", "revenue"}));
  CHECK(without_wall_clock(resumed).at("wtp_summary") == report.at("wtp_summary"));

  // The echoed config alone reproduces the run.
  const fs::path echo = write_config(dir, report.at("config"), "echo.json");
  const fs::path second = dir / "second";
  r = run("pipeline --config '" + echo.string() + "' --out '" + second.string() + "'", dir);
  REQUIRE((r.code == 0 || r.code == 1));
  CHECK(slurp(first / "choices.csv") == slurp(second / "choices.csv"));
  CHECK(slurp(first / "posterior.jsonl") == slurp(second / "posterior.jsonl"));
  CHECK(without_wall_clock(read_json_file(second / "report.json")) == without_wall_clock(report));

  r = run("pipeline --from nowhere --out '" + second.string() + "'", dir);
  CHECK(r.code == 2);
}

TEST_CASE("single-chain smoke fit on the full survey finishes within a minute") {
  const fs::path dir = scratch("smoke");
  REQUIRE(run("simulate --out '" + dir.string() + "'", dir).code == 0);
  const auto t0 = std::chrono::steady_clock::now();
  const Run r = run("fit --chains 1 --draws 50 --out '" + dir.string() + "'", dir);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(r.code == 0);
  CHECK(secs < 60.0);
  MESSAGE("smoke fit took " << secs << " s");
}
