#include "conjoint/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iostream>

namespace conjoint {
namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SignSafetyError*>(&e)) return kExitSignSafety;
  if (dynamic_cast<const FitError*>(&e)) return kExitSampler;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitIo;
  if (dynamic_cast<const Error*>(&e)) return kExitValidation;
  return kExitValidation;
}

SimulateResult cmd_simulate(const RunConfig& config, const fs::path& out_dir) {
  if (!config.ground_truth) {
    throw ConfigError("ground_truth is required to simulate a survey");
  }
  SimulateResult out;
  out.simulation = simulate_survey(config.scheme, *config.ground_truth, config.simulation);
  out.choices_path = out_dir / "choices.csv";
  out.provenance_path = out_dir / "provenance.json";
  write_file_atomic(out.choices_path,
                    [&](std::ostream& os) { write_choices_csv(os, out.simulation.dataset); });
  Json prov = provenance_json(out.simulation.dataset, config.simulation);
  prov["seed"] = config.seed;
  write_json_file(out.provenance_path, prov);
  return out;
}

SampleResult cmd_fit(const RunConfig& config, const fs::path& dataset_path,
                     const fs::path& out_dir, std::size_t threads) {
  std::ifstream in(dataset_path);
  if (!in) throw IoError("cannot open dataset '" + dataset_path.string() + "'");
  const ChoiceDataset dataset = read_choices_csv(in, config.scheme);
  const Design design = build_design(dataset);
  SampleResult result = sample(design, config.model, config.scheme, threads);

  write_file_atomic(out_dir / "posterior.jsonl",
                    [&](std::ostream& os) { write_posterior(os, result.draws, config.model); });
  write_json_file(out_dir / "diagnostics.json",
                  to_json(result.diagnostics, static_cast<std::size_t>(result.draws.draws())));
  return result;
}

WtpResult compute_wtp(const PosteriorDraws& draws, const GroundTruth* truth, double mass) {
  WtpResult out;
  out.draws = all_wtp_draws(draws);
  for (const auto& w : out.draws) out.summaries.push_back(summarize(w, mass));
  if (truth) out.recovery = recovery_report(*truth, out.summaries);
  return out;
}

Json wtp_json(const WtpResult& wtp) {
  Json summaries = Json::array();
  for (const auto& s : wtp.summaries) {
    summaries.push_back({{"feature", s.feature},
                         {"mean", s.mean},
                         {"hdi_low", s.hdi_low},
                         {"hdi_high", s.hdi_high},
                         {"hdi_mass", s.hdi_mass},
                         {"flagged_count", s.flagged_count}});
  }
  return summaries;
}

namespace {

Json recovery_json(const RecoveryReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"feature", r.feature},
                    {"true_wtp", r.true_wtp},
                    {"mean", r.summary.mean},
                    {"hdi_low", r.summary.hdi_low},
                    {"hdi_high", r.summary.hdi_high},
                    {"covered", r.covered},
                    {"abs_error", r.abs_error}});
  }
  return {{"features", rows}, {"overall_pass", report.overall_pass}};
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

WtpResult cmd_wtp(const PosteriorDraws& draws, const std::optional<GroundTruth>& truth,
                  const fs::path& out_dir) {
  WtpResult out = compute_wtp(draws, truth ? &*truth : nullptr);
  write_file_atomic(out_dir / "wtp_summary.csv", [&](std::ostream& os) {
    write_wtp_summary_csv(os, out.summaries, truth ? &*truth : nullptr);
  });
  write_file_atomic(out_dir / "wtp_draws.csv",
                    [&](std::ostream& os) { write_wtp_draws_csv(os, out.draws); });
  if (out.recovery) write_json_file(out_dir / "recovery.json", recovery_json(*out.recovery));
  return out;
}

WtpResult cmd_wtp(const fs::path& posterior_path, const std::optional<fs::path>& truth_path,
                  const fs::path& out_dir) {
  const PosteriorDraws draws = read_posterior_file(posterior_path);
  std::optional<GroundTruth> truth;
  if (truth_path) truth = read_truth_file(*truth_path);
  return cmd_wtp(draws, truth, out_dir);
}

Json revenue_json(const RevenueCurve& curve) {
  Json points = Json::array();
  for (const auto& p : curve.summary) {
    points.push_back({{"price", p.price}, {"mean", p.mean}, {"hdi_low", p.hdi_low}, {"hdi_high", p.hdi_high}});
  }
  return {{"argmax_price", curve.argmax_price},
          {"argmax_hdi", {curve.argmax_hdi.low, curve.argmax_hdi.high}},
          {"flagged_count", curve.flagged_count},
          {"warnings", curve.warnings},
          {"curve", points}};
}

RevenueCurve cmd_revenue(const PosteriorDraws& draws, const BundleScenario& scenario,
                         std::uint64_t seed, const fs::path& out_dir, std::size_t threads) {
  RevenueCurve curve = revenue_curve(draws, scenario, seed, 0.95, threads);
  write_file_atomic(out_dir / "revenue_curve.csv",
                    [&](std::ostream& os) { write_revenue_summary_csv(os, curve); });
  write_file_atomic(out_dir / "revenue_draws.csv",
                    [&](std::ostream& os) { write_revenue_draws_csv(os, curve); });
  Json report = Json::object();
  const fs::path report_path = out_dir / "report.json";
  if (fs::exists(report_path)) report = read_json_file(report_path);
  report["revenue"] = revenue_json(curve);
  write_json_file(report_path, report);
  return curve;
}

Stage parse_stage(const std::string& name) {
  if (name == "simulate") return Stage::simulate;
  if (name == "fit") return Stage::fit;
  if (name == "wtp") return Stage::wtp;
  if (name == "revenue") return Stage::revenue;
  throw ConfigError("--from must be one of simulate, fit, wtp, revenue (got '" + name + "')");
}

PipelineResult cmd_pipeline(const RunConfig& config, const fs::path& out_dir, Stage from,
                            std::size_t threads) {
  PipelineResult result;
  Json& report = result.report;
  Json timings = Json::object();
  Json files = Json::array();

  report["config"] = to_json(config);
  // Where the files land does not affect any result.
  report["config"].erase("output_dir");
  report["seeds"] = {{"top", config.seed},
                     {"simulation", config.simulation.seed},
                     {"model", config.model.seed},
                     {"revenue", config.revenue_seed()}};
  report["stages_run"] = Json::array();

  const fs::path choices = out_dir / "choices.csv";
  if (from <= Stage::simulate) {
    const auto t0 = std::chrono::steady_clock::now();
    cmd_simulate(config, out_dir);
    timings["simulate"] = seconds_since(t0);
    report["stages_run"].push_back("simulate");
  }
  files.push_back("choices.csv");
  if (config.ground_truth || fs::exists(out_dir / "provenance.json")) files.push_back("provenance.json");

  PosteriorDraws draws;
  bool rhat_ok = true;
  if (from <= Stage::fit) {
    const auto t0 = std::chrono::steady_clock::now();
    result.fit = cmd_fit(config, choices, out_dir, threads);
    timings["fit"] = seconds_since(t0);
    report["stages_run"].push_back("fit");
    draws = result.fit->draws;
    const auto& diag = result.fit->diagnostics;
    report["diagnostics"] = {{"max_population_r_hat", diag.max_population_rhat()},
                             {"min_population_ess", diag.min_population_ess()},
                             {"divergence_count", diag.divergence_count},
                             {"mean_accept_prob", diag.mean_accept_prob},
                             {"warnings", diag.warnings}};
    rhat_ok = diag.max_population_rhat() < kRhatGate;
  } else {
    draws = read_posterior_file(out_dir / "posterior.jsonl");
    const fs::path diag_path = out_dir / "diagnostics.json";
    if (fs::exists(diag_path)) {
      const Json diag = read_json_file(diag_path);
      report["diagnostics"] = {{"max_population_r_hat", diag.at("max_population_r_hat")},
                               {"min_population_ess", diag.at("min_population_ess")},
                               {"divergence_count", diag.at("divergence_count")},
                               {"mean_accept_prob", diag.at("mean_accept_prob")},
                               {"warnings", diag.at("warnings")}};
      rhat_ok = diag.at("max_population_r_hat").get<double>() < kRhatGate;
    }
  }
  files.push_back("posterior.jsonl");
  files.push_back("diagnostics.json");

  bool recovery_ok = true;
  if (from <= Stage::wtp) {
    const auto t0 = std::chrono::steady_clock::now();
    result.wtp = cmd_wtp(draws, config.ground_truth, out_dir);
    timings["wtp"] = seconds_since(t0);
    report["stages_run"].push_back("wtp");
    report["wtp_summary"] = wtp_json(*result.wtp);
    if (result.wtp->recovery) {
      report["recovery"] = recovery_json(*result.wtp->recovery);
      recovery_ok = result.wtp->recovery->overall_pass;
    }
    files.push_back("wtp_summary.csv");
    files.push_back("wtp_draws.csv");
    if (result.wtp->recovery) files.push_back("recovery.json");
  }

  if (config.scenario) {
    const auto t0 = std::chrono::steady_clock::now();
    result.revenue = revenue_curve(draws, *config.scenario, config.revenue_seed(), 0.95, threads);
    write_file_atomic(out_dir / "revenue_curve.csv",
                      [&](std::ostream& os) { write_revenue_summary_csv(os, *result.revenue); });
    write_file_atomic(out_dir / "revenue_draws.csv",
                      [&](std::ostream& os) { write_revenue_draws_csv(os, *result.revenue); });
    timings["revenue"] = seconds_since(t0);
    report["stages_run"].push_back("revenue");
    report["revenue"] = revenue_json(*result.revenue);
    files.push_back("revenue_curve.csv");
    files.push_back("revenue_draws.csv");
  }

  result.overall_pass = rhat_ok && recovery_ok;
  report["quality_gates"] = {{"population_r_hat_below_1.01", rhat_ok},
                             {"recovery_hdi_covers_truth", recovery_ok}};
  report["overall_pass"] = result.overall_pass;
  files.push_back("report.json");
  report["files"] = files;
  report["wall_clock_seconds"] = timings;
  write_json_file(out_dir / "report.json", report);
  return result;
}

}  // namespace conjoint
