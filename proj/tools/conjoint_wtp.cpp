// conjoint_wtp: simulate a choice-based conjoint survey, fit the
// hierarchical logit, and report willingness-to-pay and revenue curves.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "conjoint/pipeline.hpp"

namespace fs = std::filesystem;
using namespace conjoint;

namespace {

struct Options {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::optional<int> draws;
  std::optional<int> warmup;
  std::string from = "simulate";
  std::string data_path;
  std::string posterior_path;
  std::string truth_path;
};

RunConfig load_config(const Options& opt) {
  RunConfig config = opt.config_path.empty() ? default_run_config()
                                             : read_run_config(opt.config_path);
  if (opt.seed) config.seed = *opt.seed;
  if (opt.chains) config.model.chains = *opt.chains;
  if (opt.draws) config.model.draws_per_chain = *opt.draws;
  if (opt.warmup) config.model.warmup_per_chain = *opt.warmup;
  if (!opt.out_dir.empty()) config.output_dir = opt.out_dir;
  config.model.validate();
  config.derive_seeds();
  return config;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config_path, "Run configuration (JSON)");
  cmd->add_option("--out", opt.out_dir, "Output directory");
  cmd->add_option("--seed", opt.seed, "Top-level seed (overrides config)");
}

void add_model_overrides(CLI::App* cmd, Options& opt) {
  cmd->add_option("--chains", opt.chains, "Number of chains");
  cmd->add_option("--draws", opt.draws, "Post-warmup draws per chain");
  cmd->add_option("--warmup", opt.warmup, "Warmup iterations per chain");
}

int run(CLI::App& app, const Options& opt) {
  const std::size_t threads = thread_limit_from_env();
  const RunConfig config = load_config(opt);
  const fs::path out = config.output_dir;

  if (app.got_subcommand("simulate")) {
    const auto res = cmd_simulate(config, out);
    std::cout << "wrote " << res.simulation.dataset.records.size() << " choice records to "
              << res.choices_path.string() << '\n';
    return kExitOk;
  }
  if (app.got_subcommand("fit")) {
    const fs::path data = opt.data_path.empty() ? out / "choices.csv" : fs::path(opt.data_path);
    const auto res = cmd_fit(config, data, out, threads);
    const auto& d = res.diagnostics;
    std::cout << "draws: " << res.draws.draws() << ", divergences: " << d.divergence_count
              << ", max population r_hat: " << d.max_population_rhat() << '\n';
    for (const auto& w : d.warnings) std::cerr << "warning: " << w << '\n';
    return kExitOk;
  }
  if (app.got_subcommand("wtp")) {
    const fs::path posterior =
        opt.posterior_path.empty() ? out / "posterior.jsonl" : fs::path(opt.posterior_path);
    std::optional<fs::path> truth;
    if (!opt.truth_path.empty()) truth = opt.truth_path;
    const auto res = cmd_wtp(posterior, truth, out);
    for (const auto& s : res.summaries) {
      std::cout << s.feature << ": mean $" << s.mean << ", 95% HDI [$" << s.hdi_low << ", $"
                << s.hdi_high << "]\n";
    }
    if (res.recovery) {
      std::cout << "recovery: " << (res.recovery->overall_pass ? "all covered" : "NOT all covered")
                << '\n';
    } else {
      std::cout << "no truth given; recovery report skipped\n";
    }
    return kExitOk;
  }
  if (app.got_subcommand("revenue")) {
    const fs::path posterior =
        opt.posterior_path.empty() ? out / "posterior.jsonl" : fs::path(opt.posterior_path);
    const PosteriorDraws draws = read_posterior_file(posterior);
    BundleScenario scenario = config.scenario ? *config.scenario : paper_scenario(draws.scheme);
    const auto curve = cmd_revenue(draws, scenario, config.revenue_seed(), out, threads);
    std::cout << "revenue-maximizing price: $" << curve.argmax_price << " (95% HDI of per-draw "
              << "optimum [$" << curve.argmax_hdi.low << ", $" << curve.argmax_hdi.high << "])\n";
    for (const auto& w : curve.warnings) std::cerr << "warning: " << w << '\n';
    return kExitOk;
  }
  if (app.got_subcommand("pipeline")) {
    const auto res = cmd_pipeline(config, out, parse_stage(opt.from), threads);
    if (res.wtp) {
      for (const auto& s : res.wtp->summaries) {
        std::cout << s.feature << ": mean $" << s.mean << ", 95% HDI [$" << s.hdi_low << ", $"
                  << s.hdi_high << "]\n";
      }
    }
    if (res.revenue) std::cout << "revenue-maximizing price: $" << res.revenue->argmax_price << '\n';
    std::cout << "overall_pass: " << (res.overall_pass ? "true" : "false") << '\n';
    return res.overall_pass ? kExitOk : kExitQualityGate;
  }
  return kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Choice-based conjoint WTP estimation with a hierarchical Bayesian logit"};
  app.require_subcommand(1);
  Options opt;

  auto* simulate = app.add_subcommand("simulate", "Simulate a survey: choices.csv + provenance.json");
  add_common(simulate, opt);

  auto* fit = app.add_subcommand("fit", "Fit the model: posterior.jsonl + diagnostics.json");
  add_common(fit, opt);
  add_model_overrides(fit, opt);
  fit->add_option("--data", opt.data_path, "choices.csv to fit (default <out>/choices.csv)");

  auto* wtp = app.add_subcommand("wtp", "WTP summaries: wtp_summary.csv, wtp_draws.csv, recovery.json");
  add_common(wtp, opt);
  wtp->add_option("--posterior", opt.posterior_path, "posterior.jsonl (default <out>/posterior.jsonl)");
  wtp->add_option("--truth", opt.truth_path, "provenance.json or ground-truth JSON");

  auto* revenue = app.add_subcommand("revenue", "Revenue curve for the bundle scenario");
  add_common(revenue, opt);
  revenue->add_option("--posterior", opt.posterior_path, "posterior.jsonl (default <out>/posterior.jsonl)");

  auto* pipeline = app.add_subcommand("pipeline", "simulate -> fit -> wtp -> revenue");
  add_common(pipeline, opt);
  add_model_overrides(pipeline, opt);
  pipeline->add_option("--from", opt.from, "First stage to run (simulate|fit|wtp|revenue)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    return run(app, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}
