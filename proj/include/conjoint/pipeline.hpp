#ifndef CONJOINT_PIPELINE_HPP
#define CONJOINT_PIPELINE_HPP

#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "conjoint/io.hpp"
#include "conjoint/posterior.hpp"
#include "conjoint/revenue.hpp"

namespace conjoint {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitQualityGate = 1,
  kExitValidation = 2,
  kExitSampler = 3,
  kExitSignSafety = 4,
  kExitIo = 5,
};

int exit_code_for(const std::exception& e);

struct SimulateResult {
  SimulationResult simulation;
  std::filesystem::path choices_path;
  std::filesystem::path provenance_path;
};

/// Writes choices.csv and provenance.json into `out_dir`.
SimulateResult cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir);

/// Fits the dataset at `dataset_path`; writes posterior.jsonl and
/// diagnostics.json.
SampleResult cmd_fit(const RunConfig& config, const std::filesystem::path& dataset_path,
                     const std::filesystem::path& out_dir, std::size_t threads);

struct WtpResult {
  std::vector<WtpDraws> draws;
  std::vector<WtpSummary> summaries;
  std::optional<RecoveryReport> recovery;
};

WtpResult compute_wtp(const PosteriorDraws& draws, const GroundTruth* truth, double mass = 0.95);
/// Writes wtp_summary.csv, wtp_draws.csv and (with a truth) recovery.json.
WtpResult cmd_wtp(const PosteriorDraws& draws, const std::optional<GroundTruth>& truth,
                  const std::filesystem::path& out_dir);
WtpResult cmd_wtp(const std::filesystem::path& posterior_path,
                  const std::optional<std::filesystem::path>& truth_path,
                  const std::filesystem::path& out_dir);

/// Writes revenue_curve.csv and revenue_draws.csv, and merges the argmax
/// fields into report.json.
RevenueCurve cmd_revenue(const PosteriorDraws& draws, const BundleScenario& scenario,
                         std::uint64_t seed, const std::filesystem::path& out_dir,
                         std::size_t threads);

enum class Stage { simulate = 0, fit = 1, wtp = 2, revenue = 3 };
Stage parse_stage(const std::string& name);

struct PipelineResult {
  Json report;
  bool overall_pass = false;
  std::optional<SampleResult> fit;  // present when the fit stage ran
  std::optional<WtpResult> wtp;
  std::optional<RevenueCurve> revenue;
};

inline constexpr double kRhatGate = 1.01;

/// simulate -> fit -> wtp -> revenue, starting at `from` and loading the
/// outputs of skipped stages from `out_dir`. Writes report.json.
PipelineResult cmd_pipeline(const RunConfig& config, const std::filesystem::path& out_dir,
                            Stage from = Stage::simulate, std::size_t threads = 1);

Json wtp_json(const WtpResult& wtp);
Json revenue_json(const RevenueCurve& curve);

}  // namespace conjoint

#endif  // CONJOINT_PIPELINE_HPP
