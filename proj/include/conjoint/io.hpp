#ifndef CONJOINT_IO_HPP
#define CONJOINT_IO_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "conjoint/infer.hpp"
#include "conjoint/revenue.hpp"
#include "conjoint/simulate.hpp"

namespace conjoint {

using Json = nlohmann::json;

// choices.csv: respondent_id,task_id,a_<attr>...,a_price,b_<attr>...,b_price,chose_a
std::string choices_csv_header(const AttributeScheme& scheme);
void write_choices_csv(std::ostream& out, const ChoiceDataset& dataset);
/// Throws DataError naming the line and column of the first problem.
ChoiceDataset read_choices_csv(std::istream& in, const AttributeScheme& scheme);

// JSON encodings. Readers reject unknown keys; `where` prefixes messages.
Json to_json(const AttributeScheme& scheme);
AttributeScheme scheme_from_json(const Json& j, const std::string& where = "scheme");
Json to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const Json& j, const std::string& where = "ground_truth");
Json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const Json& j, ModelConfig defaults = {},
                                   const std::string& where = "model");
Json to_json(const BundleScenario& scenario);
BundleScenario scenario_from_json(const Json& j, const AttributeScheme& scheme,
                                  const std::string& where = "scenario");
Json to_json(const Diagnostics& diagnostics, std::size_t total_draws);

Json provenance_json(const ChoiceDataset& dataset, const SimulationConfig& simulation);
/// Accepts a provenance sidecar or any document with a "ground_truth" key,
/// or a bare ground-truth object.
GroundTruth read_truth_file(const std::filesystem::path& path);

/// Everything one end-to-end run needs. All randomness derives from `seed`.
struct RunConfig {
  AttributeScheme scheme;
  std::optional<GroundTruth> ground_truth;
  SimulationConfig simulation;
  ModelConfig model;
  std::optional<BundleScenario> scenario;
  std::string output_dir = "out";
  std::uint64_t seed = 20251018;

  /// Recomputes the stage seeds from `seed`.
  void derive_seeds();
  std::uint64_t revenue_seed() const;
};

/// The recovery-study configuration: iPhone scheme, truth, 300 x 20 survey,
/// 4 chains x (1000 warmup + 2000 draws), Pro+Titanium bundle scenario.
RunConfig default_run_config();
/// Missing sections take the defaults above. When "scheme" is given, the
/// truth and scenario are only present if given too.
RunConfig run_config_from_json(const Json& j);
Json to_json(const RunConfig& config);
RunConfig read_run_config(const std::filesystem::path& path);

// posterior.jsonl: a header object on the first line, then one object per
// draw {"chain", "draw", "divergent", "values": [mu..., sigma..., z...]}.
void write_posterior(std::ostream& out, const PosteriorDraws& draws, const ModelConfig& config);
PosteriorDraws read_posterior(std::istream& in);
PosteriorDraws read_posterior_file(const std::filesystem::path& path);

Json read_json_file(const std::filesystem::path& path);
/// Writes through a temporary file in the same directory, then renames.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);
void write_json_file(const std::filesystem::path& path, const Json& j);

}  // namespace conjoint

#endif  // CONJOINT_IO_HPP
