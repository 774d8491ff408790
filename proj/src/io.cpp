#include "conjoint/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "conjoint/format.hpp"
#include "conjoint/rng.hpp"

namespace conjoint {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(ch);
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_location(std::size_t line, const std::string& column) {
  return "choices.csv line " + std::to_string(line) + ", column '" + column + "'";
}

long long parse_integer(const std::string& text, std::size_t line, const std::string& column) {
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError(csv_location(line, column) + ": '" + text + "' is not an integer");
  }
  return v;
}

double parse_double(const std::string& text, std::size_t line, const std::string& column) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw DataError(csv_location(line, column) + ": '" + text + "' is not a number");
  }
  return v;
}

// ---- strict JSON helpers -------------------------------------------------

void require_object(const Json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  require_object(j, where);
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + "." + key + " is required");
  return j.at(key);
}

double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

std::int64_t get_integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  return j.get<std::int64_t>();
}

std::size_t get_count(const Json& j, const std::string& where) {
  const auto v = get_integer(j, where);
  if (v < 0) throw ConfigError(where + " must be non-negative");
  return static_cast<std::size_t>(v);
}

std::uint64_t get_seed(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const auto v = get_integer(j, where);
  if (v < 0) throw ConfigError(where + " must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

std::string get_string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + " must be a string");
  return j.get<std::string>();
}

bool get_bool(const Json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + " must be true or false");
  return j.get<bool>();
}

std::vector<double> get_number_array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(get_number(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::map<std::string, double> get_number_map(const Json& j, const std::string& where) {
  require_object(j, where);
  std::map<std::string, double> out;
  for (const auto& [key, value] : j.items()) out[key] = get_number(value, where + "." + key);
  return out;
}

NormalPrior prior_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"mean", "sd"}, where);
  return {get_number(field(j, "mean", where), where + ".mean"),
          get_number(field(j, "sd", where), where + ".sd")};
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& where) {
  const auto values = get_number_array(j, where);
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

// ---- choices.csv ---------------------------------------------------------

std::string choices_csv_header(const AttributeScheme& scheme) {
  std::string h = "respondent_id,task_id";
  for (const char* side : {"a_", "b_"}) {
    for (const auto& attr : scheme.attributes()) h += "," + std::string(side) + attr.name;
    h += "," + std::string(side) + scheme.price().name;
  }
  return h + ",chose_a";
}

void write_choices_csv(std::ostream& out, const ChoiceDataset& dataset) {
  const auto& scheme = dataset.scheme;
  out << choices_csv_header(scheme) << '\n';
  for (const auto& rec : dataset.records) {
    out << rec.task.respondent_id << ',' << rec.task.task_id;
    for (const ProductProfile* p : {&rec.task.profile_a, &rec.task.profile_b}) {
      for (const auto& attr : scheme.attributes()) out << ',' << p->level_by_attribute.at(attr.name);
      out << ',' << format_number(p->price);
    }
    out << ',' << (rec.chose_a ? 1 : 0) << '\n';
  }
}

ChoiceDataset read_choices_csv(std::istream& in, const AttributeScheme& scheme) {
  const std::string expected = choices_csv_header(scheme);
  const auto expected_cols = split_csv_line(expected);
  std::string line;
  if (!std::getline(in, line)) throw DataError("choices.csv is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  for (std::size_t c = 0; c < std::max(header.size(), expected_cols.size()); ++c) {
    const std::string got = c < header.size() ? header[c] : "<missing>";
    const std::string want = c < expected_cols.size() ? expected_cols[c] : "<none>";
    if (got != want) {
      throw DataError("choices.csv header mismatch at column " + std::to_string(c + 1) +
                      ": expected '" + want + "', got '" + got + "'");
    }
  }

  ChoiceDataset dataset;
  dataset.scheme = scheme;
  const std::size_t n_attr = scheme.attributes().size();
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != expected_cols.size()) {
      throw DataError("choices.csv line " + std::to_string(line_no) + ": expected " +
                      std::to_string(expected_cols.size()) + " fields, got " +
                      std::to_string(f.size()));
    }
    ChoiceRecord rec;
    rec.task.respondent_id = static_cast<int>(parse_integer(f[0], line_no, expected_cols[0]));
    rec.task.task_id = static_cast<int>(parse_integer(f[1], line_no, expected_cols[1]));
    std::size_t col = 2;
    for (ProductProfile* p : {&rec.task.profile_a, &rec.task.profile_b}) {
      for (const auto& attr : scheme.attributes()) {
        const std::string& level = f[col];
        if (std::find(attr.levels.begin(), attr.levels.end(), level) == attr.levels.end()) {
          throw DataError(csv_location(line_no, expected_cols[col]) + ": unknown level '" +
                          level + "'");
        }
        p->level_by_attribute[attr.name] = level;
        ++col;
      }
      p->price = parse_double(f[col], line_no, expected_cols[col]);
      if (!(p->price > 0.0 && std::isfinite(p->price))) {
        throw DataError(csv_location(line_no, expected_cols[col]) + ": price must be positive");
      }
      ++col;
    }
    (void)n_attr;
    if (f[col] != "0" && f[col] != "1") {
      throw DataError(csv_location(line_no, "chose_a") + ": expected 0 or 1, got '" + f[col] + "'");
    }
    rec.chose_a = f[col] == "1";
    dataset.records.push_back(std::move(rec));
  }
  dataset.validate();
  return dataset;
}

// ---- JSON encodings -----------------------------------------------------

Json to_json(const AttributeScheme& scheme) {
  Json attrs = Json::array();
  for (const auto& a : scheme.attributes()) {
    attrs.push_back({{"name", a.name}, {"levels", a.levels}, {"baseline", a.baseline_level}});
  }
  return {{"attributes", attrs},
          {"price", {{"name", scheme.price().name}, {"levels", scheme.price().levels}}}};
}

AttributeScheme scheme_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"attributes", "price"}, where);
  const Json& attrs = field(j, "attributes", where);
  if (!attrs.is_array()) throw ConfigError(where + ".attributes must be an array");
  std::vector<Attribute> attributes;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const std::string w = where + ".attributes[" + std::to_string(i) + "]";
    check_keys(attrs[i], {"name", "levels", "baseline"}, w);
    Attribute a;
    a.name = get_string(field(attrs[i], "name", w), w + ".name");
    const Json& levels = field(attrs[i], "levels", w);
    if (!levels.is_array()) throw ConfigError(w + ".levels must be an array of strings");
    for (std::size_t l = 0; l < levels.size(); ++l) {
      a.levels.push_back(get_string(levels[l], w + ".levels[" + std::to_string(l) + "]"));
    }
    a.baseline_level = get_string(field(attrs[i], "baseline", w), w + ".baseline");
    attributes.push_back(std::move(a));
  }
  const Json& price = field(j, "price", where);
  check_keys(price, {"name", "levels"}, where + ".price");
  PriceAttribute p;
  if (price.contains("name")) p.name = get_string(price.at("name"), where + ".price.name");
  p.levels = get_number_array(field(price, "levels", where + ".price"), where + ".price.levels");
  try {
    return AttributeScheme(std::move(attributes), std::move(p));
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

Json to_json(const GroundTruth& truth) {
  return {{"wtp", truth.true_wtp},
          {"wtp_sd", truth.wtp_sd},
          {"price_coef_mean", truth.price_coef_mean},
          {"price_coef_sd", truth.price_coef_sd}};
}

GroundTruth truth_from_json(const Json& j, const std::string& where) {
  check_keys(j, {"wtp", "wtp_sd", "price_coef_mean", "price_coef_sd"}, where);
  GroundTruth t;
  t.true_wtp = get_number_map(field(j, "wtp", where), where + ".wtp");
  if (j.contains("wtp_sd")) {
    t.wtp_sd = get_number_map(j.at("wtp_sd"), where + ".wtp_sd");
  } else {
    for (const auto& [k, v] : t.true_wtp) t.wtp_sd[k] = 0.25 * std::abs(v);
  }
  if (j.contains("price_coef_mean")) {
    t.price_coef_mean = get_number(j.at("price_coef_mean"), where + ".price_coef_mean");
  }
  if (j.contains("price_coef_sd")) {
    t.price_coef_sd = get_number(j.at("price_coef_sd"), where + ".price_coef_sd");
  }
  return t;
}

Json to_json(const ModelConfig& c) {
  return {{"prior_mu_price", {{"mean", c.prior_mu_price.mean}, {"sd", c.prior_mu_price.sd}}},
          {"prior_mu_feature", {{"mean", c.prior_mu_feature.mean}, {"sd", c.prior_mu_feature.sd}}},
          {"prior_sigma_sd", c.prior_sigma_sd},
          {"chains", c.chains},
          {"draws_per_chain", c.draws_per_chain},
          {"warmup_per_chain", c.warmup_per_chain},
          {"target_accept", c.target_accept},
          {"max_tree_depth", c.max_tree_depth},
          {"hierarchical", c.hierarchical}};
}

ModelConfig model_config_from_json(const Json& j, ModelConfig c, const std::string& where) {
  check_keys(j,
             {"prior_mu_price", "prior_mu_feature", "prior_sigma_sd", "chains", "draws_per_chain",
              "warmup_per_chain", "target_accept", "max_tree_depth", "hierarchical"},
             where);
  if (j.contains("prior_mu_price")) {
    c.prior_mu_price = prior_from_json(j.at("prior_mu_price"), where + ".prior_mu_price");
  }
  if (j.contains("prior_mu_feature")) {
    c.prior_mu_feature = prior_from_json(j.at("prior_mu_feature"), where + ".prior_mu_feature");
  }
  if (j.contains("prior_sigma_sd")) {
    c.prior_sigma_sd = get_number(j.at("prior_sigma_sd"), where + ".prior_sigma_sd");
  }
  auto int_field = [&](const char* key, int& target) {
    if (j.contains(key)) target = static_cast<int>(get_integer(j.at(key), where + "." + key));
  };
  int_field("chains", c.chains);
  int_field("draws_per_chain", c.draws_per_chain);
  int_field("warmup_per_chain", c.warmup_per_chain);
  int_field("max_tree_depth", c.max_tree_depth);
  if (j.contains("target_accept")) {
    c.target_accept = get_number(j.at("target_accept"), where + ".target_accept");
  }
  if (j.contains("hierarchical")) c.hierarchical = get_bool(j.at("hierarchical"), where + ".hierarchical");
  return c;
}

Json to_json(const BundleScenario& s) {
  Json upgrades = Json::array();
  for (const auto& u : s.upgrades) upgrades.push_back({{"attribute", u.attribute}, {"level", u.level}});
  return {{"baseline", {{"levels", s.baseline.level_by_attribute}, {"price", s.baseline.price}}},
          {"upgrades", upgrades},
          {"price_grid", s.price_grid},
          {"market_size", s.market_size}};
}

BundleScenario scenario_from_json(const Json& j, const AttributeScheme& scheme,
                                  const std::string& where) {
  check_keys(j, {"baseline", "upgrades", "price_grid", "market_size"}, where);
  BundleScenario s;
  const Json& base = field(j, "baseline", where);
  check_keys(base, {"levels", "price"}, where + ".baseline");
  s.baseline = baseline_profile(scheme, get_number(field(base, "price", where + ".baseline"),
                                                   where + ".baseline.price"));
  if (base.contains("levels")) {
    const Json& levels = base.at("levels");
    require_object(levels, where + ".baseline.levels");
    for (const auto& [attr, level] : levels.items()) {
      s.baseline.level_by_attribute[attr] = get_string(level, where + ".baseline.levels." + attr);
    }
  }
  const Json& ups = field(j, "upgrades", where);
  if (!ups.is_array()) throw ConfigError(where + ".upgrades must be an array");
  for (std::size_t i = 0; i < ups.size(); ++i) {
    const std::string w = where + ".upgrades[" + std::to_string(i) + "]";
    check_keys(ups[i], {"attribute", "level"}, w);
    s.upgrades.push_back({get_string(field(ups[i], "attribute", w), w + ".attribute"),
                          get_string(field(ups[i], "level", w), w + ".level")});
  }
  s.price_grid = get_number_array(field(j, "price_grid", where), where + ".price_grid");
  if (j.contains("market_size")) s.market_size = get_count(j.at("market_size"), where + ".market_size");
  s.validate(scheme);
  return s;
}

Json to_json(const Diagnostics& d, std::size_t total_draws) {
  Json params = Json::array();
  for (std::size_t i = 0; i < d.parameter_names.size(); ++i) {
    params.push_back({{"name", d.parameter_names[i]},
                      {"r_hat", d.r_hat[i]},
                      {"ess", d.ess[i]},
                      {"population", i < d.population_parameters}});
  }
  return {{"max_population_r_hat", d.max_population_rhat()},
          {"min_population_ess", d.min_population_ess()},
          {"divergence_count", d.divergence_count},
          {"divergence_rate", d.divergence_rate(total_draws)},
          {"warmup_divergences", d.warmup_divergences},
          {"mean_accept_prob", d.mean_accept_prob},
          {"step_size", d.step_size},
          {"mean_tree_depth", d.mean_tree_depth},
          {"warnings", d.warnings},
          {"parameters", params}};
}

Json provenance_json(const ChoiceDataset& dataset, const SimulationConfig& simulation) {
  Json j = {{"scheme", to_json(dataset.scheme)},
            {"records", dataset.records.size()},
            {"simulation",
             {{"n_respondents", simulation.n_respondents},
              {"tasks_per_respondent", simulation.tasks_per_respondent},
              {"price_grid", simulation.price_grid.empty() ? dataset.scheme.price().levels
                                                           : simulation.price_grid}}}};
  if (dataset.provenance) {
    j["ground_truth"] = to_json(dataset.provenance->truth);
    j["seed"] = dataset.provenance->seed;
  }
  return j;
}

GroundTruth read_truth_file(const fs::path& path) {
  const Json j = read_json_file(path);
  if (j.is_object() && j.contains("ground_truth")) return truth_from_json(j.at("ground_truth"));
  return truth_from_json(j);
}

// ---- run configuration --------------------------------------------------

void RunConfig::derive_seeds() {
  simulation.seed = derive_seed(seed, Stream::simulation);
  model.seed = derive_seed(seed, Stream::model);
}

std::uint64_t RunConfig::revenue_seed() const { return derive_seed(seed, Stream::revenue); }

RunConfig default_run_config() {
  RunConfig c;
  c.scheme = paper_scheme();
  c.ground_truth = paper_ground_truth();
  c.simulation.n_respondents = 300;
  c.simulation.tasks_per_respondent = 20;
  c.simulation.price_grid = c.scheme.price().levels;
  c.scenario = paper_scenario(c.scheme);
  c.derive_seeds();
  return c;
}

RunConfig run_config_from_json(const Json& j) {
  check_keys(j, {"seed", "scheme", "ground_truth", "simulation", "model", "scenario", "output_dir"},
             "config");
  RunConfig c = default_run_config();
  if (j.contains("scheme")) {
    c.scheme = scheme_from_json(j.at("scheme"));
    c.ground_truth.reset();
    c.scenario.reset();
    c.simulation.price_grid = c.scheme.price().levels;
  }
  if (j.contains("seed")) c.seed = get_seed(j.at("seed"), "seed");
  if (j.contains("ground_truth")) c.ground_truth = truth_from_json(j.at("ground_truth"));
  if (c.ground_truth) c.ground_truth->validate(c.scheme);
  if (j.contains("simulation")) {
    const Json& s = j.at("simulation");
    check_keys(s, {"n_respondents", "tasks_per_respondent", "price_grid"}, "simulation");
    if (s.contains("n_respondents")) {
      c.simulation.n_respondents = get_count(s.at("n_respondents"), "simulation.n_respondents");
    }
    if (s.contains("tasks_per_respondent")) {
      c.simulation.tasks_per_respondent =
          get_count(s.at("tasks_per_respondent"), "simulation.tasks_per_respondent");
    }
    if (s.contains("price_grid")) {
      c.simulation.price_grid = get_number_array(s.at("price_grid"), "simulation.price_grid");
      if (c.simulation.price_grid.empty()) {
        throw ConfigError("simulation.price_grid must not be empty");
      }
    }
  }
  if (c.simulation.n_respondents == 0) {
    throw ConfigError("simulation.n_respondents must be at least 1");
  }
  if (c.simulation.tasks_per_respondent == 0) {
    throw ConfigError("simulation.tasks_per_respondent must be at least 1");
  }
  if (j.contains("model")) c.model = model_config_from_json(j.at("model"), c.model);
  if (j.contains("scenario")) c.scenario = scenario_from_json(j.at("scenario"), c.scheme);
  if (j.contains("output_dir")) c.output_dir = get_string(j.at("output_dir"), "output_dir");
  c.model.validate();
  c.derive_seeds();
  return c;
}

Json to_json(const RunConfig& c) {
  Json j = {{"seed", c.seed},
            {"scheme", to_json(c.scheme)},
            {"simulation",
             {{"n_respondents", c.simulation.n_respondents},
              {"tasks_per_respondent", c.simulation.tasks_per_respondent},
              {"price_grid", c.simulation.price_grid}}},
            {"model", to_json(c.model)},
            {"output_dir", c.output_dir}};
  if (c.ground_truth) j["ground_truth"] = to_json(*c.ground_truth);
  if (c.scenario) j["scenario"] = to_json(*c.scenario);
  return j;
}

RunConfig read_run_config(const fs::path& path) { return run_config_from_json(read_json_file(path)); }

// ---- posterior.jsonl ----------------------------------------------------

void write_posterior(std::ostream& out, const PosteriorDraws& draws, const ModelConfig& config) {
  const Eigen::Index k = draws.columns();
  std::vector<std::string> names;
  for (const auto& c : draws.column_names) names.push_back("mu[" + c + "]");
  if (draws.hierarchical) {
    for (const auto& c : draws.column_names) names.push_back("sigma[" + c + "]");
    for (int id : draws.respondent_ids) {
      for (const auto& c : draws.column_names) names.push_back("z[" + std::to_string(id) + "," + c + "]");
    }
  }
  Json header = {{"format", "conjoint-wtp-posterior"},
                 {"version", 1},
                 {"scheme", to_json(draws.scheme)},
                 {"columns", draws.column_names},
                 {"price_column", draws.price_column},
                 {"respondent_ids", draws.respondent_ids},
                 {"hierarchical", draws.hierarchical},
                 {"parameters", names},
                 {"model", to_json(config)},
                 {"seed", config.seed},
                 {"draws", draws.draws()}};
  if (draws.standardization) {
    header["standardization"] = {{"mean", vector_json(draws.standardization->mean)},
                                 {"scale", vector_json(draws.standardization->scale)}};
  }
  out << header.dump() << '\n';

  std::string line;
  for (Eigen::Index d = 0; d < draws.draws(); ++d) {
    line.clear();
    line += "{\"chain\":" + std::to_string(draws.chain[static_cast<std::size_t>(d)]) +
            ",\"draw\":" + std::to_string(draws.draw_index[static_cast<std::size_t>(d)]) +
            ",\"divergent\":" + (draws.divergent[static_cast<std::size_t>(d)] ? "true" : "false") +
            ",\"values\":[";
    bool first = true;
    auto append = [&](double v) {
      if (!first) line += ',';
      first = false;
      line += format_number(v);
    };
    for (Eigen::Index j = 0; j < k; ++j) append(draws.mu(d, j));
    if (draws.hierarchical) {
      for (Eigen::Index j = 0; j < k; ++j) append(draws.sigma(d, j));
      for (Eigen::Index j = 0; j < draws.z.cols(); ++j) append(draws.z(d, j));
    }
    line += "]}\n";
    out << line;
  }
}

PosteriorDraws read_posterior(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("posterior file is empty");
  Json header;
  try {
    header = Json::parse(line);
  } catch (const Json::exception& e) {
    throw DataError(std::string("posterior header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || header.value("format", "") != "conjoint-wtp-posterior") {
    throw DataError("posterior header lacks format 'conjoint-wtp-posterior'");
  }
  PosteriorDraws draws;
  try {
    draws.scheme = scheme_from_json(header.at("scheme"), "posterior.scheme");
    draws.column_names = header.at("columns").get<std::vector<std::string>>();
    draws.price_column = header.at("price_column").get<Eigen::Index>();
    draws.respondent_ids = header.at("respondent_ids").get<std::vector<int>>();
    draws.hierarchical = header.at("hierarchical").get<bool>();
    if (header.contains("standardization")) {
      Standardization s;
      s.mean = vector_from_json(header["standardization"].at("mean"), "standardization.mean");
      s.scale = vector_from_json(header["standardization"].at("scale"), "standardization.scale");
      draws.standardization = s;
    }
  } catch (const Json::exception& e) {
    throw DataError(std::string("posterior header: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("posterior header: ") + e.what());
  }

  const auto k = static_cast<Eigen::Index>(draws.column_names.size());
  const Eigen::Index r = draws.respondents();
  const Eigen::Index width = draws.hierarchical ? 2 * k + r * k : k;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
      draws.chain.push_back(j.at("chain").get<int>());
      draws.draw_index.push_back(j.at("draw").get<int>());
      draws.divergent.push_back(j.at("divergent").get<bool>() ? 1 : 0);
      rows.push_back(j.at("values").get<std::vector<double>>());
    } catch (const Json::exception& e) {
      throw DataError("posterior line " + std::to_string(line_no) + ": " + e.what());
    }
    if (static_cast<Eigen::Index>(rows.back().size()) != width) {
      throw DataError("posterior line " + std::to_string(line_no) + ": expected " +
                      std::to_string(width) + " values, got " + std::to_string(rows.back().size()));
    }
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  draws.mu.resize(n, k);
  if (draws.hierarchical) {
    draws.sigma.resize(n, k);
    draws.z.resize(n, r * k);
  }
  for (Eigen::Index d = 0; d < n; ++d) {
    const Eigen::Map<const Eigen::RowVectorXd> v(rows[static_cast<std::size_t>(d)].data(), width);
    draws.mu.row(d) = v.head(k);
    if (draws.hierarchical) {
      draws.sigma.row(d) = v.segment(k, k);
      draws.z.row(d) = v.tail(r * k);
    }
  }
  return draws;
}

PosteriorDraws read_posterior_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open posterior file '" + path.string() + "'");
  return read_posterior(in);
}

// ---- files --------------------------------------------------------------

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_file_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "'");
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    writer(out);
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
}

void write_json_file(const fs::path& path, const Json& j) {
  write_file_atomic(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

}  // namespace conjoint
