#include "conjoint/domain.hpp"

#include <algorithm>
#include <set>

namespace conjoint {
namespace {

void check_name(const std::string& what, const std::string& name) {
  if (name.empty()) {
    throw ConfigError(what + " name must not be empty");
  }
  if (name.find_first_of(",\"\r\n") != std::string::npos) {
    throw ConfigError(what + " '" + name + "' contains a CSV-reserved character");
  }
}

}  // namespace

std::size_t Attribute::baseline_index() const {
  const auto it = std::find(levels.begin(), levels.end(), baseline_level);
  return static_cast<std::size_t>(it - levels.begin());
}

std::string column_name(const std::string& attribute, const std::string& level) {
  return attribute + ":" + level;
}

AttributeScheme::AttributeScheme(std::vector<Attribute> attributes, PriceAttribute price)
    : attributes_(std::move(attributes)), price_(std::move(price)) {
  check_name("price attribute", price_.name);
  std::set<std::string> seen{price_.name};
  for (const auto& attr : attributes_) {
    check_name("attribute", attr.name);
    if (!seen.insert(attr.name).second) {
      throw ConfigError("duplicate attribute '" + attr.name + "'");
    }
    std::set<std::string> levels;
    for (const auto& level : attr.levels) {
      check_name("level of attribute '" + attr.name + "'", level);
      if (!levels.insert(level).second) {
        throw ConfigError("attribute '" + attr.name + "' repeats level '" + level + "'");
      }
    }
    if (levels.size() < 2) {
      throw ConfigError("attribute '" + attr.name + "' needs at least 2 distinct levels");
    }
    if (!levels.count(attr.baseline_level)) {
      throw ConfigError("baseline level '" + attr.baseline_level +
                        "' is not a level of attribute '" + attr.name + "'");
    }
  }
  std::set<double> prices;
  for (double p : price_.levels) {
    if (!(std::isfinite(p) && p > 0.0)) {
      throw ConfigError("price levels must be positive dollar amounts");
    }
    prices.insert(p);
  }
  if (prices.size() < 2) {
    throw ConfigError("price attribute needs at least 2 distinct levels");
  }

  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    const auto& attr = attributes_[a];
    for (std::size_t l = 0; l < attr.levels.size(); ++l) {
      if (attr.levels[l] == attr.baseline_level) continue;
      columns_.push_back({a, l, column_name(attr.name, attr.levels[l])});
    }
  }
}

std::vector<std::string> AttributeScheme::column_names() const {
  std::vector<std::string> names;
  names.reserve(column_count());
  for (const auto& c : columns_) names.push_back(c.name);
  names.push_back(price_.name);
  return names;
}

std::size_t AttributeScheme::column_index(const std::string& name) const {
  if (name == price_.name) return price_column();
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    if (columns_[j].name == name) return j;
  }
  throw CodingError("unknown feature column '" + name + "'");
}

std::size_t AttributeScheme::column_for(const std::string& attribute,
                                        const std::string& level) const {
  const auto& attr = this->attribute(attribute);
  if (std::find(attr.levels.begin(), attr.levels.end(), level) == attr.levels.end()) {
    throw CodingError("unknown level '" + level + "' for attribute '" + attribute + "'");
  }
  if (level == attr.baseline_level) {
    throw CodingError("level '" + level + "' is the baseline of '" + attribute +
                      "' and has no column");
  }
  return column_index(column_name(attribute, level));
}

std::size_t AttributeScheme::attribute_index(const std::string& name) const {
  for (std::size_t a = 0; a < attributes_.size(); ++a) {
    if (attributes_[a].name == name) return a;
  }
  throw CodingError("unknown attribute '" + name + "'");
}

const Attribute& AttributeScheme::attribute(const std::string& name) const {
  return attributes_[attribute_index(name)];
}

double AttributeScheme::profile_count(std::size_t n_prices) const {
  double count = static_cast<double>(n_prices);
  for (const auto& attr : attributes_) count *= static_cast<double>(attr.levels.size());
  return count;
}

void validate_profile(const AttributeScheme& scheme, const ProductProfile& profile) {
  for (const auto& [name, level] : profile.level_by_attribute) {
    const auto& attr = scheme.attribute(name);
    if (std::find(attr.levels.begin(), attr.levels.end(), level) == attr.levels.end()) {
      throw CodingError("unknown level '" + level + "' for attribute '" + name + "'");
    }
  }
  for (const auto& attr : scheme.attributes()) {
    if (!profile.level_by_attribute.count(attr.name)) {
      throw CodingError("profile is missing attribute '" + attr.name + "'");
    }
  }
  if (!(std::isfinite(profile.price) && profile.price > 0.0)) {
    throw CodingError("profile price must be a positive dollar amount");
  }
}

FeatureVector encode_profile(const AttributeScheme& scheme, const ProductProfile& profile) {
  validate_profile(scheme, profile);
  FeatureVector x = FeatureVector::Zero(static_cast<Eigen::Index>(scheme.column_count()));
  const auto& attrs = scheme.attributes();
  const auto& cols = scheme.feature_columns();
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const auto& attr = attrs[cols[j].attribute];
    if (profile.level_by_attribute.at(attr.name) == attr.levels[cols[j].level]) {
      x[static_cast<Eigen::Index>(j)] = 1.0;
    }
  }
  x[static_cast<Eigen::Index>(scheme.price_column())] = profile.price;
  return x;
}

ProductProfile decode_profile(const AttributeScheme& scheme, const FeatureVector& x) {
  if (x.size() != static_cast<Eigen::Index>(scheme.column_count())) {
    throw ContractError("decode_profile: feature vector length does not match scheme");
  }
  ProductProfile profile;
  for (const auto& attr : scheme.attributes()) {
    profile.level_by_attribute[attr.name] = attr.baseline_level;
  }
  const auto& attrs = scheme.attributes();
  const auto& cols = scheme.feature_columns();
  std::vector<int> set_count(attrs.size(), 0);
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const double v = x[static_cast<Eigen::Index>(j)];
    if (v != 0.0 && v != 1.0) {
      throw CodingError("dummy column '" + cols[j].name + "' is not 0 or 1");
    }
    if (v == 1.0) {
      const auto& attr = attrs[cols[j].attribute];
      if (++set_count[cols[j].attribute] > 1) {
        throw CodingError("attribute '" + attr.name + "' has more than one level set");
      }
      profile.level_by_attribute[attr.name] = attr.levels[cols[j].level];
    }
  }
  profile.price = x[static_cast<Eigen::Index>(scheme.price_column())];
  return profile;
}

ProductProfile baseline_profile(const AttributeScheme& scheme, double price) {
  ProductProfile profile;
  for (const auto& attr : scheme.attributes()) {
    profile.level_by_attribute[attr.name] = attr.baseline_level;
  }
  profile.price = price;
  return profile;
}

AttributeScheme paper_scheme() {
  return AttributeScheme(
      {
          {"storage", {"128GB", "256GB", "512GB"}, "128GB"},
          {"camera", {"Standard", "Pro"}, "Standard"},
          {"frame", {"Aluminum", "Titanium"}, "Aluminum"},
      },
      {"price", {799.0, 899.0, 999.0, 1099.0, 1199.0}});
}

}  // namespace conjoint
