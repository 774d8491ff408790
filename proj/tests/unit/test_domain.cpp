#include <doctest.h>

#include <random>

#include "conjoint/domain.hpp"

using namespace conjoint;

namespace {

ProductProfile make_profile(const std::string& storage, const std::string& camera,
                            const std::string& frame, double price) {
  return {{{"storage", storage}, {"camera", camera}, {"frame", frame}}, price};
}

}  // namespace

TEST_CASE("scheme column layout follows attribute then level order") {
  const AttributeScheme scheme = paper_scheme();
  const std::vector<std::string> expected{"storage:256GB", "storage:512GB", "camera:Pro",
                                          "frame:Titanium", "price"};
  CHECK(scheme.column_names() == expected);
  CHECK(scheme.column_count() == 5);
  CHECK(scheme.price_column() == 4);
  CHECK(scheme.column_for("camera", "Pro") == 2);
  CHECK_THROWS_AS(scheme.column_for("camera", "Standard"), CodingError);
}

TEST_CASE("scheme rejects malformed catalogs") {
  const PriceAttribute price{"price", {799, 999}};
  CHECK_THROWS_AS(AttributeScheme({{"a", {"x"}, "x"}}, price), ConfigError);
  CHECK_THROWS_AS(AttributeScheme({{"a", {"x", "y"}, "z"}}, price), ConfigError);
  CHECK_THROWS_AS(AttributeScheme({{"a", {"x", "x"}, "x"}}, price), ConfigError);
  CHECK_THROWS_AS(AttributeScheme({{"a", {"x", "y"}, "x"}, {"a", {"x", "y"}, "x"}}, price),
                  ConfigError);
  CHECK_THROWS_AS(AttributeScheme({{"a", {"x", "y"}, "x"}}, {"price", {799, -1}}), ConfigError);
  CHECK_THROWS_AS(AttributeScheme({{"a", {"x,1", "y"}, "x,1"}}, price), ConfigError);
}

TEST_CASE("encode_profile dummy-codes levels and copies price") {
  const AttributeScheme scheme = paper_scheme();

  const FeatureVector base = encode_profile(scheme, make_profile("128GB", "Standard", "Aluminum", 799));
  CHECK(base.head(4).isZero());
  CHECK(base[4] == 799.0);

  const FeatureVector x = encode_profile(scheme, make_profile("512GB", "Pro", "Aluminum", 1099));
  CHECK(x[0] == 0.0);
  CHECK(x[1] == 1.0);
  CHECK(x[2] == 1.0);
  CHECK(x[3] == 0.0);
  CHECK(x[4] == 1099.0);

  const FeatureVector al = encode_profile(scheme, make_profile("256GB", "Pro", "Aluminum", 899));
  const FeatureVector ti = encode_profile(scheme, make_profile("256GB", "Pro", "Titanium", 899));
  Eigen::VectorXd diff = ti - al;
  CHECK(diff[3] == 1.0);
  diff[3] = 0.0;
  CHECK(diff.isZero());
}

TEST_CASE("encode_profile names the offending attribute or level") {
  const AttributeScheme scheme = paper_scheme();
  auto bad_level = make_profile("1TB", "Pro", "Aluminum", 999);
  try {
    encode_profile(scheme, bad_level);
    FAIL("expected CodingError");
  } catch (const CodingError& e) {
    CHECK(std::string(e.what()).find("1TB") != std::string::npos);
  }
  auto extra = make_profile("128GB", "Pro", "Aluminum", 999);
  extra.level_by_attribute["color"] = "Blue";
  try {
    encode_profile(scheme, extra);
    FAIL("expected CodingError");
  } catch (const CodingError& e) {
    CHECK(std::string(e.what()).find("color") != std::string::npos);
  }
  auto missing = make_profile("128GB", "Pro", "Aluminum", 999);
  missing.level_by_attribute.erase("frame");
  CHECK_THROWS_AS(encode_profile(scheme, missing), CodingError);
  CHECK_THROWS_AS(encode_profile(scheme, make_profile("128GB", "Pro", "Aluminum", 0.0)), CodingError);
}

TEST_CASE("decode inverts encode for every profile of the scheme") {
  const AttributeScheme scheme = paper_scheme();
  for (const auto& s : scheme.attribute("storage").levels) {
    for (const auto& c : scheme.attribute("camera").levels) {
      for (const auto& f : scheme.attribute("frame").levels) {
        for (double p : {799.0, 1012.5, 1199.0}) {
          const auto profile = make_profile(s, c, f, p);
          CHECK(decode_profile(scheme, encode_profile(scheme, profile)) == profile);
        }
      }
    }
  }
}

TEST_CASE("utility is the inner product") {
  const AttributeScheme scheme = paper_scheme();
  Coefficients beta = Coefficients::Zero(5);
  CHECK(utility(FeatureVector::Zero(5), Coefficients::Random(5)) == 0.0);

  beta[4] = -0.01;
  FeatureVector price_only = FeatureVector::Zero(5);
  price_only[4] = 999;
  CHECK(utility(price_only, beta) == doctest::Approx(-9.99).epsilon(1e-14));

  beta[0] = 1.0;
  const FeatureVector x = encode_profile(scheme, make_profile("256GB", "Standard", "Aluminum", 899));
  CHECK(utility(x, beta) == doctest::Approx(-7.99).epsilon(1e-14));

  CHECK_THROWS_AS(utility(FeatureVector::Zero(4), beta), ContractError);
}

TEST_CASE("utility is linear in the coefficients") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd x(6), b1(6), b2(6);
    for (int i = 0; i < 6; ++i) {
      x[i] = normal(rng);
      b1[i] = normal(rng);
      b2[i] = normal(rng);
    }
    const double a = normal(rng), b = normal(rng);
    const double lhs = utility(x, (a * b1 + b * b2).eval());
    const double rhs = a * utility(x, b1) + b * utility(x, b2);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("choice_probability is a stable sigmoid of the utility difference") {
  CHECK(choice_probability(3.2, 3.2) == 0.5);
  const double hi = choice_probability(1e3, 0.0);
  CHECK(hi > 1.0 - 1e-12);
  CHECK(hi <= 1.0);
  const double lo = choice_probability(0.0, 1e3);
  CHECK(lo >= 0.0);
  CHECK(lo < 1e-12);
  CHECK(std::isfinite(choice_probability(-700.0, 700.0)));
  CHECK_THROWS_AS(choice_probability(std::numeric_limits<double>::infinity(), 0.0), ContractError);
  CHECK_THROWS_AS(choice_probability(0.0, std::nan("")), ContractError);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-750.0, 750.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = unif(rng), b = unif(rng);
    CHECK(std::abs(choice_probability(a, b) + choice_probability(b, a) - 1.0) <= 1e-12);
  }
}

TEST_CASE("choice_probability is strictly monotone on a grid") {
  for (double ub = -5.0; ub <= 5.0; ub += 1.0) {
    double prev = choice_probability(-10.0, ub);
    for (double ua = -9.75; ua <= 10.0; ua += 0.25) {
      const double p = choice_probability(ua, ub);
      CHECK(p > prev);
      CHECK(choice_probability(ub, ua) < choice_probability(ub, ua - 0.25));
      prev = p;
    }
  }
}

TEST_CASE("wtp is the negative coefficient ratio") {
  CHECK(wtp(2.0, -0.01) == doctest::Approx(200.0).epsilon(1e-14));
  CHECK(wtp(0.0, -0.02) == 0.0);
  CHECK(wtp(-0.8, -0.01) == doctest::Approx(-80.0).epsilon(1e-14));
  CHECK_THROWS_AS(wtp(1.0, 0.0), SignSafetyError);
  CHECK_THROWS_AS(wtp(1.0, -1e-9), SignSafetyError);
  CHECK_THROWS_AS(wtp(1.0, 0.5), SignSafetyError);
  CHECK(wtp(1.0, -1e-9, 1e-10) == doctest::Approx(1e9));
}

TEST_CASE("wtp is invariant to the utility scale") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(0.01, 100.0);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 200; ++i) {
    const double bf = normal(rng), bp = -unif(rng) / 100.0, c = unif(rng);
    CHECK(wtp(c * bf, c * bp) == doctest::Approx(wtp(bf, bp)).epsilon(1e-12));
  }
}
