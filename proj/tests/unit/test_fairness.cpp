#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pvfair/error.hpp"
#include "pvfair/fairness/fairness.hpp"

using namespace pvfair;
using namespace pvfair::fairness;

TEST_CASE("jfi of a two-plant spread") {
  CHECK(jfi({0.5, 1.0}) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(jfi({0.3, 0.3, 0.3}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(jfi({0.0, 0.0, 0.7, 0.0}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(jfi({}), ValidationError);
  CHECK_THROWS_AS(jfi({0.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(jfi({0.5, -0.1}), ValidationError);
}

TEST_CASE("ledger generation ratios") {
  CurtailmentLedger led(2);
  led.append_day({0.5, 1.0}, {1.0, 1.0});
  led.append_day({1.0, 0.0}, {2.0, 0.0});
  CHECK(led.days() == 2);
  const auto g1 = led.generation(1, 1);
  CHECK(g1[0] == doctest::Approx(0.5));
  CHECK(g1[1] == doctest::Approx(1.0));
  const auto g = led.cumulative_generation(2);
  CHECK(g[0] == doctest::Approx(1.5 / 3.0));
  CHECK(g[1] == doctest::Approx(1.0));
  CHECK(led.generation(2, 2)[1] == 1.0);
}

TEST_CASE("ledger rejects bad days and clips rounding") {
  CurtailmentLedger led(2);
  CHECK_THROWS_AS(led.append_day({0.5}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(led.append_day({-0.1, 0.0}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(led.append_day({1.5, 0.0}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(led.append_day({NAN, 0.0}, {1.0, 1.0}), ValidationError);
  led.append_day({1.0 + 1e-12, 0.0}, {1.0, 1.0});
  CHECK(led.realized(1, 0) == 1.0);
  CHECK_THROWS(led.realized(2, 0));
}

TEST_CASE("ledger csv round trip is exact") {
  CurtailmentLedger led(3);
  led.append_day({0.1, 0.2 / 3.0, 0.0}, {0.3, 1.0 / 7.0, 0.0});
  led.append_day({0.25, 0.5, 1e-17}, {0.5, 0.5, 1e-16});
  std::stringstream buf;
  led.write_csv(buf);
  CHECK(buf.str().rfind("day,plant,realized,mpp\n", 0) == 0);
  CHECK(CurtailmentLedger::read_csv(buf) == led);
  std::stringstream bad("day,plant,realized,mpp\n1,0,x,1\n");
  CHECK_THROWS_AS(CurtailmentLedger::read_csv(bad), ParseError);
}

TEST_CASE("policy names parse") {
  for (auto p : {WeightPolicy::kUniform, WeightPolicy::kInverse, WeightPolicy::kShrinking, WeightPolicy::kRolling,
                 WeightPolicy::kLogarithmic, WeightPolicy::kDifference}) {
    CHECK(parse_policy(to_string(p)) == p);
  }
  CHECK(parse_policy("logarithmic") == WeightPolicy::kLogarithmic);
  CHECK_THROWS_AS(parse_policy("fair"), ValidationError);
}

TEST_CASE("weights on the first day are uniform") {
  CurtailmentLedger led(3);
  for (auto p : {WeightPolicy::kInverse, WeightPolicy::kShrinking, WeightPolicy::kRolling}) {
    CHECK(compute_weights(p, led, 0, {1.0, 1.0, 1.0}).lambda == std::vector<double>{1.0, 1.0, 1.0});
  }
}

TEST_CASE("inverse, log and difference weights") {
  CurtailmentLedger led(3);
  led.append_day({0.5, 1.0, 0.0}, {1.0, 1.0, 1.0});
  const auto inv = compute_weights(WeightPolicy::kInverse, led, 1, {}).lambda;
  CHECK(inv[0] == doctest::Approx(2.0));
  CHECK(inv[1] == doctest::Approx(1.0));
  CHECK(inv[2] == doctest::Approx(1000.0));
  const auto lg = compute_weights(WeightPolicy::kLogarithmic, led, 1, {}).lambda;
  CHECK(lg[0] == doctest::Approx(std::log(2.0)));
  CHECK(lg[1] == doctest::Approx(1e-3));
  CHECK(lg[2] == doctest::Approx(-std::log(1e-3)));
  const auto diff = compute_weights(WeightPolicy::kDifference, led, 1, {}).lambda;
  CHECK(diff[0] == doctest::Approx(0.5));
  CHECK(diff[1] == doctest::Approx(1e-3));
  CHECK(diff[2] == doctest::Approx(1.0));
}

TEST_CASE("shrinking weight after a fully curtailed first day") {
  CurtailmentLedger led(2);
  led.append_day({0.0, 1.0}, {1.0, 1.0});
  const auto w = compute_weights(WeightPolicy::kShrinking, led, 1, {1.0, 1.0}).lambda;
  CHECK(w[0] == doctest::Approx(30.0 / 29.0).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("shrinking weight at the horizon end equals the inverse weight") {
  CurtailmentLedger led(1);
  for (int d = 0; d < 30; ++d) led.append_day({0.6}, {1.0});
  WeightParams p;
  const auto s = compute_weights(WeightPolicy::kShrinking, led, 30, {1.0}, p).lambda;
  const auto i = compute_weights(WeightPolicy::kInverse, led, 30, {1.0}, p).lambda;
  CHECK(s[0] == doctest::Approx(i[0]));
}

TEST_CASE("rolling weight drops the future term once the window has passed") {
  CurtailmentLedger led(1);
  for (int d = 0; d < 16; ++d) led.append_day({0.5}, {1.0});
  WeightParams p;
  p.rolling_days = 15;
  CHECK(compute_weights(WeightPolicy::kRolling, led, 16, {1.0}, p).lambda[0] == doctest::Approx(2.0));
  CHECK(compute_weights(WeightPolicy::kRolling, led, 5, {1.0}, p).lambda[0] ==
        doctest::Approx((5.0 + 25.0) / (2.5 + 25.0)));
}

TEST_CASE("weights reject bad parameters") {
  CurtailmentLedger led(1);
  led.append_day({0.5}, {1.0});
  WeightParams p;
  p.floor = 0.0;
  CHECK_THROWS_AS(compute_weights(WeightPolicy::kInverse, led, 1, {1.0}, p), ValidationError);
  CHECK_THROWS_AS(compute_weights(WeightPolicy::kInverse, led, 2, {1.0}), ValidationError);
  CHECK_THROWS_AS(compute_weights(WeightPolicy::kShrinking, led, 1, {1.0, 1.0}), ValidationError);
}
