#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>

#include "helpers.hpp"
#include "pvfair/error.hpp"
#include "pvfair/scenario/scenario.hpp"

using namespace pvfair;
using namespace pvfair::scenario;

TEST_CASE("resampling averages whole intervals") {
  const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(resample(v, 15, 60) == std::vector<double>{2.5, 6.5});
  CHECK(resample(v, 15, 15) == v);
  CHECK_THROWS_AS(resample(v, 15, 45), ValidationError);
  CHECK_THROWS_AS(resample(v, 60, 15), ValidationError);
}

TEST_CASE("profile csv with step indices and with timestamps") {
  const auto a = parse_profile_csv("time,value\n0,0.1\n1,0.2\n2,0.3\n", 30);
  CHECK(a.values == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(a.timestep_minutes == 30);
  const auto b = parse_profile_csv(
      "time,value\n2024-06-01T00:00:00,0\n2024-06-01T00:15:00,0.5\n2024-06-01T00:30:00,1\n");
  CHECK(b.timestep_minutes == 15);
  CHECK(b.values.size() == 3);
  CHECK(parse_profile_csv(write_profile_csv(a), 30).values == a.values);
}

TEST_CASE("bad profile files name the line") {
  try {
    parse_profile_csv("time,value\n0,0.1\n1,oops\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_profile_csv("when,what\n0,1\n"), ParseError);
  CHECK_THROWS_AS(parse_profile_csv("time,value\n0,-1\n"), ValidationError);
  CHECK_THROWS_AS(parse_profile_csv(""), ParseError);
}

TEST_CASE("extreme pairing crosses high PV with low load") {
  const std::vector<double> lo{0.1, 0.2}, hi{0.3, 0.4};
  ProfileTriple real{lo, lo, lo, {}, {}};
  const auto s = pair_extremes({lo, hi}, {lo, hi}, {lo, hi}, real, 60);
  REQUIRE(s.scenarios.size() == 2);
  CHECK(s.scenarios[0].pv == lo);
  CHECK(s.scenarios[0].load_p == hi);
  CHECK(s.scenarios[1].pv == hi);
  CHECK(s.scenarios[1].load_p == lo);
  CHECK_THROWS_AS(pair_extremes({}, {lo}, {lo}, real, 60), ValidationError);
}

TEST_CASE("scenario set validation") {
  ScenarioSet s;
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.scenarios = {ProfileTriple{{0.1, 0.2}, {0.1, 0.2}, {0.1}, {}, {}}};
  s.realization = ProfileTriple{{0.1, 0.2}, {0.1, 0.2}, {0.1, 0.2}, {}, {}};
  CHECK_THROWS_AS(s.validate(), ValidationError);
  s.scenarios[0].load_q = {0.1, 0.2};
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("per-element overrides replace the system factor") {
  ProfileTriple p{{0.5}, {1.0}, {1.0}, {{1, {0.2}}}, {{3, {0.7}}}};
  CHECK(p.pv_factor(0, 0) == 0.5);
  CHECK(p.pv_factor(1, 0) == 0.2);
  CHECK(p.load_p_factor(3, 0) == 0.7);
  CHECK(p.load_q_factor(3, 0) == 0.7);
  CHECK(p.load_q_factor(2, 0) == 1.0);
}

TEST_CASE("synthetic days are seeded and clear skies peak at one") {
  const auto a = synth_profiles(11, 3, 0.0);
  const auto b = synth_profiles(11, 3, 0.0);
  REQUIRE(a.size() == 3);
  CHECK(a[1].realization == b[1].realization);
  const auto& pv = a[0].realization.pv;
  CHECK(pv.size() == 96);
  CHECK(*std::max_element(pv.begin(), pv.end()) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(pv[0] == 0.0);
  CHECK(pv[95] == 0.0);
  const auto cloudy = synth_profiles(11, 3, 0.8);
  const double clear = std::accumulate(pv.begin(), pv.end(), 0.0);
  const double dim = std::accumulate(cloudy[0].realization.pv.begin(), cloudy[0].realization.pv.end(), 0.0);
  CHECK(dim < clear);
  CHECK(synth_profiles(12, 1, 0.5)[0].realization.load_p != a[0].realization.load_p);
  CHECK_THROWS_AS(synth_profiles(1, 0, 0.0), ValidationError);
  CHECK_THROWS_AS(synth_profiles(1, 1, 1.5), ValidationError);
}

TEST_CASE("fixture directories round trip") {
  const auto day = synth_profiles(4, 1, 0.3)[0];
  const auto dir = (std::filesystem::temp_directory_path() / "pvfair_fixture_rt").string();
  std::filesystem::remove_all(dir);
  write_day_directory(dir, day, 15);
  const auto set = load_day_directory(dir);
  CHECK(set.timestep_minutes == 15);
  CHECK(set.horizon() == 96);
  CHECK(set.scenarios.size() == 2);
  for (std::size_t t = 0; t < 96; ++t) {
    CHECK(set.realization.pv[t] == doctest::Approx(day.realization.pv[t]).epsilon(1e-15));
  }
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(load_day_directory(dir), Error);
}

TEST_CASE("shipped deterministic fixture loads") {
  const auto set = load_day_directory(testing::data_path("fixtures/deterministic"));
  CHECK(set.horizon() == 96);
  CHECK(set.scenarios[0] == set.scenarios[1]);
  CHECK(set.scenarios[0].pv == set.realization.pv);
}
