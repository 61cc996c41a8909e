// pvfair_fixture: write synthetic scenario days as fixture directories.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pvfair/scenario/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write synthetic PV/load days as fixture directories"};
  std::string out;
  std::uint64_t seed = 1;
  int days = 1;
  double cloudiness = 0.0;
  double spread = 0.10;
  app.add_option("--out", out, "output directory (one subdirectory per day when --days > 1)")->required();
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--days", days, "number of days")->check(CLI::PositiveNumber);
  app.add_option("--cloudiness", cloudiness, "0 is clear sky")->check(CLI::Range(0.0, 1.0));
  app.add_option("--forecast-spread", spread, "relative spread of the two candidates");
  CLI11_PARSE(app, argc, argv);

  try {
    pvfair::scenario::SynthOptions opts;
    opts.forecast_spread = spread;
    const auto synth = pvfair::scenario::synth_profiles(seed, days, cloudiness, opts);
    for (int d = 0; d < days; ++d) {
      const auto dir = days == 1 ? out : (std::filesystem::path(out) / fmt::format("day{:02}", d + 1)).string();
      pvfair::scenario::write_day_directory(dir, synth[static_cast<std::size_t>(d)], 15);
      std::cout << "wrote " << dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
