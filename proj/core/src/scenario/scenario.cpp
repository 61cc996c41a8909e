#include "pvfair/scenario/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "pvfair/error.hpp"

namespace pvfair::scenario {

double ProfileTriple::pv_factor(std::size_t plant, std::size_t t) const {
  if (auto it = pv_by_plant.find(plant); it != pv_by_plant.end()) return it->second.at(t);
  return pv.at(t);
}

double ProfileTriple::load_p_factor(std::size_t bus, std::size_t t) const {
  if (auto it = load_by_bus.find(bus); it != load_by_bus.end()) return it->second.at(t);
  return load_p.at(t);
}

double ProfileTriple::load_q_factor(std::size_t bus, std::size_t t) const {
  if (auto it = load_by_bus.find(bus); it != load_by_bus.end()) return it->second.at(t);
  return load_q.at(t);
}

namespace {

void check_series(const std::vector<double>& v, std::size_t horizon, const std::string& what) {
  if (v.size() != horizon) {
    throw ValidationError(fmt::format("{} has {} steps, expected {}", what, v.size(), horizon));
  }
  for (std::size_t t = 0; t < v.size(); ++t) {
    if (!std::isfinite(v[t]) || v[t] < 0.0) {
      throw ValidationError(fmt::format("{} has an invalid factor {} at step {}", what, v[t], t));
    }
  }
}

void check_triple(const ProfileTriple& p, std::size_t horizon, const std::string& what) {
  check_series(p.pv, horizon, what + " pv");
  check_series(p.load_p, horizon, what + " load_p");
  check_series(p.load_q, horizon, what + " load_q");
  for (const auto& [k, v] : p.pv_by_plant) check_series(v, horizon, fmt::format("{} pv[{}]", what, k));
  for (const auto& [k, v] : p.load_by_bus) check_series(v, horizon, fmt::format("{} load[{}]", what, k));
}

double energy(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Minutes since 0000-03-01 for "YYYY-MM-DD[T ]HH:MM[:SS]" (days from civil).
std::optional<long long> parse_timestamp(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  char sep = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d", &y, &mo, &d, &sep, &h, &mi) != 6) return std::nullopt;
  if (sep != 'T' && sep != ' ') return std::nullopt;
  y -= mo <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const long long yoe = y - era * 400;
  const long long doy = (153LL * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const long long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  const long long days = era * 146097 + doe;
  return days * 1440 + h * 60 + mi;
}

}  // namespace

void ScenarioSet::validate() const {
  if (scenarios.empty()) throw ValidationError("scenario set has no scenarios");
  if (timestep_minutes <= 0) throw ValidationError("timestep must be positive");
  const std::size_t h = realization.horizon();
  if (h == 0) throw ValidationError("scenario set has an empty horizon");
  check_triple(realization, h, "realization");
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    check_triple(scenarios[i], h, fmt::format("scenario {}", i + 1));
  }
}

std::vector<double> resample(const std::vector<double>& values, int from_minutes, int to_minutes) {
  if (from_minutes <= 0 || to_minutes <= 0) throw ValidationError("cadence must be positive");
  if (from_minutes == to_minutes) return values;
  if (to_minutes % from_minutes != 0) {
    throw ValidationError(fmt::format("cannot resample {} min to {} min", from_minutes, to_minutes));
  }
  const auto ratio = static_cast<std::size_t>(to_minutes / from_minutes);
  if (values.size() % ratio != 0) {
    throw ValidationError(fmt::format("{} steps do not divide into {}-min intervals", values.size(),
                                      to_minutes));
  }
  std::vector<double> out(values.size() / ratio, 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < ratio; ++k) sum += values[i * ratio + k];
    out[i] = sum / static_cast<double>(ratio);
  }
  return out;
}

ProfileTriple resample(const ProfileTriple& p, int from_minutes, int to_minutes) {
  ProfileTriple out;
  out.pv = resample(p.pv, from_minutes, to_minutes);
  out.load_p = resample(p.load_p, from_minutes, to_minutes);
  out.load_q = resample(p.load_q, from_minutes, to_minutes);
  for (const auto& [k, v] : p.pv_by_plant) out.pv_by_plant[k] = resample(v, from_minutes, to_minutes);
  for (const auto& [k, v] : p.load_by_bus) out.load_by_bus[k] = resample(v, from_minutes, to_minutes);
  return out;
}

ScenarioSet resample(const ScenarioSet& s, int to_minutes) {
  if (s.timestep_minutes == to_minutes) return s;
  ScenarioSet out;
  out.timestep_minutes = to_minutes;
  out.realization = resample(s.realization, s.timestep_minutes, to_minutes);
  for (const auto& sc : s.scenarios) out.scenarios.push_back(resample(sc, s.timestep_minutes, to_minutes));
  return out;
}

Profile parse_profile_csv(const std::string& text, int default_minutes) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  std::vector<std::string> times;
  Profile out;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected two comma-separated columns", lineno);
    std::string time = trim(line.substr(0, comma));
    std::string value = trim(line.substr(comma + 1));
    if (!header_seen) {
      header_seen = true;
      if (time == "time" && value == "value") continue;
      throw ParseError("header must be 'time,value'", lineno, 1);
    }
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError("non-numeric value '" + value + "'", lineno, static_cast<int>(comma + 2));
    }
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError(fmt::format("line {}: factor {} must be finite and >= 0", lineno, value));
    }
    times.push_back(time);
    out.values.push_back(v);
  }
  if (!header_seen) throw ParseError("empty profile file");
  out.timestep_minutes = default_minutes;
  if (times.size() >= 2) {
    const auto a = parse_timestamp(times[0]);
    const auto b = parse_timestamp(times[1]);
    if (a && b) {
      const long long step = *b - *a;
      if (step <= 0) throw ValidationError("timestamps must increase");
      for (std::size_t i = 2; i < times.size(); ++i) {
        const auto c = parse_timestamp(times[i]);
        const auto prev = parse_timestamp(times[i - 1]);
        if (!c || !prev || *c - *prev != step) {
          throw ValidationError(fmt::format("inconsistent cadence at row {}", i + 1));
        }
      }
      out.timestep_minutes = static_cast<int>(step);
    }
  }
  return out;
}

Profile load_profile_csv(const std::string& path, int default_minutes) {
  try {
    return parse_profile_csv(read_file(path), default_minutes);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string write_profile_csv(const Profile& p) {
  std::string out = "time,value\n";
  for (std::size_t t = 0; t < p.values.size(); ++t) out += fmt::format("{},{:.17g}\n", t, p.values[t]);
  return out;
}

ScenarioSet load_profiles(const ProfileFiles& files) {
  if (files.pv.empty() || files.pv.size() != files.load_p.size() ||
      files.pv.size() != files.load_q.size()) {
    throw ValidationError("profile file lists must be non-empty and of equal length");
  }
  auto read_group = [](const std::vector<std::string>& paths, int& cadence) {
    std::vector<std::vector<double>> out;
    for (const auto& p : paths) {
      auto prof = load_profile_csv(p);
      if (cadence == 0) cadence = prof.timestep_minutes;
      if (prof.timestep_minutes != cadence) throw ValidationError("cadence differs in " + p);
      out.push_back(std::move(prof.values));
    }
    return out;
  };
  int cadence = 0;
  const auto pv = read_group(files.pv, cadence);
  const auto lp = read_group(files.load_p, cadence);
  const auto lq = read_group(files.load_q, cadence);
  int real_cadence = 0;
  const auto rpv = read_group({files.realization_pv}, real_cadence);
  const auto rlp = read_group({files.realization_load_p}, real_cadence);
  const auto rlq = read_group({files.realization_load_q}, real_cadence);

  ScenarioSet out;
  out.timestep_minutes = cadence;
  for (std::size_t i = 0; i < pv.size(); ++i) out.scenarios.push_back({pv[i], lp[i], lq[i], {}, {}});
  ProfileTriple real{rpv[0], rlp[0], rlq[0], {}, {}};
  if (real_cadence > cadence) {
    throw ValidationError("realization cadence is coarser than the scenarios");
  }
  out.realization = resample(real, real_cadence, cadence);
  out.validate();
  return out;
}

ScenarioSet pair_extremes(const std::vector<std::vector<double>>& pv_candidates,
                          const std::vector<std::vector<double>>& load_p_candidates,
                          const std::vector<std::vector<double>>& load_q_candidates,
                          const ProfileTriple& realization, int timestep_minutes) {
  if (pv_candidates.empty() || load_p_candidates.empty()) {
    throw ValidationError("pair_extremes needs at least one PV and one load candidate");
  }
  if (load_q_candidates.size() != load_p_candidates.size()) {
    throw ValidationError("every load_p candidate needs a load_q partner");
  }
  // Strict comparisons keep the lowest index on ties.
  auto argext = [](const std::vector<std::vector<double>>& c, bool want_max) {
    std::size_t best = 0;
    double best_e = energy(c[0]);
    for (std::size_t i = 1; i < c.size(); ++i) {
      const double e = energy(c[i]);
      if (want_max ? e > best_e : e < best_e) {
        best = i;
        best_e = e;
      }
    }
    return best;
  };
  const std::size_t pv_lo = argext(pv_candidates, false);
  const std::size_t pv_hi = argext(pv_candidates, true);
  const std::size_t ld_lo = argext(load_p_candidates, false);
  const std::size_t ld_hi = argext(load_p_candidates, true);

  ScenarioSet out;
  out.timestep_minutes = timestep_minutes;
  out.scenarios.push_back({pv_candidates[pv_lo], load_p_candidates[ld_hi], load_q_candidates[ld_hi], {}, {}});
  out.scenarios.push_back({pv_candidates[pv_hi], load_p_candidates[ld_lo], load_q_candidates[ld_lo], {}, {}});
  out.realization = realization;
  out.validate();
  return out;
}

std::vector<SyntheticDay> synth_profiles(std::uint64_t seed, int days, double cloudiness,
                                         const SynthOptions& opts) {
  if (days < 1) throw ValidationError("synth_profiles needs days >= 1");
  if (cloudiness < 0.0 || cloudiness > 1.0) throw ValidationError("cloudiness must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int n = opts.steps_per_day;
  const double step_h = 24.0 / n;
  const double day_len = opts.sunset_hour - opts.sunrise_hour;

  std::vector<SyntheticDay> out;
  out.reserve(static_cast<std::size_t>(days));
  for (int d = 0; d < days; ++d) {
    // Draws happen in a fixed order so every day consumes the same count.
    const double clearness = 1.0 - cloudiness * unif(rng);
    const double ripple_amp = 0.3 * cloudiness * unif(rng);
    const double ripple_phase = 2.0 * std::numbers::pi * unif(rng);
    const double spread_lo = opts.forecast_spread * (0.5 + unif(rng));
    const double spread_hi = opts.forecast_spread * (0.5 + unif(rng));
    const double load_level = 1.0 + 0.05 * gauss(rng);

    SyntheticDay day;
    std::vector<double> pv(static_cast<std::size_t>(n)), load_a(pv.size()), load_b(pv.size());
    for (int t = 0; t < n; ++t) {
      const double hour = (t + 0.5) * step_h;
      double sun = 0.0;
      if (hour > opts.sunrise_hour && hour < opts.sunset_hour) {
        sun = std::sin(std::numbers::pi * (hour - opts.sunrise_hour) / day_len);
      }
      const double ripple = 1.0 - ripple_amp * 0.5 * (1.0 + std::sin(2.0 * std::numbers::pi * hour / 3.0 + ripple_phase));
      pv[static_cast<std::size_t>(t)] = sun * clearness * ripple;

      const double shape = opts.load_base +
                           opts.load_morning_peak * std::exp(-0.5 * std::pow((hour - 8.0) / 1.5, 2)) +
                           opts.load_evening_peak * std::exp(-0.5 * std::pow((hour - 19.5) / 2.0, 2));
      const double noise_a = opts.load_noise * gauss(rng);
      const double noise_b = opts.load_noise * gauss(rng);
      const double half = 0.5 * opts.forecast_spread;
      load_a[static_cast<std::size_t>(t)] = std::max(0.0, load_level * shape * (1.0 + half) + noise_a);
      load_b[static_cast<std::size_t>(t)] = std::max(0.0, load_level * shape * (1.0 - half) + noise_b);
    }
    std::vector<double> pv_lo(pv.size()), pv_hi(pv.size()), load_mean(pv.size());
    for (std::size_t t = 0; t < pv.size(); ++t) {
      pv_lo[t] = pv[t] * (1.0 - spread_lo);
      pv_hi[t] = pv[t] * (1.0 + spread_hi);
      load_mean[t] = 0.5 * (load_a[t] + load_b[t]);
    }
    day.pv_candidates = {pv_lo, pv_hi};
    day.load_candidates = {load_a, load_b};
    day.realization = ProfileTriple{pv, load_mean, load_mean, {}, {}};
    out.push_back(std::move(day));
  }
  return out;
}

void write_day_directory(const std::string& dir, const SyntheticDay& day, int timestep_minutes) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::vector<double>& v) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (fs::path(dir) / name).string());
    out << write_profile_csv(Profile{v, timestep_minutes});
  };
  for (std::size_t i = 0; i < day.pv_candidates.size(); ++i) {
    write(fmt::format("pv_{}.csv", i + 1), day.pv_candidates[i]);
  }
  for (std::size_t i = 0; i < day.load_candidates.size(); ++i) {
    write(fmt::format("load_{}.csv", i + 1), day.load_candidates[i]);
  }
  write("realization_pv.csv", day.realization.pv);
  write("realization_load.csv", day.realization.load_p);
  std::ofstream meta(fs::path(dir) / "cadence.txt");
  meta << timestep_minutes << "\n";
}

ScenarioSet load_day_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error("fixture directory not found: " + dir);
  int cadence = 15;
  if (std::ifstream meta(fs::path(dir) / "cadence.txt"); meta) meta >> cadence;
  auto read = [&](const fs::path& p) { return load_profile_csv(p.string(), cadence); };
  std::vector<std::vector<double>> pv, load;
  for (int i = 1;; ++i) {
    const auto p = fs::path(dir) / fmt::format("pv_{}.csv", i);
    if (!fs::exists(p)) break;
    pv.push_back(read(p).values);
  }
  for (int i = 1;; ++i) {
    const auto p = fs::path(dir) / fmt::format("load_{}.csv", i);
    if (!fs::exists(p)) break;
    load.push_back(read(p).values);
  }
  const auto rpv = read(fs::path(dir) / "realization_pv.csv");
  const auto rload = read(fs::path(dir) / "realization_load.csv");
  if (rpv.timestep_minutes != rload.timestep_minutes) throw ValidationError("realization cadences differ");
  ProfileTriple real{rpv.values, rload.values, rload.values, {}, {}};
  return pair_extremes(pv, load, load, real, rpv.timestep_minutes);
}

}  // namespace pvfair::scenario
