#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace pvfair::scenario {

/// One day of multiplicative factors. `pv` scales every plant's converter
/// capacity into an MPP, `load_p` / `load_q` scale the nominal bus demands.
///
/// Per-node heterogeneity is optional: an entry in `pv_by_plant` (keyed by
/// plant position) or `load_by_bus` (keyed by bus position, applied to both
/// P and Q) replaces the system-wide factor for that element.
struct ProfileTriple {
  std::vector<double> pv;
  std::vector<double> load_p;
  std::vector<double> load_q;
  std::map<std::size_t, std::vector<double>> pv_by_plant;
  std::map<std::size_t, std::vector<double>> load_by_bus;

  std::size_t horizon() const { return pv.size(); }
  double pv_factor(std::size_t plant, std::size_t t) const;
  double load_p_factor(std::size_t bus, std::size_t t) const;
  double load_q_factor(std::size_t bus, std::size_t t) const;

  bool operator==(const ProfileTriple&) const = default;
};

/// Day-ahead scenarios plus the realization used by the real-time stage.
/// All profiles of a set share one cadence and horizon.
struct ScenarioSet {
  std::vector<ProfileTriple> scenarios;
  ProfileTriple realization;
  int timestep_minutes = 15;

  std::size_t horizon() const { return realization.horizon(); }
  /// Throws ValidationError on ragged lengths, negative or non-finite factors,
  /// or an empty scenario list.
  void validate() const;

  bool operator==(const ScenarioSet&) const = default;
};

/// Interval-averages `values` from `from_minutes` to the coarser
/// `to_minutes` cadence. Equal cadences return the input unchanged. Throws
/// ValidationError unless `to_minutes` is an integer multiple of
/// `from_minutes` dividing the horizon evenly.
std::vector<double> resample(const std::vector<double>& values, int from_minutes, int to_minutes);
ProfileTriple resample(const ProfileTriple& p, int from_minutes, int to_minutes);
/// Resamples scenarios and realization alike.
ScenarioSet resample(const ScenarioSet& s, int to_minutes);

/// A single-column profile file: header `time,value`, one row per step.
/// `time` is either a step index or an ISO-8601 timestamp; the cadence is
/// inferred from the first two timestamps (or given by `default_minutes`
/// when the column holds step indices).
struct Profile {
  std::vector<double> values;
  int timestep_minutes = 15;
};

Profile parse_profile_csv(const std::string& text, int default_minutes = 15);
Profile load_profile_csv(const std::string& path, int default_minutes = 15);
std::string write_profile_csv(const Profile& p);

/// Files making up one day. Each candidate is a (pv, load_p, load_q) path
/// triple; the realization has the same shape.
struct ProfileFiles {
  std::vector<std::string> pv;
  std::vector<std::string> load_p;
  std::vector<std::string> load_q;
  std::string realization_pv;
  std::string realization_load_p;
  std::string realization_load_q;
};

/// Reads the files and forms scenarios one-to-one by position (the i-th PV,
/// load_p and load_q files make scenario i). Cadences must agree within each
/// group; a realization at a finer cadence than the scenarios is averaged
/// down to the scenario cadence.
ScenarioSet load_profiles(const ProfileFiles& files);

/// Cross-pairs extreme candidates by total energy: scenario 1 takes the
/// lowest-energy PV with the highest-energy load, scenario 2 the opposite.
/// Ties go to the lowest index. `load_q` candidates follow their `load_p`
/// partner. Throws ValidationError on empty candidate lists.
ScenarioSet pair_extremes(const std::vector<std::vector<double>>& pv_candidates,
                          const std::vector<std::vector<double>>& load_p_candidates,
                          const std::vector<std::vector<double>>& load_q_candidates,
                          const ProfileTriple& realization, int timestep_minutes);

/// One synthetic day: two forecast candidates per quantity and a realization,
/// all at 15 minutes.
struct SyntheticDay {
  std::vector<std::vector<double>> pv_candidates;
  std::vector<std::vector<double>> load_candidates;
  ProfileTriple realization;
};

struct SynthOptions {
  int steps_per_day = 96;
  double sunrise_hour = 6.0;
  double sunset_hour = 20.0;
  double load_base = 0.25;          ///< night plateau of the load factor
  double load_morning_peak = 0.15;  ///< added at 08:00
  double load_evening_peak = 0.25;  ///< added at 19:30
  double load_noise = 0.03;         ///< std-dev of per-step load noise
  double forecast_spread = 0.10;    ///< relative spread of the two candidates
};

/// Deterministic synthetic days for a seed. PV is a clear-sky half-sine that
/// peaks at 1.0 at solar noon, scaled by a per-day clearness drawn from
/// `cloudiness` (0 gives clear sky every day) and, within the day, by a
/// smooth cloud modulation. Load is a night plateau plus morning and evening
/// Gaussian bumps plus noise, clamped at zero; with the defaults it lies in
/// roughly [0.2, 0.55]. Reactive load follows the active factor.
std::vector<SyntheticDay> synth_profiles(std::uint64_t seed, int days, double cloudiness,
                                         const SynthOptions& opts = {});

/// Writes a day as profile files under `dir` with the names used by
/// fixture directories (pv_1.csv, pv_2.csv, load_1.csv, load_2.csv,
/// realization_pv.csv, realization_load.csv).
void write_day_directory(const std::string& dir, const SyntheticDay& day, int timestep_minutes);

/// Reads a fixture day directory written by write_day_directory (or by hand)
/// and pairs the candidates with pair_extremes. Reactive load uses the
/// active-load factors.
ScenarioSet load_day_directory(const std::string& dir);

}  // namespace pvfair::scenario
