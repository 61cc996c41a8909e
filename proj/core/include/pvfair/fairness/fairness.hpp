#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace pvfair::fairness {

/// Daily PV energies per plant, in p.u.·h. Days are numbered from 1.
class CurtailmentLedger {
 public:
  explicit CurtailmentLedger(std::size_t plants = 0) : plants_(plants) {}

  /// Appends the next day. Throws ValidationError on a size mismatch,
  /// negative or non-finite values, or realized > mpp (beyond 1e-9
  /// relative slack, which is clipped).
  void append_day(std::vector<double> realized, std::vector<double> mpp);

  std::size_t plants() const { return plants_; }
  std::size_t days() const { return realized_.size(); }
  double realized(std::size_t day, std::size_t plant) const;
  double mpp(std::size_t day, std::size_t plant) const;

  /// 𝒢 over days [first, last] (1-based, inclusive); 1 where no MPP energy
  /// was available.
  std::vector<double> generation(std::size_t first, std::size_t last) const;
  /// 𝒢 over days 1..through.
  std::vector<double> cumulative_generation(std::size_t through) const {
    return generation(1, through);
  }

  /// CSV with header day,plant,realized,mpp (plant 0-based).
  void write_csv(std::ostream& out) const;
  static CurtailmentLedger read_csv(std::istream& in);

  bool operator==(const CurtailmentLedger&) const = default;

 private:
  std::size_t plants_ = 0;
  std::vector<std::vector<double>> realized_;
  std::vector<std::vector<double>> mpp_;
};

/// (Σg)² / (n·Σg²). Throws ValidationError for an empty vector, negative
/// entries, or all zeros.
double jfi(const std::vector<double>& g);

enum class WeightPolicy { kUniform, kInverse, kShrinking, kRolling, kLogarithmic, kDifference };

const char* to_string(WeightPolicy p);
/// Accepts uniform, inverse, shrinking, rolling, log, logarithmic,
/// difference. Throws ValidationError otherwise.
WeightPolicy parse_policy(std::string_view name);

struct WeightParams {
  int horizon_days = 30;  ///< last day of the shrinking horizon
  int rolling_days = 15;  ///< R
  double floor = 1e-3;    ///< ε
};

struct FairnessWeights {
  std::vector<double> lambda;
  WeightPolicy policy = WeightPolicy::kInverse;
  WeightParams params;
};

/// Weights for day D + 1 from the ledger's days 1..D.
///
/// `future_daily_mpp` holds each plant's expected MPP energy for one
/// upcoming day; the shrinking and rolling policies assume every future day
/// repeats it uncurtailed. λ = 1 for every policy when D = 0. 𝒢 is floored
/// at ε before inversion or logarithm, and all weights at ε.
FairnessWeights compute_weights(WeightPolicy policy, const CurtailmentLedger& ledger, std::size_t D,
                                const std::vector<double>& future_daily_mpp,
                                const WeightParams& params = {});

}  // namespace pvfair::fairness
