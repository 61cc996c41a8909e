#include "pvfair/fairness/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "pvfair/error.hpp"

namespace pvfair::fairness {

void CurtailmentLedger::append_day(std::vector<double> realized, std::vector<double> mpp) {
  if (realized.size() != plants_ || mpp.size() != plants_) {
    throw ValidationError(fmt::format("ledger day has {}/{} entries for {} plants", realized.size(),
                                      mpp.size(), plants_));
  }
  for (std::size_t l = 0; l < plants_; ++l) {
    if (!std::isfinite(realized[l]) || !std::isfinite(mpp[l]) || realized[l] < 0.0 || mpp[l] < 0.0) {
      throw ValidationError(fmt::format("ledger energies of plant {} must be finite and >= 0", l));
    }
    if (realized[l] > mpp[l]) {
      if (realized[l] - mpp[l] > 1e-9 * std::max(1.0, mpp[l])) {
        throw ValidationError(fmt::format("plant {} realized {} exceeds its MPP energy {}", l,
                                          realized[l], mpp[l]));
      }
      realized[l] = mpp[l];
    }
  }
  realized_.push_back(std::move(realized));
  mpp_.push_back(std::move(mpp));
}

double CurtailmentLedger::realized(std::size_t day, std::size_t plant) const {
  if (day == 0 || day > days()) throw ValidationError(fmt::format("ledger has no day {}", day));
  return realized_[day - 1].at(plant);
}

double CurtailmentLedger::mpp(std::size_t day, std::size_t plant) const {
  if (day == 0 || day > days()) throw ValidationError(fmt::format("ledger has no day {}", day));
  return mpp_[day - 1].at(plant);
}

std::vector<double> CurtailmentLedger::generation(std::size_t first, std::size_t last) const {
  if (first == 0 || last > days() || first > last) {
    throw ValidationError(fmt::format("day range {}..{} outside ledger of {} days", first, last, days()));
  }
  std::vector<double> g(plants_, 1.0);
  for (std::size_t l = 0; l < plants_; ++l) {
    double num = 0.0, den = 0.0;
    for (std::size_t d = first; d <= last; ++d) {
      num += realized_[d - 1][l];
      den += mpp_[d - 1][l];
    }
    if (den > 0.0) g[l] = num / den;
  }
  return g;
}

void CurtailmentLedger::write_csv(std::ostream& out) const {
  out << "day,plant,realized,mpp\n";
  for (std::size_t d = 0; d < days(); ++d) {
    for (std::size_t l = 0; l < plants_; ++l) {
      out << fmt::format("{},{},{:.17g},{:.17g}\n", d + 1, l, realized_[d][l], mpp_[d][l]);
    }
  }
}

CurtailmentLedger CurtailmentLedger::read_csv(std::istream& in) {
  struct Row {
    std::size_t day, plant;
    double realized, mpp;
  };
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "day,plant,realized,mpp") throw ParseError("header must be 'day,plant,realized,mpp'", lineno, 1);
      header = true;
      continue;
    }
    std::istringstream fields(line);
    std::string cell[4];
    for (auto& c : cell) {
      if (!std::getline(fields, c, ',')) throw ParseError("expected 4 columns", lineno);
    }
    try {
      rows.push_back({std::stoul(cell[0]), std::stoul(cell[1]), std::stod(cell[2]), std::stod(cell[3])});
    } catch (const std::exception&) {
      throw ParseError("non-numeric field", lineno);
    }
  }
  if (!header) throw ParseError("empty ledger file");
  std::size_t plants = 0;
  std::size_t days = 0;
  for (const auto& r : rows) {
    plants = std::max(plants, r.plant + 1);
    days = std::max(days, r.day);
  }
  if (rows.size() != plants * days) throw ValidationError("ledger rows do not cover every day and plant");
  std::vector<std::vector<double>> real(days, std::vector<double>(plants, -1.0)), mpp = real;
  for (const auto& r : rows) {
    if (r.day == 0) throw ValidationError("ledger days start at 1");
    real[r.day - 1][r.plant] = r.realized;
    mpp[r.day - 1][r.plant] = r.mpp;
  }
  CurtailmentLedger out(plants);
  for (std::size_t d = 0; d < days; ++d) out.append_day(real[d], mpp[d]);
  return out;
}

double jfi(const std::vector<double>& g) {
  if (g.empty()) throw ValidationError("jfi of an empty vector");
  double sum = 0.0, sq = 0.0;
  for (double v : g) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("jfi needs finite non-negative values");
    sum += v;
    sq += v * v;
  }
  if (!(sq > 0.0)) throw ValidationError("jfi of an all-zero vector");
  return sum * sum / (static_cast<double>(g.size()) * sq);
}

const char* to_string(WeightPolicy p) {
  switch (p) {
    case WeightPolicy::kUniform: return "uniform";
    case WeightPolicy::kInverse: return "inverse";
    case WeightPolicy::kShrinking: return "shrinking";
    case WeightPolicy::kRolling: return "rolling";
    case WeightPolicy::kLogarithmic: return "log";
    case WeightPolicy::kDifference: return "difference";
  }
  return "unknown";
}

WeightPolicy parse_policy(std::string_view name) {
  if (name == "uniform" || name == "none") return WeightPolicy::kUniform;
  if (name == "inverse") return WeightPolicy::kInverse;
  if (name == "shrinking") return WeightPolicy::kShrinking;
  if (name == "rolling") return WeightPolicy::kRolling;
  if (name == "log" || name == "logarithmic") return WeightPolicy::kLogarithmic;
  if (name == "difference") return WeightPolicy::kDifference;
  throw ValidationError(fmt::format("unknown weight policy '{}'", name));
}

FairnessWeights compute_weights(WeightPolicy policy, const CurtailmentLedger& ledger, std::size_t D,
                                const std::vector<double>& future_daily_mpp,
                                const WeightParams& params) {
  if (!(params.floor > 0.0)) throw ValidationError("weight floor must be positive");
  if (params.horizon_days < 1 || params.rolling_days < 1) {
    throw ValidationError("weight horizons must be at least one day");
  }
  if (D > ledger.days()) throw ValidationError(fmt::format("ledger holds {} days, not {}", ledger.days(), D));
  const std::size_t n = ledger.plants();
  FairnessWeights out{std::vector<double>(n, 1.0), policy, params};
  if (D == 0 || policy == WeightPolicy::kUniform) return out;

  const double eps = params.floor;
  const auto g = ledger.cumulative_generation(D);

  // Future-term days: through the month end, or through day R of the
  // rolling window once D reaches R (then empty).
  auto future_days = [&]() -> std::size_t {
    std::size_t last = static_cast<std::size_t>(params.horizon_days);
    if (policy == WeightPolicy::kRolling && D >= static_cast<std::size_t>(params.rolling_days)) {
      last = static_cast<std::size_t>(params.rolling_days);
    }
    return last > D ? last - D : 0;
  };

  for (std::size_t l = 0; l < n; ++l) {
    double lam = 1.0;
    switch (policy) {
      case WeightPolicy::kUniform: break;
      case WeightPolicy::kInverse: lam = 1.0 / std::max(g[l], eps); break;
      case WeightPolicy::kLogarithmic: lam = -std::log(std::max(g[l], eps)); break;
      case WeightPolicy::kDifference: lam = 1.0 - g[l]; break;
      case WeightPolicy::kShrinking:
      case WeightPolicy::kRolling: {
        if (future_daily_mpp.size() != n) {
          throw ValidationError("future MPP energies do not match the plant count");
        }
        double past_mpp = 0.0, past_real = 0.0;
        for (std::size_t d = 1; d <= D; ++d) {
          past_mpp += ledger.mpp(d, l);
          past_real += ledger.realized(d, l);
        }
        const double future = static_cast<double>(future_days()) * future_daily_mpp[l];
        const double den = past_real + future;
        const double num = past_mpp + future;
        lam = num > 0.0 ? num / std::max(den, eps * num) : 1.0;
        break;
      }
    }
    out.lambda[l] = std::max(lam, eps);
  }
  return out;
}

}  // namespace pvfair::fairness
