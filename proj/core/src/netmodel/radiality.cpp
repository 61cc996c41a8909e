#include "pvfair/netmodel/radiality.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include <fmt/format.h>

namespace pvfair::netmodel {
namespace {

// Union-find over buses for cycle detection.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

RadialityReport fail(RadialityViolation kind, std::string msg, std::size_t bus = 0,
                     std::size_t line = 0) {
  return RadialityReport{kind, bus, line, std::move(msg)};
}

}  // namespace

const char* to_string(RadialityViolation v) {
  switch (v) {
    case RadialityViolation::kNone: return "ok";
    case RadialityViolation::kSizeMismatch: return "size mismatch";
    case RadialityViolation::kFixedLineOpen: return "fixed line open";
    case RadialityViolation::kOrientationSum: return "orientation sum";
    case RadialityViolation::kFractional: return "fractional orientation";
    case RadialityViolation::kSlackFed: return "slack fed";
    case RadialityViolation::kParentCount: return "orientation count";
    case RadialityViolation::kCycle: return "cycle";
    case RadialityViolation::kIsland: return "island";
  }
  return "unknown";
}

RadialityReport validate_radiality(const Network& net, const Topology& topo, double tol) {
  const std::size_t n = net.bus_count();
  const std::size_t m = net.line_count();
  if (topo.closed.size() != m || topo.d_forward.size() != m || topo.d_backward.size() != m) {
    return fail(RadialityViolation::kSizeMismatch, "topology does not match the network size");
  }

  // Structural checks first so that loops and islands are reported as such,
  // whatever the orientation variables say.
  DisjointSets sets(n);
  for (std::size_t e = 0; e < m; ++e) {
    const auto& ln = net.lines[e];
    if (!ln.switchable && !topo.closed[e]) {
      return fail(RadialityViolation::kFixedLineOpen,
                  fmt::format("line {} has no switch but is open", e + 1), 0, e);
    }
    if (!topo.closed[e]) continue;
    if (!sets.unite(ln.from, ln.to)) {
      return fail(RadialityViolation::kCycle,
                  fmt::format("closing line {} ({}-{}) creates a cycle", e + 1,
                              net.buses[ln.from].id, net.buses[ln.to].id),
                  ln.from, e);
    }
  }
  for (std::size_t a = 0; a < net.slack_buses.size(); ++a) {
    for (std::size_t b = a + 1; b < net.slack_buses.size(); ++b) {
      if (sets.find(net.slack_buses[a]) == sets.find(net.slack_buses[b])) {
        return fail(RadialityViolation::kCycle,
                    "two slack buses are joined through closed lines", net.slack_buses[b]);
      }
    }
  }
  std::vector<bool> fed(n, false);
  for (auto s : net.slack_buses) fed[sets.find(s)] = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!fed[sets.find(i)]) {
      return fail(RadialityViolation::kIsland,
                  fmt::format("bus {} is not connected to any slack bus", net.buses[i].id), i);
    }
  }

  std::vector<double> incoming(n, 0.0);
  for (std::size_t e = 0; e < m; ++e) {
    const double df = topo.d_forward[e];
    const double db = topo.d_backward[e];
    for (double d : {df, db}) {
      if (std::min(std::abs(d), std::abs(d - 1.0)) > tol) {
        return fail(RadialityViolation::kFractional,
                    fmt::format("line {} has fractional orientation {}", e + 1, d), 0, e);
      }
    }
    const double status = topo.closed[e] ? 1.0 : 0.0;
    if (std::abs(df + db - status) > tol) {
      return fail(RadialityViolation::kOrientationSum,
                  fmt::format("line {} orientations sum to {} but status is {}", e + 1, df + db,
                              status),
                  0, e);
    }
    incoming[net.lines[e].to] += df;
    incoming[net.lines[e].from] += db;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (net.is_slack(i)) {
      if (incoming[i] > tol) {
        return fail(RadialityViolation::kSlackFed,
                    fmt::format("slack bus {} has an incoming orientation", net.buses[i].id), i);
      }
    } else if (std::abs(incoming[i] - 1.0) > tol) {
      return fail(RadialityViolation::kParentCount,
                  fmt::format("bus {} has {} incoming orientations", net.buses[i].id, incoming[i]),
                  i);
    }
  }
  return {};
}

}  // namespace pvfair::netmodel
