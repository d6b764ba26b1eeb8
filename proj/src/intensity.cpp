#include "accessplan/intensity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accessplan/errors.hpp"

namespace accessplan {

const char* to_string(FarFitMode m) { return m == FarFitMode::per_use ? "per_use" : "joint"; }

FarFitMode parse_fit_mode(const std::string& text)
{
  if (text == "per_use") return FarFitMode::per_use;
  if (text == "joint") return FarFitMode::joint;
  throw ValidationError("unknown FAR fit mode '" + text + "' (expected per_use or joint)");
}

double IntensityConfig::footprint_for(Use u) const
{
  const double override_ratio = footprint_by_use[index_of(u)];
  return override_ratio > 0.0 ? override_ratio : footprint_ratio;
}

std::vector<double> weighted_accessibility(const AccessibilityTensor& tensor, std::span<const double> rho,
                                           std::vector<std::string>* warnings)
{
  if (rho.size() != tensor.tiers()) throw ValidationError("one accessibility weight per tier is required");
  double sum = 0.0;
  for (double w : rho) {
    if (!(w >= 0.0)) throw ValidationError("accessibility tier weights must be non-negative");
    sum += w;
  }
  if (!(sum > 0.0)) throw ValidationError("accessibility tier weights must not all be zero");
  if (std::abs(sum - 1.0) > 1e-9 && warnings != nullptr) {
    std::ostringstream msg;
    msg << "accessibility tier weights sum to " << sum << "; renormalized to 1";
    warnings->push_back(msg.str());
  }
  std::vector<double> out(tensor.blocks(), 0.0);
  for (std::size_t i = 0; i < tensor.blocks(); ++i) {
    double acc = 0.0;
    for (std::size_t l = 0; l < rho.size(); ++l) acc += rho[l] / sum * tensor.at(i, l);
    out[i] = std::clamp(acc, 0.0, 1.0);
  }
  return out;
}

std::vector<Lot> make_lots(const AllocationResult& allocation, std::span<const Block> blocks,
                           std::span<const double> access, ShareAccounting accounting)
{
  if (allocation.assigned.size() != blocks.size() || access.size() != blocks.size()) {
    throw ValidationError("allocation, blocks and accessibility must align");
  }
  std::vector<Lot> lots;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (accounting == ShareAccounting::dominant) {
      lots.push_back({i, allocation.dominant[i], blocks[i].lot_area, access[i]});
      continue;
    }
    for (Use u : kAllUses) {
      const double x = allocation.assigned[i][index_of(u)];
      if (x > 0.0) lots.push_back({i, u, x, access[i]});
    }
  }
  return lots;
}

FarLine fit_far_line(std::span<const double> areas, std::span<const double> access, double b_total, double anchor)
{
  if (areas.empty() || areas.size() != access.size()) throw ValidationError("FAR fit needs matching, non-empty lots");
  double sum_area = 0.0;
  double sum_weighted = 0.0;
  double min_access = access.front();
  for (std::size_t i = 0; i < areas.size(); ++i) {
    sum_area += areas[i];
    sum_weighted += access[i] * areas[i];
    min_access = std::min(min_access, access[i]);
  }
  if (!(sum_area > 0.0)) throw ValidationError("FAR fit needs a positive total lot area");
  const double mean_access = sum_weighted / sum_area;
  const double mean_far = b_total / sum_area;
  const double gap = min_access - mean_access;

  FarLine line;
  if (std::abs(gap) > 1e-12) line.slope = std::max((anchor - mean_far) / gap, 0.0);
  line.intercept = mean_far - mean_access * line.slope;
  return line;
}

FarAssignment assign_far(std::span<const Lot> lots, const FarLine& line, const IntensityConfig& config)
{
  if (line.slope < 0.0) throw ValidationError("FAR slope must be non-negative");
  if (!(config.storey_height > 0.0)) throw ValidationError("storey height must be positive");
  FarAssignment out;
  out.far.resize(lots.size());
  out.height.resize(lots.size());
  double implied = 0.0;
  for (std::size_t i = 0; i < lots.size(); ++i) {
    out.far[i] = line.slope * lots[i].access + line.intercept;
    implied += out.far[i] * lots[i].area;
  }
  if (std::any_of(out.far.begin(), out.far.end(), [](double f) { return f < 0.0; })) {
    out.floored = true;
    double kept = 0.0;
    for (std::size_t i = 0; i < lots.size(); ++i) {
      out.far[i] = std::max(out.far[i], 0.0);
      kept += out.far[i] * lots[i].area;
    }
    const double scale = (implied > 0.0 && kept > 0.0) ? implied / kept : 0.0;
    for (double& f : out.far) f *= scale;
  }
  for (std::size_t i = 0; i < lots.size(); ++i) {
    const double fp = config.footprint_for(lots[i].use);
    if (!(fp > 0.0 && fp <= 1.0)) throw ValidationError("footprint ratio must lie in (0, 1]");
    out.height[i] = out.far[i] / fp * config.storey_height;
  }
  return out;
}

ConstructionDiagnostics construction_diagnostics(std::span<const Lot> lots, std::span<const double> far,
                                                 const UseVector& target_shares, double b_total)
{
  if (lots.size() != far.size()) throw ValidationError("FAR values must align with lots");
  ConstructionDiagnostics d;
  double total = 0.0;
  for (std::size_t i = 0; i < lots.size(); ++i) {
    const double built = far[i] * lots[i].area;
    d.built[index_of(lots[i].use)] += built;
    total += built;
  }
  if (!(total > 0.0)) throw InfeasibleError("total built floor area is zero; construction shares are undefined");
  // Rounding-level residuals count as exact zeros.
  constexpr double kRounding = 1e-9;
  for (std::size_t k = 0; k < kUseCount; ++k) {
    d.shares[k] = d.built[k] / total;
    double diff = d.shares[k] - target_shares[k];
    if (std::abs(diff) <= kRounding) diff = 0.0;
    d.d_cs += diff * diff;
  }
  double gap = b_total - total;
  if (std::abs(gap) <= kRounding * std::max(b_total, total)) gap = 0.0;
  d.d_b = gap * gap;
  return d;
}

IntensityResult compute_intensity(std::vector<Lot> lots, const IntensityConfig& config)
{
  if (!(config.b_total > 0.0)) throw ValidationError("total construction target must be positive");
  if (!(config.far_anchor > 0.0)) throw ValidationError("anchor FAR must be positive");
  for (double g : config.construction_shares) {
    if (!(g >= 0.0)) throw ValidationError("construction shares must be non-negative");
  }
  if (lots.empty()) throw InfeasibleError("no lots to assign FAR to");

  IntensityResult r;
  r.lots = std::move(lots);
  r.far.assign(r.lots.size(), 0.0);
  r.height.assign(r.lots.size(), 0.0);

  auto run = [&](const std::vector<std::size_t>& members, double target) {
    std::vector<double> areas;
    std::vector<double> access;
    std::vector<Lot> subset;
    for (std::size_t i : members) {
      areas.push_back(r.lots[i].area);
      access.push_back(r.lots[i].access);
      subset.push_back(r.lots[i]);
    }
    const FarLine line = fit_far_line(areas, access, target, config.far_anchor);
    const FarAssignment a = assign_far(subset, line, config);
    if (a.floored) r.warnings.push_back("negative FAR floored at 0 and remaining lots rescaled");
    for (std::size_t k = 0; k < members.size(); ++k) {
      r.far[members[k]] = a.far[k];
      r.height[members[k]] = a.height[k];
    }
    return line;
  };

  if (config.fit == FarFitMode::joint) {
    std::vector<std::size_t> all(r.lots.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    r.lines.push_back(run(all, config.b_total));
  } else {
    r.lines.assign(kUseCount, FarLine{});
    for (Use u : kAllUses) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < r.lots.size(); ++i) {
        if (r.lots[i].use == u) members.push_back(i);
      }
      const double target = config.construction_shares[index_of(u)] * config.b_total;
      if (members.empty()) {
        if (target > 0.0) {
          r.warnings.push_back(std::string("no lots carry use ") + use_code(u) + "; its construction target is unmet");
        }
        continue;
      }
      r.lines[index_of(u)] = run(members, target);
    }
  }
  r.diagnostics = construction_diagnostics(r.lots, r.far, config.construction_shares, config.b_total);
  return r;
}

}  // namespace accessplan
