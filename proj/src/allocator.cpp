#include "accessplan/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "accessplan/errors.hpp"

namespace accessplan {

const char* to_string(ShareAccounting a) { return a == ShareAccounting::mixed ? "mixed" : "dominant"; }

ShareAccounting parse_accounting(const std::string& text)
{
  if (text == "mixed") return ShareAccounting::mixed;
  if (text == "dominant") return ShareAccounting::dominant;
  throw ValidationError("unknown share accounting '" + text + "' (expected mixed or dominant)");
}

namespace {

void check_params(std::span<const Block> blocks, const AccessibilityTensor& tensor, const ClusterHierarchy& hierarchy,
                  const AllocationParams& p)
{
  if (blocks.empty()) throw ValidationError("allocation needs at least one block");
  if (tensor.blocks() != blocks.size()) throw ValidationError("accessibility tensor does not match the block list");
  const std::size_t tiers = tensor.tiers();
  if (tiers == 0) throw ValidationError("allocation needs at least one tier");
  if (hierarchy.tiers.size() != tiers) throw ValidationError("cluster hierarchy must cover every tier");
  if (p.level_pct.size() != tiers || p.min_parcel.size() != tiers) {
    throw ValidationError("tier weights and minimum parcels must be given per tier");
  }
  double sum = 0.0;
  for (double s : p.target_shares) {
    if (!(s >= 0.0)) throw ValidationError("target land-use shares must be non-negative");
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("target land-use shares must sum to 1");
  for (double m : p.min_parcel) {
    if (!(m >= 0.0)) throw ValidationError("minimum parcel sizes must be non-negative");
  }
  if (!(p.tau_int >= 0.0 && p.tau_int <= 1.0)) throw ValidationError("cluster integrity threshold must lie in [0, 1]");
  std::array<bool, kUseCount> seen{};
  for (Use u : p.priority) seen[index_of(u)] = true;
  if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; })) {
    throw ValidationError("priority order must be a permutation of all eight uses");
  }
}

}  // namespace

AllocationResult allocate(std::span<const Block> blocks, const AccessibilityTensor& tensor,
                          const ClusterHierarchy& hierarchy, const AllocationParams& p)
{
  check_params(blocks, tensor, hierarchy, p);
  const std::size_t n = blocks.size();
  const std::size_t tiers = tensor.tiers();

  double total = 0.0;
  for (const Block& b : blocks) total += b.lot_area;
  if (!(total > 0.0)) throw ValidationError("site has zero total lot area");
  const double eps = 1e-12 * total;

  AllocationResult r;
  r.accounting = p.accounting;
  r.priority = p.priority;
  r.assigned.assign(n, UseVector{});
  std::vector<double> remaining(n);
  for (std::size_t i = 0; i < n; ++i) remaining[i] = blocks[i].lot_area;

  UseVector carry{};
  for (std::size_t l = 0; l < tiers; ++l) {
    const bool top = l == 0;
    UseVector pool{};
    for (Use u : kAllUses) {
      const std::size_t k = index_of(u);
      if (is_good(u)) {
        pool[k] = p.target_shares[k] * total * p.level_pct[l] + carry[k];
      } else if (is_bad(u)) {
        pool[k] = (top ? p.target_shares[k] * total : 0.0) + carry[k];
      }
    }
    carry = UseVector{};

    const std::vector<std::size_t> avail = eligible_clusters(hierarchy, l, remaining, blocks, p.tau_int);
    const TierClusters& tier = hierarchy.tiers[l];
    double avail_area = 0.0;
    std::vector<double> cluster_area(tier.clusters.size(), 0.0);
    for (std::size_t c : avail) {
      for (std::size_t i : tier.clusters[c].members) cluster_area[c] += blocks[i].lot_area;
      avail_area += cluster_area[c];
    }
    if (avail.empty() || !(avail_area > 0.0)) {
      carry = pool;
      continue;
    }

    for (std::size_t c : avail) {
      const double alpha = cluster_area[c] / avail_area;
      const std::vector<std::size_t>& members = tier.clusters[c].members;
      for (Use u : p.priority) {
        if (u == Use::R) continue;
        double target = alpha * pool[index_of(u)];
        if (!(target > eps)) continue;

        const bool min_first = is_bad(u);
        auto after = [&](std::size_t a, std::size_t b) {
          const double ka = tensor.at(a, l);
          const double kb = tensor.at(b, l);
          if (ka != kb) return min_first ? ka > kb : ka < kb;
          return blocks[a].id > blocks[b].id;
        };
        std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(after)> queue(after);
        for (std::size_t i : members) {
          if (remaining[i] > eps) queue.push(i);
        }
        const double min_parcel = p.min_parcel[l];
        while (target > eps && !queue.empty()) {
          const std::size_t i = queue.top();
          queue.pop();
          double give = std::min(remaining[i], target);
          bool forced = false;
          if (remaining[i] - give < min_parcel && remaining[i] >= min_parcel && give < remaining[i]) {
            give = remaining[i];
            forced = true;
          }
          r.assigned[i][index_of(u)] += give;
          remaining[i] = give == remaining[i] ? 0.0 : remaining[i] - give;
          target -= give;
          r.grants.push_back({l, c, u, i, tensor.at(i, l), give, forced});
          if (remaining[i] > eps) queue.push(i);
        }
        if (target > eps) carry[index_of(u)] += target;
      }
    }
  }
  r.lapsed = carry;
  for (Use u : kAllUses) {
    if (carry[index_of(u)] > eps) {
      std::ostringstream msg;
      msg << "use " << use_code(u) << ": " << carry[index_of(u)]
          << " m2 of target area found no eligible land and reverted to residential";
      r.warnings.push_back(msg.str());
    }
  }

  r.dominant.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.assigned[i][index_of(Use::R)] += remaining[i];
    remaining[i] = 0.0;
    Use best = p.priority.front();
    for (Use u : p.priority) {
      if (r.assigned[i][index_of(u)] > r.assigned[i][index_of(best)]) best = u;
    }
    r.dominant[i] = best;
  }

  const ShareDiagnostics diag = achieved_shares(r, blocks, p.target_shares, p.accounting);
  r.achieved = diag.achieved;
  r.d_lu = diag.d_lu;
  return r;
}

ShareDiagnostics share_deviation(const UseVector& achieved, const UseVector& target)
{
  ShareDiagnostics d;
  d.achieved = achieved;
  double abs_sum = 0.0;
  for (std::size_t k = 0; k < kUseCount; ++k) {
    const double diff = achieved[k] - target[k];
    d.d_lu += diff * diff;
    abs_sum += std::abs(diff);
  }
  d.mae = abs_sum / static_cast<double>(kUseCount);
  d.rmse = std::sqrt(d.d_lu / static_cast<double>(kUseCount));
  return d;
}

UseVector use_areas(const AllocationResult& result, std::span<const Block> blocks, ShareAccounting accounting)
{
  UseVector areas{};
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (accounting == ShareAccounting::mixed) {
      for (std::size_t k = 0; k < kUseCount; ++k) areas[k] += result.assigned[i][k];
    } else {
      areas[index_of(result.dominant[i])] += blocks[i].lot_area;
    }
  }
  return areas;
}

ShareDiagnostics achieved_shares(const AllocationResult& result, std::span<const Block> blocks,
                                 const UseVector& target, ShareAccounting accounting)
{
  if (result.assigned.size() != blocks.size()) throw ValidationError("allocation result does not match the block list");
  double total = 0.0;
  for (const Block& b : blocks) total += b.lot_area;
  if (!(total > 0.0)) throw ValidationError("site has zero total lot area");
  UseVector shares = use_areas(result, blocks, accounting);
  for (double& s : shares) s /= total;
  return share_deviation(shares, target);
}

SplitResult split_geometry(const Ring& polygon, std::span<const double> ratios)
{
  if (ratios.empty()) throw ValidationError("split needs at least one ratio");
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ValidationError("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ValidationError("split ratios must sum to 1");

  SplitResult out;
  out.pieces.resize(ratios.size());
  constexpr double kResolution = 1e-9;
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    if (ratios[k] >= kResolution) kept.push_back(k);
  }
  if (kept.empty()) throw ValidationError("split ratios are all below numeric resolution");
  if (kept.size() < ratios.size()) {
    std::ostringstream msg;
    msg << (ratios.size() - kept.size()) << " split ratio(s) below numeric resolution merged into a neighbor strip";
    out.warnings.push_back(msg.str());
  }
  if (kept.size() == 1) {
    out.pieces[kept.front()] = polygon;
    return out;
  }

  const OrientedBox box = min_area_rect(polygon);
  const Point axis = box.major_axis;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const Point& q : polygon) {
    lo = std::min(lo, dot(axis, q));
    hi = std::max(hi, dot(axis, q));
  }
  const double area = ring_area(polygon);
  auto area_below = [&](double s) { return ring_area(clip_half_plane(polygon, axis, s)); };

  // Cut positions where the cumulative area reaches each kept ratio boundary; the merged
  // tiny ratios ride along with the following kept strip.
  std::vector<double> cuts{lo};
  double cumulative = 0.0;
  for (std::size_t j = 0; j + 1 < kept.size(); ++j) {
    for (std::size_t k = (j == 0 ? 0 : kept[j - 1] + 1); k <= kept[j]; ++k) cumulative += ratios[k];
    const double want = cumulative / sum * area;
    double a = cuts.back();
    double b = hi;
    for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
      const double m = 0.5 * (a + b);
      (area_below(m) < want ? a : b) = m;
    }
    cuts.push_back(0.5 * (a + b));
  }
  cuts.push_back(hi);
  for (std::size_t j = 0; j < kept.size(); ++j) {
    out.pieces[kept[j]] = clip_slab(polygon, axis, cuts[j], cuts[j + 1]);
  }
  return out;
}

}  // namespace accessplan
