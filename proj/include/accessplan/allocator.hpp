#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "accessplan/basins.hpp"
#include "accessplan/blockmap.hpp"
#include "accessplan/landuse.hpp"

namespace accessplan {

enum class ShareAccounting {
  mixed,     // achieved shares from assigned areas x_{i,u}
  dominant,  // whole lot area credited to the block's dominant use
};

const char* to_string(ShareAccounting a);
ShareAccounting parse_accounting(const std::string& text);

struct AllocationParams {
  UseVector target_shares{};  // s*, sums to 1
  PriorityOrder priority{Use::F, Use::B, Use::E, Use::G, Use::A, Use::R, Use::I, Use::T};
  std::vector<double> level_pct;   // one per tier, coarse to fine
  std::vector<double> min_parcel;  // m_l per tier, m2
  double tau_int = 0.6;
  ShareAccounting accounting = ShareAccounting::mixed;
};

/// One pop from a use's priority queue.
struct Grant {
  std::size_t tier = 0;
  std::size_t cluster = 0;
  Use use = Use::R;
  std::size_t block = 0;
  double key = 0.0;    // A_{i,tier}
  double area = 0.0;   // m2 granted
  bool forced = false; // raised to the whole remainder by the min-parcel rule
};

struct AllocationResult {
  std::vector<UseVector> assigned;  // x_{i,u}, m2
  std::vector<Use> dominant;        // u(i)
  UseVector achieved{};             // shares under `accounting`
  double d_lu = 0.0;
  ShareAccounting accounting = ShareAccounting::mixed;
  PriorityOrder priority{};
  std::vector<Grant> grants;
  UseVector lapsed{};  // target area no eligible cluster could take after the finest tier
  std::vector<std::string> warnings;
};

/// Greedy, tier-by-tier, priority-queue land-use assignment. Pools that eligible clusters cannot
/// absorb roll down to the next finer tier; whatever is left after the finest tier becomes residential.
AllocationResult allocate(std::span<const Block> blocks, const AccessibilityTensor& tensor,
                          const ClusterHierarchy& hierarchy, const AllocationParams& params);

struct ShareDiagnostics {
  UseVector achieved{};
  double d_lu = 0.0;  // sum of squared deviations
  double mae = 0.0;
  double rmse = 0.0;
};

ShareDiagnostics share_deviation(const UseVector& achieved, const UseVector& target);

ShareDiagnostics achieved_shares(const AllocationResult& result, std::span<const Block> blocks,
                                 const UseVector& target, ShareAccounting accounting);

/// Area per use summed over blocks, under the given accounting.
UseVector use_areas(const AllocationResult& result, std::span<const Block> blocks, ShareAccounting accounting);

struct SplitResult {
  std::vector<Ring> pieces;  // one per ratio; empty where a negligible ratio was merged
  std::vector<std::string> warnings;
};

/// Strip sweep along the major axis of the minimum-area rectangle; strip k gets ratios[k] of the area.
SplitResult split_geometry(const Ring& polygon, std::span<const double> ratios);

}  // namespace accessplan
