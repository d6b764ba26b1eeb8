#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "accessplan/allocator.hpp"
#include "accessplan/blockmap.hpp"
#include "accessplan/landuse.hpp"

namespace accessplan {

enum class FarFitMode {
  per_use,  // one line per use against gamma*_u * B_total
  joint,    // one line over all lots against B_total
};

const char* to_string(FarFitMode m);
FarFitMode parse_fit_mode(const std::string& text);

struct IntensityConfig {
  double b_total = 6.0e6;         // m2 of floor area
  UseVector construction_shares{};  // gamma*, sums to 1
  std::vector<double> tier_weights;  // rho, one per tier
  double far_anchor = 0.8;
  double footprint_ratio = 0.5;
  UseVector footprint_by_use{};  // per-use override; 0 falls back to footprint_ratio
  double storey_height = 3.6;    // m per floor
  FarFitMode fit = FarFitMode::per_use;

  double footprint_for(Use u) const;
};

/// A buildable piece of a block carrying a single use.
struct Lot {
  std::size_t block = 0;
  Use use = Use::R;
  double area = 0.0;    // m2
  double access = 0.0;  // weighted accessibility
};

/// Weighted accessibility per block. Weights that do not sum to 1 are renormalized (with a warning).
std::vector<double> weighted_accessibility(const AccessibilityTensor& tensor, std::span<const double> rho,
                                           std::vector<std::string>* warnings = nullptr);

/// Mixed accounting yields one lot per positive x_{i,u}; dominant accounting one lot per block.
std::vector<Lot> make_lots(const AllocationResult& allocation, std::span<const Block> blocks,
                           std::span<const double> access, ShareAccounting accounting);

struct FarLine {
  double slope = 0.0;      // alpha >= 0
  double intercept = 0.0;  // beta
};

/// Slope anchors the least accessible lot at `anchor`; intercept meets sum FAR * area = b_total.
FarLine fit_far_line(std::span<const double> areas, std::span<const double> access, double b_total, double anchor);

struct FarAssignment {
  std::vector<double> far;
  std::vector<double> height;  // m
  bool floored = false;        // negative FAR floored and the rest rescaled
};

FarAssignment assign_far(std::span<const Lot> lots, const FarLine& line, const IntensityConfig& config);

struct ConstructionDiagnostics {
  UseVector built{};   // B_hat_u, m2
  UseVector shares{};  // gamma_hat_u
  double d_b = 0.0;
  double d_cs = 0.0;
};

/// Throws InfeasibleError when nothing gets built.
ConstructionDiagnostics construction_diagnostics(std::span<const Lot> lots, std::span<const double> far,
                                                 const UseVector& target_shares, double b_total);

struct IntensityResult {
  std::vector<Lot> lots;
  std::vector<double> far;
  std::vector<double> height;
  std::vector<FarLine> lines;  // per use in per_use mode (index = use), single entry in joint mode
  ConstructionDiagnostics diagnostics;
  std::vector<std::string> warnings;
};

IntensityResult compute_intensity(std::vector<Lot> lots, const IntensityConfig& config);

}  // namespace accessplan
