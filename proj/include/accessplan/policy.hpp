#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "accessplan/intensity.hpp"
#include "accessplan/landuse.hpp"

namespace accessplan {

/// One point of the decision space.
struct Policy {
  std::vector<Tier> tiers{Tier::district, Tier::community_cluster, Tier::community};
  std::vector<double> radii{1200.0, 900.0, 350.0};  // m, coarse to fine
  std::vector<double> sigma{0.2, 0.2, 0.8};         // choice weight in the segment mix
  std::vector<double> rho{0.5, 0.25, 0.25};         // tier weights for FAR accessibility
  UseVector shares{};                               // s*
  PriorityOrder priority{Use::F, Use::B, Use::E, Use::G, Use::A, Use::R, Use::I, Use::T};
  UseVector construction_shares{};                  // gamma*
  double b_total = 6.0e6;                           // m2

  void validate() const;

  /// Named numeric inputs, e.g. DistrictRadius, ChoiceWeight0, AccTierWeight0, Share_B, BTotal.
  std::vector<std::pair<std::string, double>> parameters() const;

  /// Overrides fields from named parameters (as produced by parameters()); unknown names throw.
  void apply_parameters(std::span<const std::pair<std::string, double>> params);
};

/// Observed West Oakland shares used as the default land-use target.
UseVector default_land_use_shares();
UseVector default_construction_shares();

/// Continuous [lo, hi] or a discrete grid.
struct Range {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> grid;

  bool discrete() const { return !grid.empty(); }
  /// Maps u in [0, 1) to a value: stratum-preserving for continuous ranges, grid index otherwise.
  double map(double u) const;
};

struct PolicySpace {
  Policy baseline;
  std::vector<Range> radius;  // one per tier
  Range sigma{0.0, 1.0, {}};
  Range rho{0.0, 1.0, {}};
  bool sample_shares = false;    // normalized independent draws on the simplex
  bool sample_priority = false;  // random-key ordering

  void validate() const;
  std::size_t dimensions() const;
};

/// Default search space: radii on grids {1200,1400,1600}, {600,700,800,900}, {250,300,350,400}.
PolicySpace default_policy_space(const Policy& baseline);

/// n x dims matrix of u in [0,1); each column has exactly one value in each of the n strata.
std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t dims, std::uint64_t seed);

std::vector<Policy> sample_policies(const PolicySpace& space, std::size_t n, std::uint64_t seed);

struct RawObjectives {
  double au = 0.0;
  double d_b = 0.0;
  double d_lu = 0.0;
  double d_cs = 0.0;
  double jh_pen = 0.0;

  friend bool operator==(const RawObjectives&, const RawObjectives&) = default;
};

struct NormalizedObjectives {
  double one_minus_au = 0.0;
  double d_b = 0.0;
  double d_lu = 0.0;
  double d_cs = 0.0;
  double d_total_sum = 0.0;  // sum of the three normalized deviations
  double d_total = 0.0;      // min-max of d_total_sum
  double jh_pen = 0.0;

  friend bool operator==(const NormalizedObjectives&, const NormalizedObjectives&) = default;
};

struct ObjectiveRecord {
  std::size_t id = 0;
  bool valid = false;
  std::string error;
  std::vector<std::pair<std::string, double>> params;
  std::string priority;
  RawObjectives raw;
  NormalizedObjectives norm;

  /// (1 - AU, D_total, JH_pen), all normalized and minimized.
  std::array<double, 3> objectives() const { return {norm.one_minus_au, norm.d_total, norm.jh_pen}; }
  std::optional<double> param(const std::string& name) const;

  friend bool operator==(const ObjectiveRecord&, const ObjectiveRecord&) = default;
};

/// FAR- and area-weighted accessibility of non-industrial floor area, in [0, 1].
double accessibility_utility(std::span<const Lot> lots, std::span<const double> far);

/// (jobs / housing - r0)^2 with jobs = B + F land and housing = R land.
double jobs_housing_penalty(const UseVector& land_areas, double r0 = 1.2);

/// Min-max over valid records; fewer than two valid records normalize to zeros.
void normalize_objectives(std::span<ObjectiveRecord> records);

/// a <= b everywhere and a < b somewhere.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Indices of non-dominated points, ascending.
std::vector<std::size_t> pareto_front(std::span<const std::vector<double>> points);

/// Ids of valid non-dominated records, ascending.
std::vector<std::size_t> pareto_front(std::span<const ObjectiveRecord> records);

struct KneeCandidate {
  std::size_t id = 0;
  std::vector<double> objectives;
  double d_cs = 0.0;
  double d_lu = 0.0;
};

struct KneeResult {
  std::size_t id = 0;
  double distance = 0.0;
  std::vector<double> distances;  // per candidate, same order as the input
};

/// Closest point to the origin after min-max normalization within the front; ties prefer
/// lower D_CS, then lower D_LU, then the lower id.
KneeResult knee_point(std::span<const KneeCandidate> front);
KneeResult knee_point(std::span<const ObjectiveRecord> records, std::span<const std::size_t> front_ids);

/// Spearman rho with average ranks for ties; nullopt where a column is constant.
std::optional<double> spearman(std::span<const double> a, std::span<const double> b);

struct SpearmanMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<std::optional<double>>> rho;
};

inline const std::array<const char*, 6> kMetricNames{"one_minus_AU", "D_B", "D_LU", "D_CS", "D_total", "JH_pen"};

SpearmanMatrix rank_correlations(std::span<const ObjectiveRecord> records, std::span<const std::size_t> ids);

struct Quartiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Linear-interpolation quartiles of the values.
Quartiles quartiles(std::vector<double> values);

struct SensitivityGroup {
  double value = 0.0;
  std::size_t count = 0;
  std::array<Quartiles, 3> objectives;  // 1 - AU, D_total, JH_pen
};

struct SensitivityReport {
  std::string parameter;
  std::vector<SensitivityGroup> groups;
  std::vector<std::string> notes;  // grid values no frontier record uses
};

/// Groups the records in `ids` by the value of `parameter`; grid values present elsewhere in
/// `records` but absent from `ids` are reported in notes.
SensitivityReport sensitivity_groups(std::span<const ObjectiveRecord> records, std::span<const std::size_t> ids,
                                     const std::string& parameter);

/// Parameters taking at most `max_levels` distinct values across the records.
std::vector<std::string> discrete_parameters(std::span<const ObjectiveRecord> records, std::size_t max_levels = 12);

}  // namespace accessplan
