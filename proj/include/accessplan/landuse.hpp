#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace accessplan {

/// Residential, Admin/Office, Green, Business/Retail, Industrial, Transport, Education, Food.
enum class Use : std::uint8_t { R, A, G, B, I, T, E, F };

inline constexpr std::size_t kUseCount = 8;
inline constexpr std::array<Use, kUseCount> kAllUses{Use::R, Use::A, Use::G, Use::B,
                                                     Use::I, Use::T, Use::E, Use::F};

using UseVector = std::array<double, kUseCount>;
using PriorityOrder = std::array<Use, kUseCount>;

inline constexpr std::size_t index_of(Use u) { return static_cast<std::size_t>(u); }

char use_code(Use u);
Use parse_use(const std::string& code);

/// Activity-seeking uses placed on the most accessible land.
inline constexpr bool is_good(Use u)
{
  return u == Use::A || u == Use::G || u == Use::B || u == Use::E || u == Use::F;
}

/// Uses deferred to the least accessible land at the top tier.
inline constexpr bool is_bad(Use u) { return u == Use::I || u == Use::T; }

/// Parses strings like "FBEGARIT" or a list of codes; must be a permutation of all eight uses.
PriorityOrder parse_priority(std::span<const std::string> codes);
PriorityOrder parse_priority(const std::string& compact);
std::string priority_string(const PriorityOrder& order);

UseVector parse_use_vector(const std::map<std::string, double>& by_code);

enum class Tier : std::uint8_t { city, district, life_circle, community_cluster, community };

const char* tier_name(Tier t);
Tier parse_tier(const std::string& name);

/// Camel-case label used for policy parameters, e.g. "CommunityCluster".
std::string tier_label(Tier t);

/// Rank-sum scores: city 12, district 11, life circle 10, community cluster 9, community 8.
double default_rank(Tier t);

/// Minimum leftover parcel per tier in m2.
double default_min_parcel(Tier t);

/// LevelPct(tier) = rank / sum of active ranks.
std::vector<double> level_pct(std::span<const Tier> active, const std::map<Tier, double>& rank_overrides = {});

}  // namespace accessplan
