#pragma once

// Shared fixtures and property checks for the unit and acceptance tests.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "accessplan/config.hpp"
#include "accessplan/pipeline.hpp"
#include "accessplan/synth.hpp"

namespace fixture {

using namespace accessplan;

inline Site grid_site(std::size_t n = 6)
{
  SyntheticSite g = make_synthetic_grid(n);
  return make_site(std::move(g.network), std::move(g.blocks));
}

/// Baseline policy scaled to the grid: default shares, synthetic construction target.
inline Policy grid_policy(const Site& site)
{
  Policy p = default_run_config().policy;
  p.b_total = 2.4 * site.total_lot_area;
  return p;
}

/// Policies with sampled radii, mixes, tier weights, shares and priority orders.
inline std::vector<Policy> random_policies(const Site& site, std::size_t n, std::uint64_t seed)
{
  PolicySpace space = default_policy_space(grid_policy(site));
  space.sample_shares = true;
  space.sample_priority = true;
  return sample_policies(space, n, seed);
}

/// Area conservation, empty residuals and queue ordering of one allocation. Returns the violations.
inline std::vector<std::string> allocation_violations(const Site& site, const Evaluation& ev)
{
  std::vector<std::string> out;
  const AllocationResult& a = ev.allocation;
  double assigned = 0.0;
  for (std::size_t i = 0; i < site.blocks.size(); ++i) {
    double block = 0.0;
    for (double x : a.assigned[i]) {
      if (x < 0.0) out.push_back("negative assignment");
      block += x;
    }
    // every block is fully assigned, so nothing remains
    if (std::abs(block - site.blocks[i].lot_area) > 1e-9 * site.blocks[i].lot_area) {
      std::ostringstream msg;
      msg << "block " << site.blocks[i].id << " keeps " << site.blocks[i].lot_area - block << " m2 unassigned";
      out.push_back(msg.str());
    }
    assigned += block;
  }
  if (std::abs(assigned - site.total_lot_area) > 1e-6 * site.total_lot_area) out.push_back("area not conserved");

  const std::vector<Grant>& g = a.grants;
  for (std::size_t x = 0; x < g.size(); ++x) {
    if (g[x].forced) continue;
    for (std::size_t y = x + 1; y < g.size(); ++y) {
      if (g[y].forced || g[y].tier != g[x].tier || g[y].cluster != g[x].cluster || g[y].use != g[x].use) continue;
      const bool ok = is_bad(g[x].use) ? g[x].key <= g[y].key : g[x].key >= g[y].key;
      if (!ok) {
        std::ostringstream msg;
        msg << "use " << use_code(g[x].use) << " tier " << g[x].tier << ": block " << g[x].block << " (A=" << g[x].key
            << ") served before block " << g[y].block << " (A=" << g[y].key << ")";
        out.push_back(msg.str());
      }
      if (g[x].key != ev.access.at(g[x].block, g[x].tier)) out.push_back("grant key differs from block accessibility");
    }
  }
  return out;
}

inline bool same_allocation(const AllocationResult& a, const AllocationResult& b)
{
  if (a.assigned != b.assigned || a.dominant != b.dominant || a.grants.size() != b.grants.size()) return false;
  for (std::size_t k = 0; k < a.grants.size(); ++k) {
    const Grant& x = a.grants[k];
    const Grant& y = b.grants[k];
    if (x.tier != y.tier || x.cluster != y.cluster || x.use != y.use || x.block != y.block || x.area != y.area ||
        x.forced != y.forced)
      return false;
  }
  return true;
}

}  // namespace fixture
