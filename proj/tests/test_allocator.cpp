#include <doctest.h>

#include <cmath>
#include <map>

#include "accessplan/allocator.hpp"
#include "accessplan/errors.hpp"
#include "fixtures.hpp"

using namespace accessplan;

namespace {

/// 1000 m2 strips side by side, 100 m apart.
std::vector<Block> strips(std::size_t n)
{
  std::vector<Block> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 100.0 * static_cast<double>(i);
    out.push_back(make_block(static_cast<std::int64_t>(i + 1), {{x, 0}, {x + 10, 0}, {x + 10, 100}, {x, 100}}));
  }
  return out;
}

UseVector shares(const std::map<Use, double>& by_use)
{
  UseVector s{};
  for (const auto& [u, v] : by_use) s[index_of(u)] = v;
  return s;
}

struct Setup {
  std::vector<Block> blocks;
  AccessibilityTensor tensor;
  ClusterHierarchy clusters;
  AllocationParams params;
};

Setup one_tier(std::size_t n, const std::vector<double>& access, UseVector target, double min_parcel)
{
  Setup s;
  s.blocks = strips(n);
  s.tensor = AccessibilityTensor(n, 1);
  s.tensor.set_column(0, access);
  const std::vector<double> th{1e6};
  s.clusters = build_clusters(s.blocks, s.tensor, th);
  s.params.target_shares = target;
  s.params.level_pct = {1.0};
  s.params.min_parcel = {min_parcel};
  return s;
}

double x(const AllocationResult& r, std::size_t block, Use u) { return r.assigned[block][index_of(u)]; }

}  // namespace

TEST_CASE("level weights")
{
  const std::vector<Tier> three{Tier::district, Tier::community_cluster, Tier::community};
  const auto w = level_pct(three);
  CHECK(w[1] == doctest::Approx(9.0 / 28.0));
  CHECK(w[0] + w[1] + w[2] == doctest::Approx(1.0));
  CHECK(level_pct(std::vector<Tier>{Tier::community}) == std::vector<double>{1.0});
  const std::vector<Tier> all{Tier::city, Tier::district, Tier::life_circle, Tier::community_cluster, Tier::community};
  CHECK(level_pct(all)[0] == doctest::Approx(0.24));
  const auto over = level_pct(three, {{Tier::district, 9.0}});
  CHECK(over[0] == doctest::Approx(9.0 / 26.0));
  CHECK_THROWS_AS(parse_tier("suburb"), ValidationError);
}

TEST_CASE("sub-minimum leftover takes the whole block")
{
  Setup s = one_tier(1, {1.0}, shares({{Use::B, 0.6}, {Use::R, 0.4}}), 500.0);
  const AllocationResult r = allocate(s.blocks, s.tensor, s.clusters, s.params);
  CHECK(x(r, 0, Use::B) == doctest::Approx(1000.0));
  CHECK(x(r, 0, Use::R) == 0.0);
  CHECK(r.achieved[index_of(Use::B)] == doctest::Approx(1.0));
  CHECK(r.d_lu == doctest::Approx(0.32));
  REQUIRE(r.grants.size() == 1);
  CHECK(r.grants[0].forced);
}

TEST_CASE("good uses go to the most accessible block first")
{
  Setup s = one_tier(2, {0.9, 0.1}, shares({{Use::B, 0.5}, {Use::R, 0.5}}), 500.0);
  const AllocationResult r = allocate(s.blocks, s.tensor, s.clusters, s.params);
  CHECK(x(r, 0, Use::B) == doctest::Approx(1000.0));
  CHECK(x(r, 1, Use::R) == doctest::Approx(1000.0));
  CHECK(r.d_lu == doctest::Approx(0.0));
  CHECK(r.dominant == std::vector<Use>{Use::B, Use::R});
}

TEST_CASE("bad uses go to the least accessible block at the top tier")
{
  Setup s = one_tier(2, {0.9, 0.1}, shares({{Use::I, 0.5}, {Use::R, 0.5}}), 500.0);
  const AllocationResult r = allocate(s.blocks, s.tensor, s.clusters, s.params);
  CHECK(x(r, 1, Use::I) == doctest::Approx(1000.0));
  CHECK(x(r, 0, Use::R) == doctest::Approx(1000.0));
}

TEST_CASE("below-minimum remainder gets a plain grant")
{
  // remaining 1000 < m = 2000: the guard does not fire
  Setup s = one_tier(1, {1.0}, shares({{Use::B, 0.3}, {Use::R, 0.7}}), 2000.0);
  const AllocationResult r = allocate(s.blocks, s.tensor, s.clusters, s.params);
  CHECK(x(r, 0, Use::B) == doctest::Approx(300.0));
  CHECK(x(r, 0, Use::R) == doctest::Approx(700.0));
}

TEST_CASE("integrity gate steers a finer tier to intact blocks")
{
  Setup s = one_tier(2, {0.9, 0.1}, shares({{Use::B, 0.5}, {Use::R, 0.5}}), 0.0);
  s.tensor = AccessibilityTensor(2, 2);
  s.tensor.set_column(0, std::vector<double>{0.9, 0.1});
  s.tensor.set_column(1, std::vector<double>{0.9, 0.1});
  const std::vector<double> th{1e6, 1.0};
  s.clusters = build_clusters(s.blocks, s.tensor, th);
  s.params.level_pct = {0.5, 0.5};
  s.params.min_parcel = {0.0, 0.0};
  s.params.tau_int = 1.0;
  const AllocationResult r = allocate(s.blocks, s.tensor, s.clusters, s.params);
  // block 0 takes 500 m2 of B at tier 0 and is then no longer intact
  CHECK(x(r, 0, Use::B) == doctest::Approx(500.0));
  CHECK(x(r, 1, Use::B) == doctest::Approx(500.0));
  CHECK(r.warnings.empty());
}

TEST_CASE("unplaced pool rolls down to the next tier")
{
  Setup s = one_tier(2, {0.9, 0.1}, shares({{Use::B, 0.3}, {Use::R, 0.7}}), 0.0);
  s.tensor = AccessibilityTensor(2, 3);
  for (std::size_t l = 0; l < 3; ++l) s.tensor.set_column(l, std::vector<double>{0.9, 0.1});
  const std::vector<double> th{1e6, 1e6, 1.0};
  s.clusters = build_clusters(s.blocks, s.tensor, th);
  s.params.level_pct = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  s.params.min_parcel = {900.0, 0.0, 0.0};
  s.params.tau_int = 0.6;
  const AllocationResult r = allocate(s.blocks, s.tensor, s.clusters, s.params);
  // tier 0: the min-parcel rule hands block 0 over whole; tier 1: the shared cluster is half used
  // and fails the gate; tier 2: block 1 alone is intact and takes both remaining pools
  CHECK(x(r, 0, Use::B) == doctest::Approx(1000.0));
  CHECK(x(r, 1, Use::B) == doctest::Approx(400.0));
  CHECK(x(r, 1, Use::R) == doctest::Approx(600.0));
  CHECK(r.lapsed[index_of(Use::B)] == doctest::Approx(0.0));
  REQUIRE(r.grants.size() == 2);
  CHECK(r.grants[1].tier == 2);
}

TEST_CASE("pool with nowhere to go lapses to residential with a warning")
{
  Setup s = one_tier(2, {0.9, 0.1}, shares({{Use::B, 0.5}, {Use::A, 0.5}}), 0.0);
  s.tensor = AccessibilityTensor(2, 2);
  s.tensor.set_column(0, std::vector<double>{0.9, 0.1});
  s.tensor.set_column(1, std::vector<double>{0.9, 0.1});
  const std::vector<double> th{1e6, 1e6};
  s.clusters = build_clusters(s.blocks, s.tensor, th);
  s.params.level_pct = {0.5, 0.5};
  s.params.min_parcel = {600.0, 0.0};
  s.params.tau_int = 0.0;
  const AllocationResult r = allocate(s.blocks, s.tensor, s.clusters, s.params);
  // both tier-0 grants are forced to whole blocks, leaving no land for tier 1
  CHECK(x(r, 0, Use::B) == doctest::Approx(1000.0));
  CHECK(x(r, 1, Use::A) == doctest::Approx(1000.0));
  CHECK(r.lapsed[index_of(Use::B)] == doctest::Approx(500.0));
  CHECK(r.lapsed[index_of(Use::A)] == doctest::Approx(500.0));
  CHECK(r.warnings.size() == 2);
}

TEST_CASE("invalid allocation inputs")
{
  Setup s = one_tier(1, {1.0}, shares({{Use::B, 0.6}, {Use::R, 0.5}}), 0.0);
  CHECK_THROWS_AS(allocate(s.blocks, s.tensor, s.clusters, s.params), ValidationError);
  s.params.target_shares = shares({{Use::B, -0.1}, {Use::R, 1.1}});
  CHECK_THROWS_AS(allocate(s.blocks, s.tensor, s.clusters, s.params), ValidationError);
  s.params.target_shares = shares({{Use::R, 1.0}});
  CHECK_THROWS_AS(allocate(std::vector<Block>{}, s.tensor, s.clusters, s.params), ValidationError);
}

TEST_CASE("share diagnostics")
{
  UseVector target = shares({{Use::F, 0.060}, {Use::B, 0.175}, {Use::E, 0.045}, {Use::G, 0.065},
                             {Use::A, 0.060}, {Use::R, 0.330}, {Use::I, 0.190}, {Use::T, 0.075}});
  UseVector achieved = shares({{Use::F, 0.040}, {Use::B, 0.183}, {Use::E, 0.056}, {Use::G, 0.074},
                               {Use::A, 0.069}, {Use::R, 0.376}, {Use::I, 0.134}, {Use::T, 0.068}});
  const ShareDiagnostics d = share_deviation(achieved, target);
  CHECK(d.mae == doctest::Approx(0.02).epsilon(0.05));
  CHECK(d.rmse == doctest::Approx(0.027).epsilon(0.05));
  CHECK(std::abs(d.d_lu - 5.69e-3) <= 0.15 * 5.69e-3);
  CHECK(share_deviation(target, target).d_lu == 0.0);
}

TEST_CASE("dominant accounting credits the whole block")
{
  Setup s = one_tier(2, {0.9, 0.1}, shares({{Use::B, 0.3}, {Use::R, 0.7}}), 0.0);
  const AllocationResult r = allocate(s.blocks, s.tensor, s.clusters, s.params);
  const ShareDiagnostics mixed = achieved_shares(r, s.blocks, s.params.target_shares, ShareAccounting::mixed);
  const ShareDiagnostics dom = achieved_shares(r, s.blocks, s.params.target_shares, ShareAccounting::dominant);
  CHECK(mixed.d_lu == doctest::Approx(0.0));
  // block 0 holds 0.6 of its area as B, so it counts wholly as B
  CHECK(dom.achieved[index_of(Use::B)] == doctest::Approx(0.5));
  CHECK(dom.achieved[index_of(Use::R)] == doctest::Approx(0.5));
  CHECK(dom.d_lu == doctest::Approx(2 * 0.04));
}

TEST_CASE("grid allocations conserve area and respect queue order")
{
  const Site site = fixture::grid_site();
  EvaluationSettings settings;
  settings.threads = 2;
  for (const Policy& p : fixture::random_policies(site, 20, 99)) {
    const Evaluation ev = evaluate_pipeline(site, p, settings, nullptr, Stage::allocation);
    const auto problems = fixture::allocation_violations(site, ev);
    CHECK(problems.empty());
    for (const auto& msg : problems) MESSAGE(msg);
    const Evaluation again = evaluate_pipeline(site, p, settings, nullptr, Stage::allocation);
    CHECK(fixture::same_allocation(ev.allocation, again.allocation));
  }
}

TEST_CASE("zero minimum parcels reproduce the targets exactly")
{
  const Site site = fixture::grid_site();
  Policy p = fixture::grid_policy(site);
  p.tiers = {Tier::community};
  p.radii = {350};
  p.sigma = {0.5};
  p.rho = {1.0};
  EvaluationSettings settings;
  settings.min_parcel_overrides = {{Tier::community, 0.0}};
  settings.tau_int = 0.0;
  const Evaluation ev = evaluate_pipeline(site, p, settings, nullptr, Stage::allocation);
  CHECK(ev.allocation.d_lu == 0.0);
}

TEST_CASE("split geometry")
{
  const Ring square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  const std::vector<double> whole{1.0};
  CHECK(split_geometry(square, whole).pieces[0] == square);

  const std::vector<double> halves{0.5, 0.5};
  const SplitResult h = split_geometry(square, halves);
  for (const Ring& piece : h.pieces) CHECK(ring_area(piece) == doctest::Approx(0.5).epsilon(0.005));

  const Ring ell{{0, 0}, {20, 0}, {20, 10}, {10, 10}, {10, 20}, {0, 20}};
  const std::vector<double> ratios{0.3, 0.7};
  const SplitResult l = split_geometry(ell, ratios);
  CHECK(ring_area(l.pieces[0]) / 300.0 == doctest::Approx(0.3).epsilon(0.005));
  CHECK(ring_area(l.pieces[1]) / 300.0 == doctest::Approx(0.7).epsilon(0.005));

  const std::vector<double> tiny{1e-12, 0.5, 0.5 - 1e-12};
  const SplitResult t = split_geometry(square, tiny);
  CHECK(t.warnings.size() == 1);
  CHECK(t.pieces[0].empty());
  CHECK(ring_area(t.pieces[1]) + ring_area(t.pieces[2]) == doctest::Approx(1.0));
}
