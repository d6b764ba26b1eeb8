#include "accessplan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "accessplan/errors.hpp"
#include "accessplan/parallel.hpp"

namespace accessplan {

Site make_site(StreetNetwork network, std::vector<Block> blocks, double snap_tolerance, double buffer)
{
  network.validate(snap_tolerance);
  Site site;
  site.graph = build_segment_graph(network, snap_tolerance);
  SegmentAssociation assoc = associate_segments(blocks, network, buffer);
  site.adjacency = std::move(assoc.adjacency);
  site.warnings = std::move(assoc.warnings);
  for (const Block& b : blocks) site.total_lot_area += b.lot_area;
  site.network = std::move(network);
  site.blocks = std::move(blocks);
  return site;
}

void EvaluationSettings::validate() const
{
  std::vector<std::string> problems;
  for (double c : cluster_thresholds) {
    if (!(c > 0.0) || !std::isfinite(c)) problems.push_back("cluster thresholds must be positive and finite");
  }
  for (const auto& [tier, rank] : rank_overrides) {
    if (!(rank > 0.0)) problems.push_back(std::string("rank of tier ") + tier_name(tier) + " must be positive");
  }
  for (const auto& [tier, m] : min_parcel_overrides) {
    if (!(m >= 0.0)) problems.push_back(std::string("minimum parcel of tier ") + tier_name(tier) + " must be non-negative");
  }
  if (!(tau_int >= 0.0 && tau_int <= 1.0)) problems.push_back("cluster integrity threshold must lie in [0, 1]");
  if (!(far_anchor > 0.0)) problems.push_back("anchor FAR must be positive");
  if (!(footprint_ratio > 0.0 && footprint_ratio <= 1.0)) problems.push_back("footprint ratio must lie in (0, 1]");
  for (double f : footprint_by_use) {
    if (!(f >= 0.0 && f <= 1.0)) problems.push_back("per-use footprint ratios must lie in [0, 1]");
  }
  if (!(storey_height > 0.0)) problems.push_back("storey height must be positive");
  if (!(r0 >= 0.0) || !std::isfinite(r0)) problems.push_back("jobs-housing target ratio must be non-negative");
  if (!problems.empty()) throw ValidationError("invalid evaluation settings", problems);
}

std::pair<CentralityField, CentralityField> CentralityCache::get(const SegmentGraph& graph, double radius,
                                                                 CentralityRequest request, unsigned threads)
{
  const Key key{radius, request.choice_cost, request.integration_cost};
  std::promise<std::pair<CentralityField, CentralityField>> promise;
  std::shared_future<std::pair<CentralityField, CentralityField>> future;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      future = promise.get_future().share();
      entries_.emplace(key, future);
      owner = true;
    } else {
      future = it->second;
    }
  }
  if (owner) {
    try {
      promise.set_value(compute_choice_integration(graph, radius, request, threads));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return future.get();
}

Evaluation evaluate_pipeline(const Site& site, const Policy& policy, const EvaluationSettings& settings,
                             CentralityCache* cache, Stage until)
{
  policy.validate();
  settings.validate();
  if (site.blocks.empty()) throw ValidationError("site has no blocks");
  if (!(site.total_lot_area > 0.0)) throw InfeasibleError("site has zero total lot area");
  const std::size_t tiers = policy.tiers.size();

  Evaluation ev;
  ev.policy = policy;
  for (std::size_t l = 0; l < tiers; ++l) {
    auto fields = cache != nullptr
                      ? cache->get(site.graph, policy.radii[l], settings.centrality, settings.threads)
                      : compute_choice_integration(site.graph, policy.radii[l], settings.centrality, settings.threads);
    ev.segment_scores.push_back(mix_scores(fields.first, fields.second, policy.sigma[l]));
    ev.centrality.push_back(std::move(fields));
  }
  ev.access = normalize_per_tier(block_accessibility(ev.segment_scores, site.adjacency, settings.aggregation));
  ev.weighted_access = weighted_accessibility(ev.access, policy.rho, &ev.warnings);
  if (until == Stage::access) return ev;

  std::vector<double> thresholds = settings.cluster_thresholds.empty() ? policy.radii : settings.cluster_thresholds;
  if (thresholds.size() != tiers) throw ValidationError("one cluster threshold per tier is required");
  ev.clusters = build_clusters(site.blocks, ev.access, thresholds);
  if (until == Stage::clusters) return ev;

  AllocationParams ap;
  ap.target_shares = policy.shares;
  ap.priority = policy.priority;
  ap.level_pct = level_pct(policy.tiers, settings.rank_overrides);
  for (Tier t : policy.tiers) {
    auto it = settings.min_parcel_overrides.find(t);
    ap.min_parcel.push_back(it != settings.min_parcel_overrides.end() ? it->second : default_min_parcel(t));
  }
  ap.tau_int = settings.tau_int;
  ap.accounting = settings.accounting;
  ev.allocation = allocate(site.blocks, ev.access, ev.clusters, ap);
  ev.land_areas = use_areas(ev.allocation, site.blocks, settings.accounting);
  ev.warnings.insert(ev.warnings.end(), ev.allocation.warnings.begin(), ev.allocation.warnings.end());
  if (until == Stage::allocation) return ev;

  IntensityConfig ic;
  ic.b_total = policy.b_total;
  ic.construction_shares = policy.construction_shares;
  ic.tier_weights = policy.rho;
  ic.far_anchor = settings.far_anchor;
  ic.footprint_ratio = settings.footprint_ratio;
  ic.footprint_by_use = settings.footprint_by_use;
  ic.storey_height = settings.storey_height;
  ic.fit = settings.fit;
  ev.intensity = compute_intensity(make_lots(ev.allocation, site.blocks, ev.weighted_access, settings.accounting), ic);
  ev.warnings.insert(ev.warnings.end(), ev.intensity.warnings.begin(), ev.intensity.warnings.end());
  if (until == Stage::intensity) return ev;

  ev.raw.au = accessibility_utility(ev.intensity.lots, ev.intensity.far);
  ev.raw.d_b = ev.intensity.diagnostics.d_b;
  ev.raw.d_lu = ev.allocation.d_lu;
  ev.raw.d_cs = ev.intensity.diagnostics.d_cs;
  ev.raw.jh_pen = jobs_housing_penalty(ev.land_areas, settings.r0);
  for (double v : {ev.raw.au, ev.raw.d_b, ev.raw.d_lu, ev.raw.d_cs, ev.raw.jh_pen}) {
    if (!std::isfinite(v)) throw InfeasibleError("objective evaluated to a non-finite value");
  }
  return ev;
}

ObjectiveRecord evaluate_policy(const Site& site, const Policy& policy, const EvaluationSettings& settings,
                                std::size_t id, CentralityCache* cache)
{
  ObjectiveRecord rec;
  rec.id = id;
  rec.params = policy.parameters();
  rec.priority = priority_string(policy.priority);
  try {
    rec.raw = evaluate_pipeline(site, policy, settings, cache).raw;
    rec.valid = true;
  } catch (const std::exception& e) {
    rec.valid = false;
    rec.error = e.what();
    std::replace(rec.error.begin(), rec.error.end(), '\n', ' ');
    std::replace(rec.error.begin(), rec.error.end(), '\r', ' ');
    rec.raw = RawObjectives{};
  }
  return rec;
}

std::vector<ObjectiveRecord> evaluate_batch(const Site& site, std::span<const Policy> policies,
                                            const EvaluationSettings& settings)
{
  std::vector<ObjectiveRecord> records(policies.size());
  CentralityCache cache;
  EvaluationSettings inner = settings;
  inner.threads = 1;
  parallel_for(policies.size(), settings.threads,
               [&](std::size_t i) { records[i] = evaluate_policy(site, policies[i], inner, i, &cache); });
  normalize_objectives(records);
  return records;
}

}  // namespace accessplan
