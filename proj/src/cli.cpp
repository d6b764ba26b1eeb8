#include "accessplan/cli.hpp"

#include <csignal>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "accessplan/errors.hpp"
#include "accessplan/geojson.hpp"
#include "accessplan/manifest.hpp"
#include "accessplan/records_io.hpp"
#include "accessplan/service.hpp"
#include "accessplan/synth.hpp"

namespace accessplan {

using nlohmann::json;
namespace fs = std::filesystem;

double synthetic_b_total(double total_lot_area) { return 2.4 * total_lot_area; }

SiteContext load_context(const std::optional<fs::path>& config_path)
{
  SiteContext ctx;
  ctx.config = config_path ? load_config(*config_path) : default_run_config();
  if (config_path) ctx.inputs[config_path->string()] = file_sha256(*config_path);
  if (ctx.config.has_site_files()) {
    ctx.inputs[ctx.config.network.string()] = file_sha256(ctx.config.network);
    ctx.inputs[ctx.config.blocks.string()] = file_sha256(ctx.config.blocks);
    ctx.site = make_site(load_network(ctx.config.network), load_blocks(ctx.config.blocks), ctx.config.snap_tolerance,
                         ctx.config.buffer);
  } else {
    SyntheticSite grid = make_synthetic_grid(6);
    ctx.site = make_site(std::move(grid.network), std::move(grid.blocks), ctx.config.snap_tolerance, ctx.config.buffer);
    ctx.synthetic = true;
    if (!config_path) {
      ctx.config.policy.b_total = synthetic_b_total(ctx.site.total_lot_area);
      ctx.config.space.baseline = ctx.config.policy;
    }
  }
  return ctx;
}

namespace {

struct Options {
  std::optional<fs::path> config;
  fs::path out = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t n = 0;
  double block_size = 100.0;
  unsigned threads = 0;
  fs::path records;
  std::vector<std::string> params;
  int port = 8787;
  std::string host = "127.0.0.1";
  fs::path runs = "runs";
};

RunManifest start_manifest(const std::string& command, const SiteContext* ctx)
{
  RunManifest m;
  m.command = command;
  m.started = utc_timestamp();
  if (ctx != nullptr) {
    m.config_hash = config_hash(ctx->config);
    m.inputs = ctx->inputs;
    m.details["synthetic_site"] = ctx->synthetic;
  }
  return m;
}

void write_access_outputs(const fs::path& dir, const SiteContext& ctx, const Evaluation& ev)
{
  write_json(dir / "segments.geojson", network_geojson(ctx.site.network, ev.segment_scores));
  write_segments_csv(dir / "segments.csv", ctx.site.network, ev.centrality);
}

void write_block_layers(const fs::path& dir, const SiteContext& ctx, const Evaluation& ev, Stage stage)
{
  BlockLayers layers;
  layers.access = &ev.access;
  if (stage >= Stage::clusters) layers.clusters = &ev.clusters;
  if (stage >= Stage::allocation) layers.allocation = &ev.allocation;
  if (stage >= Stage::intensity) layers.intensity = &ev.intensity;
  write_json(dir / "blocks.geojson", blocks_geojson(ctx.site.blocks, layers));
}

void write_stage_outputs(const fs::path& dir, const SiteContext& ctx, const Evaluation& ev, Stage stage)
{
  fs::create_directories(dir);
  write_access_outputs(dir, ctx, ev);
  write_block_layers(dir, ctx, ev, stage);
  if (stage >= Stage::clusters) write_clusters_csv(dir / "clusters.csv", ctx.site.blocks, ev.clusters);
  if (stage >= Stage::allocation) {
    write_shares_csv(dir / "shares.csv", ev.policy.shares,
                     share_deviation(ev.allocation.achieved, ev.policy.shares));
  }
  if (stage >= Stage::intensity) {
    write_lots_csv(dir / "lots.csv", ctx.site.blocks, ev.intensity);
    write_construction_csv(dir / "construction.csv", ev.policy.construction_shares, ev.intensity.diagnostics);
  }
  if (stage >= Stage::objectives) write_json(dir / "evaluation.json", evaluation_json(ctx.site, ev, ctx.config.settings, false));
}

int cmd_synth(const Options& o, std::ostream& out)
{
  const std::size_t n = o.n == 0 ? 6 : o.n;
  SyntheticSite grid = make_synthetic_grid(n, o.block_size);
  fs::create_directories(o.out);
  write_json(o.out / "network.geojson", network_geojson(grid.network));
  write_json(o.out / "blocks.geojson", blocks_geojson(grid.blocks));
  double area = 0.0;
  for (const Block& b : grid.blocks) area += b.lot_area;
  RunConfig cfg = default_run_config();
  cfg.network = "network.geojson";
  cfg.blocks = "blocks.geojson";
  cfg.policy.b_total = synthetic_b_total(area);
  cfg.space.baseline = cfg.policy;
  write_json(o.out / "config.json", to_json(cfg));
  RunManifest m = start_manifest("synth", nullptr);
  m.config_hash = config_hash(cfg);
  m.details = {{"n", n}, {"block_size", o.block_size}, {"blocks", grid.blocks.size()},
               {"segments", grid.network.segments.size()}};
  write_manifest(o.out, m);
  out << "wrote " << grid.network.segments.size() << " segments and " << grid.blocks.size() << " blocks to "
      << o.out.string() << "\n";
  return 0;
}

int cmd_stage(const std::string& command, Stage stage, const Options& o, std::ostream& out)
{
  SiteContext ctx = load_context(o.config);
  if (o.threads != 0) ctx.config.settings.threads = o.threads;
  RunManifest m = start_manifest(command, &ctx);
  const Evaluation ev = evaluate_pipeline(ctx.site, ctx.config.policy, ctx.config.settings, nullptr, stage);
  write_stage_outputs(o.out, ctx, ev, stage);
  m.details["warnings"] = ev.warnings;
  write_manifest(o.out, m);
  if (stage == Stage::objectives) {
    out << "AU=" << format_double(ev.raw.au) << " D_B=" << format_double(ev.raw.d_b)
        << " D_LU=" << format_double(ev.raw.d_lu) << " D_CS=" << format_double(ev.raw.d_cs)
        << " JH_pen=" << format_double(ev.raw.jh_pen) << "\n";
  } else if (stage >= Stage::allocation) {
    out << "D_LU=" << format_double(ev.allocation.d_lu) << "\n";
  }
  for (const std::string& w : ev.warnings) out << "warning: " << w << "\n";
  out << "outputs written to " << o.out.string() << "\n";
  return 0;
}

int cmd_sample(const Options& o, std::ostream& out)
{
  SiteContext ctx = load_context(o.config);
  if (o.threads != 0) ctx.config.settings.threads = o.threads;
  const std::size_t n = o.n != 0 ? o.n : ctx.config.sampling.n;
  const std::uint64_t seed = o.seed_set ? o.seed : ctx.config.sampling.seed;
  RunManifest m = start_manifest("sample", &ctx);
  const std::vector<Policy> policies = sample_policies(ctx.config.space, n, seed);
  const std::vector<ObjectiveRecord> records = evaluate_batch(ctx.site, policies, ctx.config.settings);
  fs::create_directories(o.out);
  write_records_csv(o.out / "records.csv", records);
  const auto valid = std::count_if(records.begin(), records.end(), [](const ObjectiveRecord& r) { return r.valid; });
  m.details = {{"n", n}, {"seed", seed}, {"valid", valid}, {"synthetic_site", ctx.synthetic}};
  write_manifest(o.out, m);
  out << valid << " of " << n << " policies valid; records written to " << (o.out / "records.csv").string() << "\n";
  return 0;
}

fs::path records_path(const Options& o) { return o.records.empty() ? o.out / "records.csv" : o.records; }

int cmd_pareto(const Options& o, std::ostream& out)
{
  const fs::path path = records_path(o);
  const std::vector<ObjectiveRecord> records = read_records_csv(path);
  const std::vector<std::size_t> front = pareto_front(records);
  if (front.empty()) throw InfeasibleError("no valid records to build a frontier from");
  const KneeResult knee = knee_point(records, front);
  fs::create_directories(o.out);
  write_pareto_csv(o.out / "pareto.csv", records, front, knee);

  const ObjectiveRecord* knee_record = nullptr;
  for (const ObjectiveRecord& r : records) {
    if (r.id == knee.id) knee_record = &r;
  }
  json doc{{"id", knee.id},
           {"utopia_distance", knee.distance},
           {"frontier_size", front.size()},
           {"records", path.string()},
           {"record", record_json(*knee_record)},
           {"outputs", json::array()}};

  RunManifest m;
  m.command = "pareto";
  m.started = utc_timestamp();
  m.inputs[path.string()] = file_sha256(path);
  if (o.config) {
    SiteContext ctx = load_context(o.config);
    m.config_hash = config_hash(ctx.config);
    m.inputs.insert(ctx.inputs.begin(), ctx.inputs.end());
    Policy policy = ctx.config.policy;
    policy.apply_parameters(knee_record->params);
    policy.priority = parse_priority(knee_record->priority);
    const Evaluation ev = evaluate_pipeline(ctx.site, policy, ctx.config.settings);
    write_stage_outputs(o.out / "knee", ctx, ev, Stage::objectives);
    for (const char* f : {"blocks.geojson", "segments.geojson", "lots.csv", "shares.csv", "construction.csv",
                          "clusters.csv", "evaluation.json"}) {
      doc["outputs"].push_back((fs::path("knee") / f).generic_string());
    }
  }
  write_json(o.out / "knee.json", doc);
  write_manifest(o.out, m);
  out << "frontier: " << front.size() << " of " << records.size() << " records; knee id " << knee.id
      << " (utopia distance " << format_double(knee.distance) << ")\n";
  return 0;
}

int cmd_report(const Options& o, std::ostream& out)
{
  const fs::path path = records_path(o);
  const std::vector<ObjectiveRecord> records = read_records_csv(path);
  const std::vector<std::size_t> front = pareto_front(records);
  if (front.empty()) throw InfeasibleError("no valid records to report on");
  std::vector<std::size_t> all;
  for (const ObjectiveRecord& r : records) {
    if (r.valid) all.push_back(r.id);
  }
  fs::create_directories(o.out);
  json notes = json::array();
  std::vector<std::string> params = o.params.empty() ? discrete_parameters(records) : o.params;
  json sensitivity = json::array();
  for (const std::string& p : params) {
    const SensitivityReport report = sensitivity_groups(records, front, p);
    const std::string file = "sensitivity_" + p + ".csv";
    write_sensitivity_csv(o.out / file, report);
    sensitivity.push_back(file);
    for (const std::string& n : report.notes) notes.push_back(n);
  }
  json spearman = json::object();
  auto correlate = [&](const std::string& scope, const std::vector<std::size_t>& ids) {
    if (ids.size() < 3) {
      notes.push_back("spearman_" + scope + " skipped: fewer than three records");
      return;
    }
    write_spearman_csv(o.out / ("spearman_" + scope + ".csv"), rank_correlations(records, ids));
    spearman[scope] = "spearman_" + scope + ".csv";
  };
  correlate("all", all);
  correlate("frontier", front);

  auto medians = [&](const std::vector<std::size_t>& ids) {
    std::array<std::vector<double>, 3> cols;
    for (const ObjectiveRecord& r : records) {
      if (!r.valid || std::find(ids.begin(), ids.end(), r.id) == ids.end()) continue;
      const auto ob = r.objectives();
      for (std::size_t k = 0; k < 3; ++k) cols[k].push_back(ob[k]);
    }
    return json{{"one_minus_AU", quartiles(cols[0]).median},
                {"D_total", quartiles(cols[1]).median},
                {"JH_pen", quartiles(cols[2]).median}};
  };
  json doc{{"records", path.string()},
           {"valid_records", all.size()},
           {"frontier_size", front.size()},
           {"median_all", medians(all)},
           {"median_frontier", medians(front)},
           {"sensitivity", sensitivity},
           {"spearman", spearman},
           {"notes", notes}};
  write_json(o.out / "report.json", doc);
  RunManifest m;
  m.command = "report";
  m.started = utc_timestamp();
  m.inputs[path.string()] = file_sha256(path);
  write_manifest(o.out, m);
  for (const auto& n : notes) out << "note: " << n.get<std::string>() << "\n";
  out << "report written to " << o.out.string() << "\n";
  return 0;
}

Service* g_service = nullptr;

void on_signal(int)
{
  if (g_service != nullptr) g_service->stop();
}

int cmd_serve(const Options& o, std::ostream& out)
{
  SiteContext ctx = load_context(o.config);
  auto site = std::make_shared<const Site>(std::move(ctx.site));
  Service service(site, ctx.config, o.runs);
  g_service = &service;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  out << "serving site " << service.site_id() << " on http://" << o.host << ":" << o.port << "\n" << std::flush;
  service.listen(o.host, o.port);
  g_service = nullptr;
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Accessibility-driven land-use and FAR planning toolkit", "accessplan"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  Options o;

  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", o.config, "Run configuration (JSON)"); };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Output directory"); };
  auto add_threads = [&](CLI::App* sub) { sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)"); };

  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic n x n street grid with its blocks and a config");
  synth->add_option("--n", o.n, "Intersections per side (>= 2)")->default_str("6");
  synth->add_option("--block-size", o.block_size, "Block edge length in metres")->default_str("100");
  add_out(synth);

  struct StageCommand {
    const char* name;
    const char* help;
    Stage stage;
  };
  const StageCommand stages[] = {
      {"access", "Segment scores and block accessibility per tier", Stage::access},
      {"cluster", "Service-basin clusters per tier", Stage::clusters},
      {"allocate", "Land-use allocation and share diagnostics", Stage::allocation},
      {"far", "FAR and building heights per lot", Stage::intensity},
      {"evaluate", "Full pipeline and objectives for the configured policy", Stage::objectives},
  };
  std::vector<std::pair<CLI::App*, StageCommand>> stage_apps;
  for (const StageCommand& s : stages) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_config(sub);
    add_out(sub);
    add_threads(sub);
    stage_apps.emplace_back(sub, s);
  }

  CLI::App* sample = app.add_subcommand("sample", "Latin hypercube policy batch -> records.csv");
  add_config(sample);
  add_out(sample);
  add_threads(sample);
  sample->add_option("--n", o.n, "Number of policies (default: config sampling.n)");
  sample->add_option("--seed", o.seed, "Sampling seed (default: config sampling.seed)")->each([&](const std::string&) {
    o.seed_set = true;
  });

  CLI::App* pareto = app.add_subcommand("pareto", "Pareto frontier and knee from records.csv");
  pareto->add_option("--records", o.records, "records.csv (default: <out>/records.csv)");
  add_config(pareto);
  add_out(pareto);

  CLI::App* report = app.add_subcommand("report", "Sensitivity groups and Spearman matrices from records.csv");
  report->add_option("--records", o.records, "records.csv (default: <out>/records.csv)");
  report->add_option("--param", o.params, "Parameter to group by (repeatable; default: all discrete ones)");
  add_out(report);

  CLI::App* serve = app.add_subcommand("serve", "JSON-over-HTTP API for the planner UI");
  add_config(serve);
  serve->add_option("--port", o.port, "Port")->default_str("8787");
  serve->add_option("--host", o.host, "Bind address")->default_str("127.0.0.1");
  serve->add_option("--runs", o.runs, "Directory holding run output directories")->default_str("runs");

  std::vector<std::string> argv_store{"accessplan"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(o, out);
    for (const auto& [sub, s] : stage_apps) {
      if (sub->parsed()) return cmd_stage(s.name, s.stage, o, out);
    }
    if (sample->parsed()) return cmd_sample(o, out);
    if (pareto->parsed()) return cmd_pareto(o, out);
    if (report->parsed()) return cmd_report(o, out);
    if (serve->parsed()) return cmd_serve(o, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    for (const std::string& d : e.details()) err << "  - " << d << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

int run_cli(int argc, char** argv)
{
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace accessplan
