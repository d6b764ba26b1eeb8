#include <doctest.h>

#include <filesystem>
#include <thread>
#include <unistd.h>

#include <httplib.h>

#include "accessplan/cli.hpp"
#include "accessplan/manifest.hpp"
#include "accessplan/records_io.hpp"
#include "accessplan/service.hpp"
#include "fixtures.hpp"

using namespace accessplan;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct World {
  std::shared_ptr<const Site> site;
  RunConfig config;
  fs::path runs;
};

/// Built-in grid plus one run directory "r1" whose knee has DistrictRadius 1200.
const World& world()
{
  static const World w = [] {
    World out;
    SiteContext ctx = load_context(std::nullopt);
    out.config = ctx.config;
    out.site = std::make_shared<const Site>(std::move(ctx.site));
    out.runs = fs::temp_directory_path() / "accessplan_service_runs";
    fs::remove_all(out.runs);
    fs::create_directories(out.runs / "r1");
    fs::create_directories(out.runs / "empty");

    std::vector<ObjectiveRecord> rs;
    const double district[] = {1200, 1400, 1600, 1400};
    const double objectives[][3] = {{0.1, 0.1, 0.1}, {0.0, 1.0, 0.5}, {1.0, 0.0, 0.5}, {0.5, 0.5, 1.0}};
    for (std::size_t i = 0; i < 4; ++i) {
      ObjectiveRecord r;
      r.id = i;
      r.valid = true;
      Policy p = out.config.policy;
      p.radii[0] = district[i];
      r.params = p.parameters();
      r.priority = priority_string(p.priority);
      r.raw = {1.0 - objectives[i][0], 0, 0, 0, objectives[i][2]};
      r.norm.one_minus_au = objectives[i][0];
      r.norm.d_total = objectives[i][1];
      r.norm.jh_pen = objectives[i][2];
      rs.push_back(r);
    }
    write_records_csv(out.runs / "r1" / "records.csv", rs);
    RunManifest m;
    m.command = "sample";
    m.started = utc_timestamp();
    write_manifest(out.runs / "r1", m);
    RunManifest e;
    e.command = "synth";
    write_manifest(out.runs / "empty", e);
    return out;
  }();
  return w;
}

const Service& service()
{
  static const Service s(world().site, world().config, world().runs);
  return s;
}

json body_of(const HttpResponse& r) { return json::parse(r.body); }

}  // namespace

TEST_CASE("site snapshot")
{
  const HttpResponse r = service().handle("GET", "/site", "");
  REQUIRE(r.status == 200);
  const json site = body_of(r);
  CHECK(site["site_id"] == service().site_id());
  CHECK(site["blocks"]["features"].size() == 25);
  CHECK(site["segments"]["features"].size() == 60);
  CHECK(site["tiers"].size() == 3);
  CHECK(site["tiers"][0]["radius"] == 1200.0);
  CHECK(site["blocks"]["features"][0]["properties"].contains("A_t0"));
}

TEST_CASE("routing errors")
{
  CHECK(service().handle("GET", "/nowhere", "").status == 404);
  CHECK(service().handle("POST", "/site", "").status == 405);
  CHECK(service().handle("GET", "/evaluate", "").status == 405);
  CHECK(service().handle("DELETE", "/runs", "").status == 405);
  CHECK(service().handle("OPTIONS", "/evaluate", "").status == 204);

  const Service none(nullptr, world().config, {});
  CHECK(none.handle("GET", "/site", "").status == 409);
  CHECK(none.handle("POST", "/evaluate", "{}").status == 409);
  CHECK(body_of(none.handle("GET", "/runs", ""))["runs"].empty());
}

TEST_CASE("evaluate the baseline and edited policies")
{
  const HttpResponse r = service().handle("POST", "/evaluate", "{}");
  REQUIRE(r.status == 200);
  const json ev = body_of(r);
  CHECK(ev["site_id"] == service().site_id());
  CHECK(ev["policy"]["radii"] == json({1200.0, 900.0, 350.0}));
  CHECK(ev["record"]["valid"] == true);
  CHECK(ev["record"]["objectives"].contains("JH_pen"));
  CHECK(ev["shares"]["achieved"].size() == 8);
  CHECK(ev["blocks"]["features"].size() == 25);
  CHECK(ev["blocks"]["features"][0]["properties"].contains("far"));

  const json edited = body_of(service().handle("POST", "/evaluate", R"({"params": {"DistrictRadius": 1600}})"));
  CHECK(edited["policy"]["radii"][0] == 1600.0);
  CHECK(edited["record"]["params"]["DistrictRadius"] == 1600.0);
}

TEST_CASE("evaluate rejects bad requests")
{
  CHECK(service().handle("POST", "/evaluate", "{not json").status == 400);
  const HttpResponse radii = service().handle("POST", "/evaluate", R"({"radii": [300, 900, 1200]})");
  CHECK(radii.status == 400);
  CHECK(body_of(radii).contains("error"));
  CHECK(service().handle("POST", "/evaluate", R"({"params": {"Bogus": 1}})").status == 400);
  CHECK(service().handle("POST", "/evaluate", R"({"colour": "red"})").status == 400);

  const HttpResponse infeasible =
      service().handle("POST", "/evaluate", R"({"shares": {"B": 0.5, "R": 0.5}, "construction_shares": {"E": 1}})");
  CHECK(infeasible.status == 422);
  const json doc = body_of(infeasible);
  CHECK(doc["record"]["valid"] == false);
  CHECK_FALSE(doc["error"].get<std::string>().empty());
}

TEST_CASE("runs listing and run endpoints")
{
  const json runs = body_of(service().handle("GET", "/runs", ""));
  REQUIRE(runs["runs"].size() == 2);
  CHECK(runs["runs"][1]["id"] == "r1");
  CHECK(runs["runs"][1]["command"] == "sample");

  CHECK(body_of(service().handle("GET", "/runs/r1", ""))["command"] == "sample");
  CHECK(service().handle("GET", "/runs/nope", "").status == 404);
  CHECK(service().handle("GET", "/runs/../r1", "").status == 404);
  CHECK(service().handle("GET", "/runs/empty/records", "").status == 404);

  const json records = body_of(service().handle("GET", "/runs/r1/records", ""));
  CHECK(records["records"].size() == 4);

  const json pareto = body_of(service().handle("GET", "/runs/r1/pareto", ""));
  CHECK(pareto["front"].size() == 3);
  CHECK(pareto["knee_id"] == 0);

  const json sens = body_of(service().handle("GET", "/runs/r1/sensitivity/DistrictRadius", ""));
  CHECK(sens["groups"].size() == 3);
  CHECK(sens["notes"].empty());
  CHECK(service().handle("GET", "/runs/r1/sensitivity/Bogus", "").status == 404);
}

TEST_CASE("the knee policy evaluates with its own parameters")
{
  const json knee = body_of(service().handle("GET", "/runs/r1/knee", ""))["knee"];
  CHECK(knee["params"]["DistrictRadius"] == 1200.0);
  const json request{{"params", knee["params"]}, {"priority", knee["priority"]}};
  const HttpResponse r = service().handle("POST", "/evaluate", request.dump());
  REQUIRE(r.status == 200);
  CHECK(body_of(r)["record"]["params"]["DistrictRadius"] == 1200.0);
  CHECK(body_of(r)["policy"]["radii"][0] == 1200.0);
}

TEST_CASE("responses depend only on the request")
{
  const std::string req = R"({"params": {"CommunityRadius": 300, "ChoiceWeight2": 0.4}})";
  const std::string first = service().handle("POST", "/evaluate", req).body;
  std::vector<std::string> bodies(6);
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < bodies.size(); ++k) {
    pool.emplace_back([&, k] {
      bodies[k] = service().handle(k % 2 == 0 ? "POST" : "GET", k % 2 == 0 ? "/evaluate" : "/site", k % 2 == 0 ? req : "")
                      .body;
    });
  }
  for (auto& t : pool) t.join();
  const std::string site = service().handle("GET", "/site", "").body;
  for (std::size_t k = 0; k < bodies.size(); ++k) CHECK(bodies[k] == (k % 2 == 0 ? first : site));
}

TEST_CASE("HTTP round trip")
{
  Service s(world().site, world().config, world().runs);
  const int port = 20000 + static_cast<int>(getpid() % 20000);
  std::thread server([&] { s.listen("127.0.0.1", port); });
  s.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  const auto site = client.Get("/site");
  REQUIRE(site);
  CHECK(site->status == 200);
  CHECK(site->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(json::parse(site->body)["site_id"] == s.site_id());
  const auto ev = client.Post("/evaluate", R"({"params": {"DistrictRadius": 1400}})", "application/json");
  REQUIRE(ev);
  CHECK(ev->status == 200);
  CHECK(json::parse(ev->body)["policy"]["radii"][0] == 1400.0);
  const auto missing = client.Get("/missing");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  s.stop();
  server.join();
}
