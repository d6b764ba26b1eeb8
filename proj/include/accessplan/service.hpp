#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "accessplan/config.hpp"
#include "accessplan/pipeline.hpp"

namespace accessplan {

/// Record (raw objectives), share and construction diagnostics, warnings and optionally the block layers.
nlohmann::json evaluation_json(const Site& site, const Evaluation& ev, const EvaluationSettings& settings,
                               bool include_blocks);

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// JSON API over one immutable site snapshot and a directory of run outputs. Every handler is
/// const and safe to call concurrently.
class Service {
 public:
  /// `site` may be null; site-dependent endpoints then answer 409.
  Service(std::shared_ptr<const Site> site, RunConfig config, std::filesystem::path runs_root);

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body) const;

  /// Blocks serving HTTP until stop() is called from another thread.
  void listen(const std::string& host, int port);
  void stop();
  /// Waits until the listener is accepting connections.
  void wait_until_ready() const;

  const std::string& site_id() const { return site_id_; }

 private:
  HttpResponse get_site() const;
  HttpResponse post_evaluate(const std::string& body) const;
  HttpResponse get_runs() const;
  HttpResponse get_run(const std::string& id, const std::string& rest) const;

  std::shared_ptr<const Site> site_;
  RunConfig config_;
  std::filesystem::path runs_root_;
  std::string site_id_;
  nlohmann::json site_body_;
  std::shared_ptr<void> server_;
};

}  // namespace accessplan
