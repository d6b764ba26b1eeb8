#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "accessplan/config.hpp"
#include "accessplan/pipeline.hpp"

namespace accessplan {

/// A loaded configuration with its site snapshot and input file hashes.
struct SiteContext {
  RunConfig config;
  Site site;
  std::map<std::string, std::string> inputs;  // path -> sha256
  bool synthetic = false;
};

/// Without a config file (or without site paths in it) the built-in 6 x 6 synthetic grid is used;
/// with no config file at all, B_total is scaled to that grid.
SiteContext load_context(const std::optional<std::filesystem::path>& config_path);

/// Construction target used for synthetic sites: mean FAR 2.4 over the lot area.
double synthetic_b_total(double total_lot_area);

/// Exit codes: 0 success, 1 invalid input or usage, 2 runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace accessplan
