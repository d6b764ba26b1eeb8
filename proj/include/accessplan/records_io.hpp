#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "accessplan/allocator.hpp"
#include "accessplan/basins.hpp"
#include "accessplan/blockmap.hpp"
#include "accessplan/intensity.hpp"
#include "accessplan/netgraph.hpp"
#include "accessplan/policy.hpp"

namespace accessplan {

/// Shortest text that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index by name; throws ValidationError when absent.
  std::size_t column(const std::string& name) const;
};

std::string csv_escape(const std::string& field);
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// JSON view of one record: params, priority, raw and normalized objectives.
nlohmann::json record_json(const ObjectiveRecord& record);

void write_records_csv(const std::filesystem::path& path, std::span<const ObjectiveRecord> records);
std::vector<ObjectiveRecord> read_records_csv(const std::filesystem::path& path);

/// Frontier rows with their utopia distances; the knee is flagged.
void write_pareto_csv(const std::filesystem::path& path, std::span<const ObjectiveRecord> records,
                      std::span<const std::size_t> front, const KneeResult& knee);

void write_sensitivity_csv(const std::filesystem::path& path, const SensitivityReport& report);
void write_spearman_csv(const std::filesystem::path& path, const SpearmanMatrix& matrix);

void write_shares_csv(const std::filesystem::path& path, const UseVector& target, const ShareDiagnostics& diag);
void write_construction_csv(const std::filesystem::path& path, const UseVector& target,
                            const ConstructionDiagnostics& diag);
void write_clusters_csv(const std::filesystem::path& path, std::span<const Block> blocks,
                        const ClusterHierarchy& hierarchy);
/// Long format: one row per segment, centrality kind and tier.
void write_segments_csv(const std::filesystem::path& path, const StreetNetwork& network,
                        std::span<const std::pair<CentralityField, CentralityField>> fields);
void write_lots_csv(const std::filesystem::path& path, std::span<const Block> blocks, const IntensityResult& intensity);

}  // namespace accessplan
