#include "accessplan/records_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "accessplan/errors.hpp"

namespace accessplan {

namespace {

const std::vector<std::string> kRawColumns{"AU", "D_B", "D_LU", "D_CS", "JH_pen"};
const std::vector<std::string> kNormColumns{"norm_one_minus_AU", "norm_D_B",     "norm_D_LU",  "norm_D_CS",
                                            "norm_D_total_sum",  "norm_D_total", "norm_JH_pen"};
const std::vector<std::string> kObjectiveNames{"one_minus_AU", "D_total", "JH_pen"};

std::ofstream open_output(const std::filesystem::path& path)
{
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_row(const std::string& line, std::size_t line_no)
{
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ValidationError("unterminated quote on CSV line " + std::to_string(line_no));
  fields.push_back(std::move(cur));
  return fields;
}

std::string use_label(Use u) { return std::string(1, use_code(u)); }

}  // namespace

std::string format_double(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& text)
{
  if (text == "nan") return std::nan("");
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ValidationError("'" + text + "' is not a number");
  }
  return v;
}

std::size_t CsvTable::column(const std::string& name) const
{
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return k;
  }
  throw ValidationError("CSV has no column '" + name + "'");
}

std::string csv_escape(const std::string& field)
{
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

CsvTable read_csv(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_row(line, line_no);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size()) {
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw ValidationError(path.string() + " is empty");
  return t;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table)
{
  std::ofstream out = open_output(path);
  auto row = [&](const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) out << (k ? "," : "") << csv_escape(fields[k]);
    out << '\n';
  };
  row(table.header);
  for (const auto& r : table.rows) row(r);
}

nlohmann::json record_json(const ObjectiveRecord& r)
{
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, value] : r.params) params[name] = value;
  nlohmann::json out{{"id", r.id},
                     {"valid", r.valid},
                     {"params", params},
                     {"priority", r.priority},
                     {"raw", {{"AU", r.raw.au}, {"D_B", r.raw.d_b}, {"D_LU", r.raw.d_lu}, {"D_CS", r.raw.d_cs},
                              {"JH_pen", r.raw.jh_pen}}},
                     {"normalized", {{"one_minus_AU", r.norm.one_minus_au}, {"D_B", r.norm.d_b}, {"D_LU", r.norm.d_lu},
                                     {"D_CS", r.norm.d_cs}, {"D_total_sum", r.norm.d_total_sum},
                                     {"D_total", r.norm.d_total}, {"JH_pen", r.norm.jh_pen}}}};
  if (!r.valid) out["error"] = r.error;
  return out;
}

void write_records_csv(const std::filesystem::path& path, std::span<const ObjectiveRecord> records)
{
  std::vector<std::string> params;
  for (const ObjectiveRecord& r : records) {
    for (const auto& [name, value] : r.params) {
      if (std::find(params.begin(), params.end(), name) == params.end()) params.push_back(name);
    }
  }
  CsvTable t;
  t.header = {"id", "valid", "error"};
  t.header.insert(t.header.end(), params.begin(), params.end());
  t.header.push_back("Priority");
  t.header.insert(t.header.end(), kRawColumns.begin(), kRawColumns.end());
  t.header.insert(t.header.end(), kNormColumns.begin(), kNormColumns.end());
  for (const ObjectiveRecord& r : records) {
    std::vector<std::string> row{std::to_string(r.id), r.valid ? "1" : "0", r.error};
    for (const std::string& name : params) {
      const auto v = r.param(name);
      row.push_back(v ? format_double(*v) : "");
    }
    row.push_back(r.priority);
    for (double v : {r.raw.au, r.raw.d_b, r.raw.d_lu, r.raw.d_cs, r.raw.jh_pen}) row.push_back(format_double(v));
    for (double v : {r.norm.one_minus_au, r.norm.d_b, r.norm.d_lu, r.norm.d_cs, r.norm.d_total_sum, r.norm.d_total,
                     r.norm.jh_pen}) {
      row.push_back(format_double(v));
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

std::vector<ObjectiveRecord> read_records_csv(const std::filesystem::path& path)
{
  if (!std::filesystem::exists(path)) throw ValidationError("records file not found: " + path.string());
  const CsvTable t = read_csv(path);
  const std::size_t id_col = t.column("id");
  const std::size_t valid_col = t.column("valid");
  const std::size_t error_col = t.column("error");
  const std::size_t priority_col = t.column("Priority");
  if (!(error_col < priority_col)) throw ValidationError("records CSV columns are out of order");
  std::vector<std::size_t> raw;
  std::vector<std::size_t> norm;
  for (const auto& name : kRawColumns) raw.push_back(t.column(name));
  for (const auto& name : kNormColumns) norm.push_back(t.column(name));

  std::vector<ObjectiveRecord> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    try {
      ObjectiveRecord r;
      r.id = static_cast<std::size_t>(std::stoull(row[id_col]));
      if (row[valid_col] != "0" && row[valid_col] != "1") throw ValidationError("valid must be 0 or 1");
      r.valid = row[valid_col] == "1";
      r.error = row[error_col];
      for (std::size_t k = error_col + 1; k < priority_col; ++k) {
        if (!row[k].empty()) r.params.emplace_back(t.header[k], parse_double(row[k]));
      }
      r.priority = row[priority_col];
      r.raw = {parse_double(row[raw[0]]), parse_double(row[raw[1]]), parse_double(row[raw[2]]),
               parse_double(row[raw[3]]), parse_double(row[raw[4]])};
      r.norm = {parse_double(row[norm[0]]), parse_double(row[norm[1]]), parse_double(row[norm[2]]),
                parse_double(row[norm[3]]), parse_double(row[norm[4]]), parse_double(row[norm[5]]),
                parse_double(row[norm[6]])};
      out.push_back(std::move(r));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": record row " + std::to_string(i + 1) + ": " + e.what());
    } catch (const std::logic_error& e) {
      throw ValidationError(path.string() + ": record row " + std::to_string(i + 1) + ": bad id");
    }
  }
  return out;
}

void write_pareto_csv(const std::filesystem::path& path, std::span<const ObjectiveRecord> records,
                      std::span<const std::size_t> front, const KneeResult& knee)
{
  std::map<std::size_t, const ObjectiveRecord*> by_id;
  for (const ObjectiveRecord& r : records) by_id[r.id] = &r;
  CsvTable t;
  t.header = {"id", "one_minus_AU", "D_total", "JH_pen", "AU", "D_B", "D_LU", "D_CS", "raw_JH_pen", "utopia_distance",
              "knee"};
  for (std::size_t k = 0; k < front.size(); ++k) {
    const ObjectiveRecord& r = *by_id.at(front[k]);
    const double distance = k < knee.distances.size() ? knee.distances[k] : 0.0;
    t.rows.push_back({std::to_string(r.id), format_double(r.norm.one_minus_au), format_double(r.norm.d_total),
                      format_double(r.norm.jh_pen), format_double(r.raw.au), format_double(r.raw.d_b),
                      format_double(r.raw.d_lu), format_double(r.raw.d_cs), format_double(r.raw.jh_pen),
                      format_double(distance), r.id == knee.id ? "1" : "0"});
  }
  write_csv(path, t);
}

void write_sensitivity_csv(const std::filesystem::path& path, const SensitivityReport& report)
{
  CsvTable t;
  t.header = {"parameter", "value", "count"};
  for (const auto& name : kObjectiveNames) {
    for (const char* stat : {"min", "q1", "median", "q3", "max"}) t.header.push_back(name + "_" + stat);
  }
  for (const SensitivityGroup& g : report.groups) {
    std::vector<std::string> row{report.parameter, format_double(g.value), std::to_string(g.count)};
    for (const Quartiles& q : g.objectives) {
      for (double v : {q.min, q.q1, q.median, q.q3, q.max}) row.push_back(format_double(v));
    }
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

void write_spearman_csv(const std::filesystem::path& path, const SpearmanMatrix& matrix)
{
  CsvTable t;
  t.header = {"metric"};
  t.header.insert(t.header.end(), matrix.names.begin(), matrix.names.end());
  for (std::size_t a = 0; a < matrix.names.size(); ++a) {
    std::vector<std::string> row{matrix.names[a]};
    for (const auto& v : matrix.rho[a]) row.push_back(v ? format_double(*v) : "");
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

void write_shares_csv(const std::filesystem::path& path, const UseVector& target, const ShareDiagnostics& diag)
{
  CsvTable t;
  t.header = {"use", "target_share", "achieved_share"};
  for (Use u : kAllUses) {
    const std::size_t k = index_of(u);
    t.rows.push_back({use_label(u), format_double(target[k]), format_double(diag.achieved[k])});
  }
  write_csv(path, t);
}

void write_construction_csv(const std::filesystem::path& path, const UseVector& target,
                            const ConstructionDiagnostics& diag)
{
  CsvTable t;
  t.header = {"use", "B_hat", "gamma_hat", "gamma_target"};
  for (Use u : kAllUses) {
    const std::size_t k = index_of(u);
    t.rows.push_back({use_label(u), format_double(diag.built[k]), format_double(diag.shares[k]), format_double(target[k])});
  }
  write_csv(path, t);
}

void write_clusters_csv(const std::filesystem::path& path, std::span<const Block> blocks,
                        const ClusterHierarchy& hierarchy)
{
  CsvTable t;
  t.header = {"block_id", "tier", "cluster_id", "is_center"};
  for (std::size_t l = 0; l < hierarchy.tiers.size(); ++l) {
    for (const Cluster& c : hierarchy.tiers[l].clusters) {
      for (std::size_t i : c.members) {
        t.rows.push_back({std::to_string(blocks[i].id), std::to_string(l), std::to_string(c.id), i == c.center ? "1" : "0"});
      }
    }
  }
  write_csv(path, t);
}

void write_segments_csv(const std::filesystem::path& path, const StreetNetwork& network,
                        std::span<const std::pair<CentralityField, CentralityField>> fields)
{
  CsvTable t;
  t.header = {"segment_id", "kind", "cost", "radius", "score"};
  for (std::size_t s = 0; s < network.segments.size(); ++s) {
    for (const auto& [choice, integration] : fields) {
      for (const CentralityField* f : {&choice, &integration}) {
        t.rows.push_back({std::to_string(network.segments[s].id), to_string(f->kind), to_string(f->cost),
                          format_double(f->radius), format_double(f->scores.at(s))});
      }
    }
  }
  write_csv(path, t);
}

void write_lots_csv(const std::filesystem::path& path, std::span<const Block> blocks, const IntensityResult& intensity)
{
  CsvTable t;
  t.header = {"block", "use", "area", "access", "far", "height_m"};
  for (std::size_t k = 0; k < intensity.lots.size(); ++k) {
    const Lot& lot = intensity.lots[k];
    t.rows.push_back({std::to_string(blocks[lot.block].id), use_label(lot.use), format_double(lot.area),
                      format_double(lot.access), format_double(intensity.far[k]), format_double(intensity.height[k])});
  }
  write_csv(path, t);
}

}  // namespace accessplan
