#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace barylab {

struct ReportRow {
  std::string label;
  std::vector<double> values;
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Tabular output of one experiment. Rows are numeric apart from a label;
// fits and checks summarize the table.
struct ScanReport {
  std::string experiment;
  std::string space_label;
  std::uint64_t seed = 0;
  std::string config_hash;
  nlohmann::json config;
  std::vector<std::string> columns;
  std::vector<ReportRow> rows;
  std::vector<std::pair<std::string, double>> fits;
  std::vector<Check> checks;
  std::vector<std::string> notes;
  bool partial = false;

  void add_row(std::string label, std::vector<double> values);
  void add_fit(std::string name, double value);
  void add_check(std::string name, bool passed, std::string detail = {});
  std::optional<double> fit(const std::string& name) const;
  const Check* check(const std::string& name) const;
  bool all_passed() const;

  std::size_t column(const std::string& name) const;
  std::vector<double> column_values(const std::string& name) const;

  // Stores the config and its hash.
  void attach_config(const nlohmann::json& cfg);

  std::string csv() const;
  nlohmann::json to_json(bool with_rows) const;
};

// FNV-1a over the canonical dump of a JSON value.
std::string config_hash(const nlohmann::json& cfg);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace barylab
