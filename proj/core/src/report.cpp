#include "barylab/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "barylab/error.hpp"
#include "barylab/hash.hpp"

namespace barylab {

void ScanReport::add_row(std::string label, std::vector<double> values) {
  if (values.size() != columns.size())
    throw InvalidArgument("report row has " + std::to_string(values.size()) + " values for " +
                          std::to_string(columns.size()) + " columns");
  rows.push_back({std::move(label), std::move(values)});
}

void ScanReport::add_fit(std::string name, double value) { fits.emplace_back(std::move(name), value); }

void ScanReport::add_check(std::string name, bool passed, std::string detail) {
  checks.push_back({std::move(name), passed, std::move(detail)});
}

std::optional<double> ScanReport::fit(const std::string& name) const {
  for (const auto& [k, v] : fits)
    if (k == name) return v;
  return std::nullopt;
}

const Check* ScanReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

bool ScanReport::all_passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::size_t ScanReport::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw InvalidArgument("report has no column " + name);
}

std::vector<double> ScanReport::column_values(const std::string& name) const {
  auto c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.values[c]);
  return out;
}

void ScanReport::attach_config(const nlohmann::json& cfg) {
  config = cfg;
  config_hash = barylab::config_hash(cfg);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string ScanReport::csv() const {
  std::ostringstream out;
  out << "config_hash,seed,row,label";
  for (const auto& c : columns) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << config_hash << ',' << seed << ',' << i << ',' << rows[i].label;
    for (double v : rows[i].values) out << ',' << format_double(v);
    out << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

nlohmann::json ScanReport::to_json(bool with_rows) const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["space"] = space_label;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
  j["config"] = config;
  j["columns"] = columns;
  j["row_count"] = rows.size();
  j["partial"] = partial;
  nlohmann::json f = nlohmann::json::object();
  for (const auto& [k, v] : fits) f[k] = number(v);
  j["fits"] = f;
  nlohmann::json c = nlohmann::json::array();
  for (const auto& ch : checks) c.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
  j["checks"] = c;
  j["notes"] = notes;
  if (with_rows) {
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : rows) {
      nlohmann::json vals = nlohmann::json::array();
      for (double v : r.values) vals.push_back(number(v));
      rs.push_back({{"label", r.label}, {"values", vals}});
    }
    j["rows"] = rs;
  }
  return j;
}

std::string config_hash(const nlohmann::json& cfg) {
  Fnv1a h;
  h.text(cfg.dump());
  return hex64(h.digest());
}

}  // namespace barylab
