#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "maxcorr/dataset.hpp"
#include "maxcorr/error.hpp"

namespace maxcorr {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

CsvTable parse_csv_table(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    auto line = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
    if (!trim(line).empty()) lines.push_back(line);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (lines.empty()) throw_data("CSV input is empty (header row required)");

  // Tolerate a UTF-8 byte order mark in front of the header.
  std::string_view header_line = lines.front();
  if (header_line.starts_with("\xEF\xBB\xBF")) header_line.remove_prefix(3);

  CsvTable table;
  for (auto field : split_fields(header_line)) {
    std::string name(unquote(field));
    if (name.empty()) throw_data("CSV header contains an empty column name");
    for (const auto& h : table.header) {
      if (h == name) throw_data("duplicate CSV header '" + name + "'");
    }
    table.header.push_back(std::move(name));
  }
  table.columns.resize(table.header.size());

  for (std::size_t r = 1; r < lines.size(); ++r) {
    auto fields = split_fields(lines[r]);
    if (fields.size() != table.header.size()) {
      throw_data("row " + std::to_string(r) + " has " + std::to_string(fields.size()) +
                 " fields, expected " + std::to_string(table.header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      auto field = fields[c];
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() ||
          !std::isfinite(value)) {
        throw_data("non-numeric or missing value '" + std::string(field) + "' at row " +
                   std::to_string(r) + ", column '" + table.header[c] + "'");
      }
      table.columns[c].push_back(value);
    }
  }
  return table;
}

CsvTable load_csv_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("cannot open data file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_csv_table(buf.str());
}

namespace {

Dataset to_dataset(CsvTable table, const RoleMap& roles) {
  for (const auto& name : table.header) {
    if (roles.find(name) == roles.end()) {
      throw_config("column '" + name + "' is missing from the roles map");
    }
  }
  for (const auto& [name, side] : roles) {
    if (std::find(table.header.begin(), table.header.end(), name) == table.header.end()) {
      throw_config("roles map names column '" + name + "' which is not in the CSV header");
    }
  }
  if (table.n_rows() < 3) {
    throw_data("too few rows: " + std::to_string(table.n_rows()) + " (need at least 3)");
  }
  std::vector<Column> cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    Column col;
    col.name = table.header[c];
    col.side = roles.find(col.name)->second;
    col.values = std::move(table.columns[c]);
    cols.push_back(std::move(col));
  }
  return Dataset(std::move(cols));
}

}  // namespace

Dataset parse_csv(std::string_view text, const RoleMap& roles) {
  return to_dataset(parse_csv_table(text), roles);
}

Dataset load_csv(const std::string& path, const RoleMap& roles) {
  return to_dataset(load_csv_table(path), roles);
}

}  // namespace maxcorr
