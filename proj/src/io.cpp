#include "landau/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace landau {

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw SchemaError("not a number: '" + std::string(s) + "'");
  return x;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == name) return k;
  throw SchemaError("missing column '" + std::string(name) + "' in " + kind +
                    " table");
}

bool CsvTable::has_column(std::string_view name) const {
  for (const auto& c : columns)
    if (c == name) return true;
  return false;
}

std::vector<double> CsvTable::values(std::string_view name) const {
  const std::size_t k = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# landau-lab " << table.kind << " v" << kSchemaMajor << '\n';
  for (std::size_t k = 0; k < table.columns.size(); ++k)
    out << (k ? "," : "") << table.columns[k];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k)
      out << (k ? "," : "") << format_double(row[k]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (!line.empty() && line.back() == ',') parts.emplace_back();
  return parts;
}

std::string parse_schema(const std::string& line,
                         const std::filesystem::path& path) {
  std::istringstream ss(line);
  std::string hash, tool, kind, version;
  ss >> hash >> tool >> kind >> version;
  if (hash != "#" || tool != "landau-lab" || version.size() < 2 ||
      version[0] != 'v')
    throw SchemaError(path.string() + ": missing schema line");
  const std::string major = version.substr(1, version.find('.') - 1);
  if (major != std::to_string(kSchemaMajor))
    throw SchemaError(path.string() + ": unsupported schema version " +
                      version);
  return kind;
}

}  // namespace

std::string peek_kind(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  return parse_schema(line, path);
}

CsvTable read_csv(const std::filesystem::path& path,
                  std::string_view expected_kind) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read " + path.string());
  std::string line;
  std::getline(in, line);
  CsvTable table;
  table.kind = parse_schema(line, path);
  if (!expected_kind.empty() && table.kind != expected_kind)
    throw SchemaError(path.string() + ": expected a " +
                      std::string(expected_kind) + " table, found " +
                      table.kind);
  if (!std::getline(in, line))
    throw SchemaError(path.string() + ": missing header");
  table.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.columns.size())
      throw SchemaError(path.string() + ": row width differs from header");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace landau
