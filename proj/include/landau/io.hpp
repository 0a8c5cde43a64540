#pragma once

// Versioned CSV tables and round-trip number formatting.
//
// Every table starts with a schema line "# landau-lab <kind> v<major>",
// followed by a comma-separated header and data rows.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace landau {

inline constexpr int kSchemaMajor = 1;

/// Raised for malformed or incompatible artifacts (missing columns, unknown
/// schema version, unparsable numbers).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest representation that parses back to the same double.
std::string format_double(double x);
/// Throws SchemaError unless the whole string is a number.
double parse_double(std::string_view s);

struct CsvTable {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of a column; throws SchemaError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  std::vector<double> values(std::string_view name) const;
};

/// Writes the schema line, the header and all rows.
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Reads a table; rejects a different major version. When expected_kind is
/// nonempty the kind must match too.
CsvTable read_csv(const std::filesystem::path& path,
                  std::string_view expected_kind = {});

/// Reads only the schema line and returns the kind.
std::string peek_kind(const std::filesystem::path& path);

}  // namespace landau
