#include "landau/field_io.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "landau/io.hpp"

namespace landau {

void write_field(const std::filesystem::path& stem, const DensityField& field,
                 const MomentState* moments) {
  const Grid2D& g = field.grid();
  CsvTable table;
  table.kind = "field";
  table.columns = {"v1", "v2", "f"};
  table.rows.reserve(static_cast<std::size_t>(g.n) * g.n);
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j)
      table.rows.push_back({g.coord(i), g.coord(j), field.at(i, j)});
  auto csv = stem;
  csv += ".csv";
  write_csv(csv, table);

  nlohmann::ordered_json meta;
  meta["grid"] = {{"L", g.L}, {"n", g.n}};
  meta["time"] = field.time();
  if (moments) {
    std::vector<double> d;
    for (int a = 0; a < moments->dim(); ++a) d.push_back(moments->anisotropy()[a]);
    meta["anisotropy"] = d;
  }
  auto js = stem;
  js += ".json";
  std::ofstream out(js);
  if (!out) throw std::runtime_error("cannot write " + js.string());
  out << meta.dump(2) << '\n';
}

FieldFile read_field(const std::filesystem::path& path) {
  auto stem = path;
  stem.replace_extension();
  auto csv = stem, js = stem;
  csv += ".csv";
  js += ".json";

  std::ifstream in(js);
  if (!in) throw SchemaError("cannot read " + js.string());
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(js.string() + ": " + e.what());
  }
  if (!meta.contains("grid") || !meta.contains("time"))
    throw SchemaError(js.string() + ": missing grid or time");
  Grid2D grid{meta["grid"].at("L").get<double>(), meta["grid"].at("n").get<int>()};
  grid.validate();

  const CsvTable table = read_csv(csv, "field");
  const std::size_t fcol = table.column("f");
  if (table.rows.size() != static_cast<std::size_t>(grid.n) * grid.n)
    throw SchemaError(csv.string() + ": node count differs from the grid");
  std::vector<double> values;
  values.reserve(table.rows.size());
  for (const auto& r : table.rows) values.push_back(r[fcol]);

  FieldFile file{DensityField(grid, std::move(values), meta["time"].get<double>()),
                 std::nullopt};
  if (meta.contains("anisotropy"))
    file.anisotropy = Vec::from(meta["anisotropy"].get<std::vector<double>>());
  return file;
}

}  // namespace landau
