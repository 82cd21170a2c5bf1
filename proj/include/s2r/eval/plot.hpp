#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace s2r::eval {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;
};

/// Numeric CSV with a header row. Throws IoError / ConfigError.
CsvTable read_csv(const std::filesystem::path& path);

/// Line chart of every listed column against the first one, written as PNG.
/// An empty `columns` plots all of them.
void plot_csv(const CsvTable& table, const std::filesystem::path& out,
              const std::vector<std::string>& columns = {}, const std::string& title = "");

}  // namespace s2r::eval
