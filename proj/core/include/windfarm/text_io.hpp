#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace windfarm::io {

/// `key = value` lines; `#` starts a comment.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

double parse_double(const std::string& text, const std::string& context);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  /// `# key=value` comment lines preceding the header.
  std::map<std::string, std::string> metadata;

  [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Numeric CSV with a single header row.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace windfarm::io
