#pragma once

#include "blockprop/features.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace blockprop {

std::string read_file(const std::string& path);

/// Writes to `<path>.tmp` and renames over `path`; creates parent directories.
void write_file_atomic(const std::string& path, std::string_view content);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(std::string_view name) const;  // DataError when missing
};

/// Builds RFC 4180 CSV text; fields are quoted only when needed.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header);
  CsvWriter& field(std::string_view s);
  CsvWriter& field(double v);
  CsvWriter& end_row();
  [[nodiscard]] const std::string& str() const { return out_; }

 private:
  std::string out_;
  bool row_start_ = true;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::string& path);

/// Header `user_id` + manifest names, one row per user.
std::string feature_matrix_csv(const FeatureMatrix& m);
/// Columns are matched to the manifest by name and must agree exactly.
FeatureMatrix parse_feature_matrix_csv(const CsvTable& table, const FeatureManifest& manifest);

}  // namespace blockprop
