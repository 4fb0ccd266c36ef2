#include "blockprop/io.hpp"

#include "blockprop/error.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace blockprop {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const auto tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("write failed for '" + tmp + "'");
  }
  fs::rename(tmp, target);
}

std::string format_double(double v) {
  if (v == 0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw DataError("cannot format number");
  return std::string(buf, end);
}

double parse_double(std::string_view s) {
  double v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw DataError("invalid number '" + std::string(s) + "'");
  return v;
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw DataError("CSV lacks column '" + std::string(name) + "'");
}

CsvWriter::CsvWriter(const std::vector<std::string>& header) {
  for (const auto& h : header) field(h);
  end_row();
}

CsvWriter& CsvWriter::field(std::string_view s) {
  if (!row_start_) out_ += ',';
  row_start_ = false;
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
    out_ += s;
  } else {
    out_ += '"';
    for (char c : s) {
      if (c == '"') out_ += '"';
      out_ += c;
    }
    out_ += '"';
  }
  return *this;
}

CsvWriter& CsvWriter::field(double v) { return field(format_double(v)); }

CsvWriter& CsvWriter::end_row() {
  out_ += '\n';
  row_start_ = true;
  return *this;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
  };
  auto end_row = [&] {
    end_field();
    if (t.header.empty()) t.header = std::move(row);
    else t.rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') field += '"', ++i;
        else quoted = false;
      } else {
        field += c;
      }
      continue;
    }
    any = true;
    if (c == '"') quoted = true;
    else if (c == ',') end_field();
    else if (c == '\n') end_row();
    else if (c != '\r') field += c;
  }
  if (quoted) throw DataError("unterminated quoted CSV field");
  if (any) end_row();
  for (const auto& r : t.rows)
    if (r.size() != t.header.size()) throw DataError("CSV row width differs from header");
  return t;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path)); }

std::string feature_matrix_csv(const FeatureMatrix& m) {
  std::vector<std::string> header = {"user_id"};
  for (const auto& e : m.manifest.entries()) header.push_back(e.name);
  CsvWriter w(header);
  for (std::size_t r = 0; r < m.users.size(); ++r) {
    w.field(m.users[r]);
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) w.field(m.values(static_cast<Eigen::Index>(r), j));
    w.end_row();
  }
  return w.str();
}

FeatureMatrix parse_feature_matrix_csv(const CsvTable& table, const FeatureManifest& manifest) {
  if (table.header.empty() || table.header.front() != "user_id") throw DataError("feature CSV must start with user_id");
  if (table.header.size() != manifest.size() + 1) throw DataError("feature CSV column count does not match manifest");
  for (std::size_t j = 0; j < manifest.size(); ++j)
    if (table.header[j + 1] != manifest[j].name)
      throw DataError("feature CSV column '" + table.header[j + 1] + "' does not match manifest entry '" +
                      manifest[j].name + "'");
  FeatureMatrix m;
  m.manifest = manifest;
  m.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(manifest.size()));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    m.users.push_back(table.rows[r][0]);
    for (std::size_t j = 0; j < manifest.size(); ++j)
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = parse_double(table.rows[r][j + 1]);
  }
  return m;
}

}  // namespace blockprop
