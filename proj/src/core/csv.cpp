#include "affect/core/csv.hpp"

#include <cmath>
#include <cstdio>

#include "affect/core/binary_io.hpp"
#include "affect/core/error.hpp"

namespace affect {

std::size_t CsvTable::column(std::string_view name, std::string_view origin) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw FormatError(std::string(origin) + ": missing column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text, std::string_view origin) {
  std::vector<CsvRow> records;
  CsvRow row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) records.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
    } else if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\n') {
      end_row();
      ++line;
    } else if (ch != '\r') {
      field.push_back(ch);
      field_started = true;
    }
  }
  if (quoted) throw FormatError(std::string(origin) + ":" + std::to_string(line) + ": unterminated quote");
  if (field_started || !row.empty()) end_row();

  CsvTable t;
  if (records.empty()) return t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw FormatError(std::string(origin) + ": row " + std::to_string(r + 1) + " has " +
                        std::to_string(records[r].size()) + " fields, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(io::read_text(path), path.string()); }

namespace {

void append_field(std::string& out, const std::string& f) {
  if (f.find_first_of(",\"\n\r") == std::string::npos) {
    out += f;
    return;
  }
  out.push_back('"');
  for (char c : f) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

void append_row(std::string& out, const CsvRow& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out.push_back(',');
    append_field(out, row[i]);
  }
  out.push_back('\n');
}

}  // namespace

std::string format_csv(const CsvTable& table) {
  std::string out;
  append_row(out, table.header);
  for (const auto& r : table.rows) append_row(out, r);
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) { io::write_text(path, format_csv(table)); }

std::string format_fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  // Values that round to zero print without a sign.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

}  // namespace affect
