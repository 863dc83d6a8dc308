#include "moldflux/csv.hpp"

#include <cstdio>
#include <sstream>

#include "moldflux/errors.hpp"

namespace moldflux {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& comments,
                     const std::vector<std::string>& columns)
    : out_(path) {
  if (!out_) throw InvalidArgument("CsvWriter: cannot open " + path);
  for (const auto& c : comments) out_ << "# " << c << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out_ << ",";
    out_ << columns[i];
  }
  out_ << "\n";
}

CsvWriter::~CsvWriter() = default;

void CsvWriter::begin_row() { first_in_row_ = true; }

void CsvWriter::add(double v) {
  if (!first_in_row_) out_ << ",";
  out_ << format_full(v);
  first_in_row_ = false;
}

void CsvWriter::add(long long v) {
  if (!first_in_row_) out_ << ",";
  out_ << v;
  first_in_row_ = false;
}

void CsvWriter::add(const std::string& v) {
  if (!first_in_row_) out_ << ",";
  out_ << v;
  first_in_row_ = false;
}

void CsvWriter::end_row() { out_ << "\n"; }

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw InvalidArgument("CsvTable: missing column " + name);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("read_csv: cannot open " + path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!have_header) {
      table.columns = std::move(cells);
      have_header = true;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw InvalidArgument("read_csv: no header row in " + path);
  return table;
}

}  // namespace moldflux
