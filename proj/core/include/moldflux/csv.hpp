#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace moldflux {

// Full-precision formatting: 17 significant digits, scientific notation.
std::string format_full(double v);

// Minimal CSV writer: '#'-prefixed comment header, one column-name row, data
// rows with doubles in full precision.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& comments,
            const std::vector<std::string>& columns);
  ~CsvWriter();

  void begin_row();
  void add(double v);
  void add(long long v);
  void add(const std::string& v);
  void end_row();

 private:
  std::ofstream out_;
  bool first_in_row_ = true;
};

// Parsed CSV: comments stripped, first non-comment row is the header.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::size_t column_index(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

}  // namespace moldflux
