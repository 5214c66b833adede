#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace lastiter {

/// Shortest decimal that round-trips to the same double ("nan"/"inf" for
/// non-finite values).
std::string format_double(double value);

/// RFC 4180: fields containing a comma, quote, CR or LF are quoted and
/// embedded quotes doubled.
std::string csv_escape(std::string_view field);

/// RFC 4180 quoting with LF line endings; the header row is written first.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(std::int64_t value);
  CsvWriter& field(std::uint64_t value);
  CsvWriter& field(bool value);
  CsvWriter& empty();
  void end_row();

  std::size_t columns() const noexcept { return header_size_; }

 private:
  void separator();

  std::ostream& out_;
  std::size_t header_size_;
  std::size_t in_row_ = 0;
};

/// Splits one CSV document into rows of unescaped fields (test helper and
/// config round-trips).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

}  // namespace lastiter
