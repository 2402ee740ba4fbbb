#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace modechoice::csv {

/// A parsed delimited table. Rows keep the 1-based data-row number used in
/// diagnostics (the header is not counted).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
  /// Throws InputError naming the column when it is absent.
  std::size_t require_column(std::string_view name) const;
};

/// RFC-4180 style: comma separated, double-quote escaping, CRLF tolerated.
/// Rows whose field count differs from the header raise InputError carrying
/// the data row number (1 = first line after the header).
Table read(std::istream& in);

std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Blank or whitespace-only field.
bool is_blank(std::string_view field) noexcept;

std::string_view trim(std::string_view s) noexcept;

/// Shortest round-trip representation.
std::string format_double(double v);

}  // namespace modechoice::csv
