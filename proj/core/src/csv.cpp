#include "modechoice/csv.hpp"

#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "modechoice/errors.hpp"

namespace modechoice::csv {
namespace {

// Returns false at end of input. A quoted field may span lines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (in_quotes) throw InputError("unterminated quoted field");
  if (!any) return false;
  if (!field.empty() && field.back() == '\r') field.pop_back();
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name) const {
  if (auto c = column(name)) return *c;
  throw InputError(fmt::format("missing required column '{}'", name));
}

Table read(std::istream& in) {
  Table table;
  std::vector<std::string> fields;
  if (!read_record(in, fields)) return table;
  for (auto& f : fields) table.header.emplace_back(trim(f));
  std::size_t row = 0;
  while (read_record(in, fields)) {
    ++row;
    if (fields.size() == 1 && is_blank(fields[0])) continue;
    if (fields.size() != table.header.size()) {
      throw InputError(fmt::format("expected {} fields, found {}", table.header.size(),
                                   fields.size()),
                       row);
    }
    table.rows.push_back(fields);
  }
  return table;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

bool is_blank(std::string_view field) noexcept { return trim(field).empty(); }

std::string_view trim(std::string_view s) noexcept {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string format_double(double v) { return fmt::format("{}", v); }

}  // namespace modechoice::csv
