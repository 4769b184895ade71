#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace voucher::csv {

// Minimal RFC 4180 reader: double-quoted fields may contain commas and "" escapes.
// Embedded newlines inside quotes are not supported (the formats here never need them).
std::optional<std::vector<std::string>> split_line(std::string_view line);

// Reads the next line, stripping a trailing '\r'. Returns false at end of stream.
bool read_line(std::istream& in, std::string& line);

// Quotes a field only when it contains a comma, quote, or leading/trailing space.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

}  // namespace voucher::csv
