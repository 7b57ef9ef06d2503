#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gevk::csv {

/// Quotes the field if it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

/// Splits one record (RFC 4180 quoting, no embedded newlines). nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split(std::string_view line);

}  // namespace gevk::csv
