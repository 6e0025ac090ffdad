#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace adco::csv {

// 17 significant digits; parsing the text gives back the same double.
std::string format_double(double v);

// Quotes a field when it contains a comma, quote or newline.
std::string quote(std::string_view field);

std::string join(const std::vector<std::string>& fields);

// Splits one CSV line honouring double quotes.
std::vector<std::string> split(std::string_view line);

double parse_double(std::string_view text);

}  // namespace adco::csv
