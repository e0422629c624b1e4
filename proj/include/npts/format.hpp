#pragma once

#include <string>

namespace npts {

/// @brief Formats a number with 6 significant digits ("%.6g"), the precision used for
/// every numeric value this toolkit emits.
std::string format_number(double value);

/// @brief Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& text);

} // namespace npts
