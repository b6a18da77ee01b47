#pragma once

#include <optional>
#include <string>

namespace qsync::csv {

// 12 significant digits, '.' decimal separator regardless of locale;
// "inf"/"-inf"/"nan" for non-finite values.
std::string real(double x);

// Empty field for a missing value.
std::string real(const std::optional<double>& x);

}  // namespace qsync::csv
