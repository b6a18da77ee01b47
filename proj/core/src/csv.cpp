#include "qsync/csv.hpp"

#include <charconv>
#include <cmath>

namespace qsync::csv {

std::string real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::string real(const std::optional<double>& x) { return x ? real(*x) : std::string(); }

}  // namespace qsync::csv
