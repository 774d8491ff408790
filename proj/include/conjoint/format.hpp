#ifndef CONJOINT_FORMAT_HPP
#define CONJOINT_FORMAT_HPP

#include <charconv>
#include <string>
#include <system_error>

namespace conjoint {

/// Shortest decimal text that round-trips to the same double; '.' decimal
/// point regardless of locale.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace conjoint

#endif  // CONJOINT_FORMAT_HPP
