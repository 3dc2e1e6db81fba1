#pragma once

// Exact rational probabilities. Every verdict in the analyzer is computed on
// these; floating point never enters a comparison.

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cardproto {

using Rational = boost::rational<std::int64_t>;

// Canonical rendering: lowest terms, positive denominator, always "p/q".
inline std::string to_string(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

// Accepts "p/q" or a bare integer "p".
inline std::optional<Rational> parse_rational(std::string_view text) {
  auto parse_int = [](std::string_view s, std::int64_t& out) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    std::int64_t v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
      v = v * 10 + (s[i] - '0');
    }
    out = (s[0] == '-') ? -v : v;
    return true;
  };
  std::int64_t num = 0, den = 1;
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    if (!parse_int(text, num)) return std::nullopt;
  } else {
    if (!parse_int(text.substr(0, slash), num)) return std::nullopt;
    if (!parse_int(text.substr(slash + 1), den)) return std::nullopt;
    if (den == 0) return std::nullopt;
  }
  return Rational(num, den);
}

}  // namespace cardproto
