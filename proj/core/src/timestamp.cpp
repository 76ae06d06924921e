#include "tsexp/timestamp.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "tsexp/errors.hpp"

namespace tsexp {

namespace {

// Days from 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// civil-days algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

bool is_number(const std::string& s) {
  bool digit = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) { digit = true; continue; }
    if ((c == '+' || c == '-') && i == 0) continue;
    if (c == '.') continue;
    if (c == 'e' || c == 'E') continue;
    return false;
  }
  return digit;
}

}  // namespace

std::int64_t parse_timestamp_ns(const std::string& text) {
  if (text.empty()) throw SchemaError("timestamp: empty");
  constexpr std::int64_t kNsPerSec = 1000000000;

  // Integer seconds and fractional seconds are combined in integer
  // arithmetic; nanosecond-scale epochs overflow a double's mantissa.
  auto combine = [](std::int64_t whole_seconds, double frac_seconds) {
    return whole_seconds * kNsPerSec + static_cast<std::int64_t>(std::llround(frac_seconds * 1e9));
  };

  if (is_number(text) && text.find('-', 1) == std::string::npos) {
    const auto dot = text.find('.');
    char* end = nullptr;
    const std::int64_t whole = std::strtoll(text.substr(0, dot).c_str(), &end, 10);
    double frac = 0.0;
    if (dot != std::string::npos) {
      frac = std::strtod(("0." + text.substr(dot + 1)).c_str(), nullptr);
      if (whole < 0) frac = -frac;
    }
    return combine(whole, frac);
  }

  int year = 0, month = 0, day = 0, hour = 0, minute = 0;
  double second = 0.0;
  char sep = 0;
  int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%lf", &year, &month, &day, &sep, &hour,
                      &minute, &second);
  const bool date_only = n == 3;
  const bool date_time = n == 7 && (sep == ' ' || sep == 'T');
  if (!date_only && !date_time)
    throw SchemaError("timestamp: cannot parse '" + text + "'");
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour < 0 || hour > 23 || minute < 0 ||
      minute > 59 || second < 0.0 || second >= 61.0)
    throw SchemaError("timestamp: field out of range in '" + text + "'");

  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                            static_cast<unsigned>(day));
  const std::int64_t whole_second = static_cast<std::int64_t>(second);
  const std::int64_t seconds =
      days * 86400 + hour * 3600 + minute * 60 + whole_second;
  return combine(seconds, second - static_cast<double>(whole_second));
}

}  // namespace tsexp
