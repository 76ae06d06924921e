#pragma once

#include <cstdint>
#include <string>

namespace tsexp {

// Parse a timestamp into nanoseconds since the Unix epoch. Accepted forms:
//   - plain integer or decimal seconds ("1468281600", "42.5")
//   - ISO 8601 date "2016-07-12"
//   - ISO 8601 date-time "2016-07-12 00:00:00" or "2016-07-12T00:00:00.250"
// All date-times are taken as UTC. Throws SchemaError on anything else.
std::int64_t parse_timestamp_ns(const std::string& text);

}  // namespace tsexp
