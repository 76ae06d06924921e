#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tsexp {

// Binary assignment path w_{1:T}. Immutable after construction; time indices
// in the public API are 1-based, matching the file formats.
class TreatmentPath {
 public:
  explicit TreatmentPath(std::vector<std::uint8_t> values);

  std::size_t length() const noexcept { return values_.size(); }

  // Assignment at 1-based time t.
  std::uint8_t at_time(std::size_t t) const { return values_.at(t - 1); }

  std::span<const std::uint8_t> values() const noexcept { return values_; }

  // w_{1:t} (1-based, inclusive); t = 0 gives the empty prefix.
  std::span<const std::uint8_t> prefix(std::size_t t) const {
    return std::span<const std::uint8_t>(values_.data(), t);
  }

  bool operator==(const TreatmentPath& other) const noexcept = default;

 private:
  std::vector<std::uint8_t> values_;
};

}  // namespace tsexp
