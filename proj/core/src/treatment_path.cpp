#include "tsexp/treatment_path.hpp"

#include "tsexp/errors.hpp"

namespace tsexp {

TreatmentPath::TreatmentPath(std::vector<std::uint8_t> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("treatment path: length must be >= 1");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] > 1)
      throw ValidationError("treatment path: non-binary value at time " + std::to_string(i + 1));
  }
}

}  // namespace tsexp
