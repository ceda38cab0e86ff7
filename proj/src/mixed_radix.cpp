#include "vmrd/mixed_radix.hpp"

#include <stdexcept>
#include <string>

#include "vmrd/errors.hpp"

namespace vmrd {

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error(violations.empty() ? std::string("invalid input") : violations.front()),
      violations_(std::move(violations)) {}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, std::uint64_t limit) {
  if (a != 0 && b > limit / a) {
    throw CapExceeded("size " + std::to_string(a) + " x " + std::to_string(b) +
                      " exceeds limit " + std::to_string(limit));
  }
  return a * b;
}

std::uint64_t checked_product(std::span<const int> radices, std::uint64_t limit) {
  std::uint64_t p = 1;
  for (int r : radices) {
    if (r < 0) throw std::invalid_argument("negative radix");
    p = checked_mul(p, static_cast<std::uint64_t>(r), limit);
  }
  return p;
}

MixedRadix::MixedRadix(std::vector<int> radices) : radices_(std::move(radices)) {
  size_ = static_cast<std::size_t>(checked_product(radices_));
}

std::size_t MixedRadix::encode(std::span<const int> digits) const {
  if (digits.size() != radices_.size()) throw std::invalid_argument("mixed-radix rank mismatch");
  std::size_t index = 0;
  for (std::size_t k = 0; k < radices_.size(); ++k) {
    if (digits[k] < 0 || digits[k] >= radices_[k]) {
      throw std::out_of_range("digit " + std::to_string(digits[k]) + " outside radix " +
                              std::to_string(radices_[k]));
    }
    index = index * static_cast<std::size_t>(radices_[k]) + static_cast<std::size_t>(digits[k]);
  }
  return index;
}

void MixedRadix::decode(std::size_t index, std::span<int> digits) const {
  if (digits.size() != radices_.size()) throw std::invalid_argument("mixed-radix rank mismatch");
  if (index >= size_) throw std::out_of_range("mixed-radix index out of range");
  for (std::size_t k = radices_.size(); k-- > 0;) {
    const auto r = static_cast<std::size_t>(radices_[k]);
    digits[k] = static_cast<int>(index % r);
    index /= r;
  }
}

std::vector<int> MixedRadix::decode(std::size_t index) const {
  std::vector<int> digits(radices_.size());
  decode(index, digits);
  return digits;
}

}  // namespace vmrd
