#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vmrd {

/// Multiplies two sizes, throwing CapExceeded when the product overflows or
/// exceeds `limit`.
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b,
                          std::uint64_t limit = UINT64_MAX);

/// Product of a range of radices with overflow checking.
std::uint64_t checked_product(std::span<const int> radices,
                              std::uint64_t limit = UINT64_MAX);

/// Canonical mixed-radix index: the first component is the most significant,
/// index = sum_j s_j * prod_{j' > j} r_{j'}.
class MixedRadix {
 public:
  MixedRadix() = default;
  explicit MixedRadix(std::vector<int> radices);

  std::size_t rank() const noexcept { return radices_.size(); }
  std::size_t size() const noexcept { return size_; }
  int radix(std::size_t k) const { return radices_[k]; }
  const std::vector<int>& radices() const noexcept { return radices_; }

  std::size_t encode(std::span<const int> digits) const;
  void decode(std::size_t index, std::span<int> digits) const;
  std::vector<int> decode(std::size_t index) const;

 private:
  std::vector<int> radices_;
  std::size_t size_ = 1;
};

}  // namespace vmrd
