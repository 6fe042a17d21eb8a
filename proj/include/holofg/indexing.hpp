#ifndef HOLOFG_INDEXING_HPP
#define HOLOFG_INDEXING_HPP

#include <cstdint>
#include <vector>

namespace holofg::indexing {

// Mixed-radix helpers. Composite indices are row-major over an ordered list
// of dimensions: the first dimension is the most significant digit.

inline std::vector<std::int64_t> strides(const std::vector<int>& dims) {
  std::vector<std::int64_t> s(dims.size(), 1);
  for (std::size_t k = dims.size(); k-- > 1;) {
    s[k - 1] = s[k] * dims[k];
  }
  return s;
}

inline std::int64_t total(const std::vector<int>& dims) {
  std::int64_t t = 1;
  for (int d : dims) t *= d;
  return t;
}

inline void decompose(std::int64_t index, const std::vector<int>& dims,
                      std::vector<int>& digits) {
  digits.resize(dims.size());
  for (std::size_t k = dims.size(); k-- > 0;) {
    digits[k] = static_cast<int>(index % dims[k]);
    index /= dims[k];
  }
}

inline std::int64_t compose(const std::vector<int>& digits,
                            const std::vector<std::int64_t>& strides) {
  std::int64_t index = 0;
  for (std::size_t k = 0; k < digits.size(); ++k) {
    index += digits[k] * strides[k];
  }
  return index;
}

}  // namespace holofg::indexing

#endif
