#include "taxon/common.hpp"

#include <algorithm>

namespace taxon {

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n,
                                                         std::size_t m) {
  if (m > n) throw Error("sample_without_replacement: m > n");
  // Floyd's algorithm; result sorted so downstream iteration order is fixed.
  std::vector<std::size_t> out;
  out.reserve(m);
  std::vector<bool> taken(n, false);
  for (std::size_t j = n - m; j < n; ++j) {
    std::size_t t = next_index(j + 1);
    if (taken[t]) t = j;
    taken[t] = true;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace taxon
