#include "spinsqz/sector_basis.hpp"

#include <bit>

#include "spinsqz/error.hpp"

namespace spinsqz {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
  return r;
}

SectorBasis::SectorBasis(int N, int n_up) : N_(N), n_up_(n_up) {
  if (N < 1 || N > 30) throw ConfigError("SectorBasis: N must be in [1, 30]");
  if (n_up < 0 || n_up > N) throw ConfigError("SectorBasis: n_up out of range");
  binom_.assign(N + 1, std::vector<std::uint64_t>(N + 2, 0));
  for (int n = 0; n <= N; ++n) {
    for (int k = 0; k <= n + 1 && k <= N + 1; ++k) binom_[n][k] = binomial(n, k);
  }
  states_.reserve(binomial(N, n_up));
  if (n_up == 0) {
    states_.push_back(0);
    return;
  }
  const std::uint32_t limit = N == 32 ? 0 : (std::uint32_t{1} << N);
  // Gosper's hack enumerates same-popcount integers in increasing order.
  std::uint32_t s = (std::uint32_t{1} << n_up) - 1;
  while (s < limit) {
    states_.push_back(s);
    const std::uint32_t c = s & (~s + 1);
    const std::uint32_t r = s + c;
    if (r == 0) break;
    s = (((r ^ s) >> 2) / c) | r;
  }
}

std::size_t SectorBasis::index(std::uint32_t state) const {
  std::size_t rank = 0;
  int k = 0;
  while (state) {
    const int p = std::countr_zero(state);
    ++k;
    rank += binom_[p][k];
    state &= state - 1;
  }
  return rank;
}

}  // namespace spinsqz
