#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace spinsqz {

/// Basis of the fixed-magnetization sector with n_up up spins out of N. States
/// are bitmasks (bit i set = spin i up) in increasing numeric order, which is
/// the colexicographic order, so index() is a combinadic rank.
class SectorBasis {
 public:
  SectorBasis(int N, int n_up);

  int N() const { return N_; }
  int n_up() const { return n_up_; }
  double sz() const { return n_up_ - 0.5 * N_; }
  std::size_t dim() const { return states_.size(); }
  const std::vector<std::uint32_t>& states() const { return states_; }
  std::uint32_t state(std::size_t a) const { return states_[a]; }
  std::size_t index(std::uint32_t state) const;

 private:
  int N_;
  int n_up_;
  std::vector<std::uint32_t> states_;
  std::vector<std::vector<std::uint64_t>> binom_;  // binom_[n][k] = C(n, k)
};

std::uint64_t binomial(int n, int k);

}  // namespace spinsqz
