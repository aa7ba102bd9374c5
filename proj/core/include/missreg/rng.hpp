#pragma once

#include "missreg/masked_matrix.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>
#include <vector>

namespace missreg {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent seed streams.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t hash_string(std::string_view s);
/// Order-sensitive combination of seed components.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

/// Shuffled assignment of n rows to `folds` folds of near-equal size.
std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed);

struct FoldSplit {
  std::vector<Index> train;
  std::vector<Index> valid;
};
std::vector<FoldSplit> make_folds(Index n, int folds, std::uint64_t seed);

/// Uniform random subset of size k from {0..n-1}, sorted.
std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng);

}  // namespace missreg
