#include "missreg/rng.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace missreg {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

std::vector<int> fold_assignment(Index n, int folds, std::uint64_t seed) {
  if (folds < 2) throw std::invalid_argument("need at least two folds");
  if (n < folds) throw std::invalid_argument("fewer rows than folds");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < order.size(); ++r) fold[static_cast<std::size_t>(order[r])] = static_cast<int>(r % folds);
  return fold;
}

std::vector<FoldSplit> make_folds(Index n, int folds, std::uint64_t seed) {
  const auto assign = fold_assignment(n, folds, seed);
  std::vector<FoldSplit> out(static_cast<std::size_t>(folds));
  for (Index i = 0; i < n; ++i) {
    const int f = assign[static_cast<std::size_t>(i)];
    for (int g = 0; g < folds; ++g) {
      if (g == f) out[static_cast<std::size_t>(g)].valid.push_back(i);
      else out[static_cast<std::size_t>(g)].train.push_back(i);
    }
  }
  return out;
}

std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng) {
  if (k > n) throw std::invalid_argument("sample size exceeds population");
  std::vector<Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Index> pick(i, n - 1);
    std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
  }
  all.resize(static_cast<std::size_t>(k));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace missreg
