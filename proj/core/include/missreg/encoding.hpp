#pragma once

#include "missreg/masked_matrix.hpp"

#include <span>
#include <string>
#include <vector>

namespace missreg {

inline const std::string kMissingLevel = "<missing>";

/// Where each one-hot column came from: source column and level code
/// (level -1 for a continuous pass-through column).
struct OneHotColumn {
  Index source = 0;
  int level = -1;
};

/// Expands every categorical column into one 0/1 column per level. Continuous
/// columns pass through. A masked categorical cell masks all of its indicator
/// columns. The result is all-continuous.
MaskedMatrix one_hot(const MaskedMatrix& x, std::vector<OneHotColumn>* layout = nullptr);

/// Appends the level "<missing>" to each listed categorical column, recodes its
/// masked cells to that level, and clears the mask there.
MaskedMatrix encode_missing_category(const MaskedMatrix& x, std::span<const Index> columns);
/// Same, for every categorical column that has at least one masked cell.
MaskedMatrix encode_missing_category(const MaskedMatrix& x);

/// Inverse of encode_missing_category: drops the "<missing>" level and masks
/// the cells that held it.
MaskedMatrix decode_missing_category(const MaskedMatrix& encoded);

}  // namespace missreg
