#pragma once

#include <cstdint>
#include <vector>

#include "mws/dataset.hpp"

namespace mws {

// Partition of [0, n) into k nonempty folds whose sizes differ by at most 1.
struct FoldAssignment {
    std::vector<int> fold_of;  // length n, values in [0, k)
    int k = 0;
    std::uint64_t seed = 0;

    std::vector<std::vector<int>> fold_indices() const;
    std::vector<int> train_indices(int fold) const;
    std::vector<int> test_indices(int fold) const;
};

// Seeded permutation split into k contiguous blocks; the first n mod k folds
// get the extra element.
FoldAssignment kfold_shuffled(int n, int k, std::uint64_t seed);

// Totally stratified CV: visit observations in ascending-y order (stable tie
// order by original index) and assign each to a currently smallest fold, with
// seeded uniform tie-breaking among equally small folds.
FoldAssignment tscv_assign(const Vector& y, int k, std::uint64_t seed);

// The fixed evaluation splitter: tscv_assign(y, 5, seed 0). No configuration
// surface by design.
FoldAssignment eval_harness_splitter(const Vector& y);

}  // namespace mws
