#include "mws/resampling.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "mws/rng.hpp"

namespace mws {

std::vector<std::vector<int>> FoldAssignment::fold_indices() const {
    std::vector<std::vector<int>> out(static_cast<size_t>(k));
    for (size_t i = 0; i < fold_of.size(); ++i)
        out[static_cast<size_t>(fold_of[i])].push_back(static_cast<int>(i));
    return out;
}

std::vector<int> FoldAssignment::train_indices(int fold) const {
    std::vector<int> out;
    for (size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] != fold) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> FoldAssignment::test_indices(int fold) const {
    std::vector<int> out;
    for (size_t i = 0; i < fold_of.size(); ++i)
        if (fold_of[i] == fold) out.push_back(static_cast<int>(i));
    return out;
}

FoldAssignment kfold_shuffled(int n, int k, std::uint64_t seed) {
    if (k < 2 || k > n) throw std::invalid_argument("kfold_shuffled: need 2 <= k <= n");
    std::vector<int> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    SeededRng rng(mix_seed(seed, 0x6b666f6cULL));
    for (int i = n - 1; i > 0; --i)
        std::swap(perm[static_cast<size_t>(i)],
                  perm[rng.below(static_cast<std::uint64_t>(i) + 1)]);

    FoldAssignment fa;
    fa.k = k;
    fa.seed = seed;
    fa.fold_of.assign(static_cast<size_t>(n), 0);
    const int base = n / k, extra = n % k;
    int pos = 0;
    for (int f = 0; f < k; ++f) {
        const int size = base + (f < extra ? 1 : 0);
        for (int s = 0; s < size; ++s) fa.fold_of[static_cast<size_t>(perm[pos++])] = f;
    }
    return fa;
}

FoldAssignment tscv_assign(const Vector& y, int k, std::uint64_t seed) {
    const int n = static_cast<int>(y.size());
    if (k < 2 || k > n) throw std::invalid_argument("tscv_assign: need 2 <= k <= n");

    // Ascending y, stable on original index.
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return y(a) < y(b); });

    SeededRng rng(mix_seed(seed, 0x74736376ULL));
    FoldAssignment fa;
    fa.k = k;
    fa.seed = seed;
    fa.fold_of.assign(static_cast<size_t>(n), 0);
    std::vector<int> counts(static_cast<size_t>(k), 0);
    std::vector<int> smallest;
    for (int idx : order) {
        const int min_count = *std::min_element(counts.begin(), counts.end());
        smallest.clear();
        for (int f = 0; f < k; ++f)
            if (counts[static_cast<size_t>(f)] == min_count) smallest.push_back(f);
        const int f = smallest[rng.below(smallest.size())];
        fa.fold_of[static_cast<size_t>(idx)] = f;
        ++counts[static_cast<size_t>(f)];
    }
    return fa;
}

FoldAssignment eval_harness_splitter(const Vector& y) {
    if (y.size() < 5) throw std::invalid_argument("eval_harness_splitter: need n >= 5");
    return tscv_assign(y, 5, 0);
}

}  // namespace mws
