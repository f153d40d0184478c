#pragma once

#include <array>
#include <string>

#include "mws/dataset.hpp"

namespace mws {

// The 12 regression complexity meta-features. All but t2 are clipped at 0;
// t2 is the raw rows-per-feature ratio.
struct MetaFeatureVector {
    double c1 = 0, c2 = 0, c3 = 0, c4 = 0;
    double l1 = 0, l2 = 0, l3 = 0;
    double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    double t2 = 0;

    std::array<double, 12> as_array() const {
        return {c1, c2, c3, c4, l1, l2, l3, s1, s2, s3, s4, t2};
    }
    static const std::array<const char*, 12>& names();
};

// Computes all 12 measures on a preprocessed dataset (min-max normalization
// applied internally; T2 uses the raw shape). Throws for n < 3.
MetaFeatureVector compute_meta_features(const Dataset& d);

}  // namespace mws
