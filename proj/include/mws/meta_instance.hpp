#pragma once

#include <array>
#include <limits>
#include <string>
#include <vector>

#include "mws/complexity.hpp"

namespace mws {

// Candidate algorithm order used everywhere labels are indexed.
inline constexpr int kNumAlgorithms = 5;
inline constexpr std::array<const char*, kNumAlgorithms> kAlgorithmNames = {
    "lr", "knn", "lasso", "ridge", "elasticnet"};

// One row of the meta-dataset.
struct MetaInstance {
    std::string name;
    std::string provenance;  // "real" | "synthetic"
    MetaFeatureVector features;
    std::array<double, kNumAlgorithms> continuous{};  // mean outer R^2 per algorithm
    std::array<int, kNumAlgorithms> binary{};         // multi-label applicability bits
    double friedman_p = 1.0;
    double cd = std::numeric_limits<double>::quiet_NaN();  // absent when not rejected

    // Performance-space coordinates: x = KNN label, y = LR label.
    double coord_x() const { return continuous[1]; }
    double coord_y() const { return continuous[0]; }
};

// CSV schema: name, provenance, 12 meta-features, r2_lr..r2_elasticnet,
// meta_lr..meta_elasticnet, friedman_p, cd.
void write_meta_csv(const std::vector<MetaInstance>& rows, const std::string& path);
std::vector<MetaInstance> read_meta_csv(const std::string& path);

}  // namespace mws
