#include "mws/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mws {

std::string TargetCell::id() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "cell_%02d_%02d", ii, jj);
    return buf;
}

std::string TargetCell::description() const {
    char buf[256];
    std::snprintf(buf,
                  sizeof(buf),
                  "target x-range: [%.6f, %.6f]\n"
                  "target y-range: [%.6f, %.6f]\n"
                  "target center: (%.6f, %.6f)\n"
                  "x-axis: mean cross-validated R^2 of the KNN landmarker\n"
                  "y-axis: mean cross-validated R^2 of the linear landmarker",
                  x_lo, x_hi, y_lo, y_hi, x_center, y_center);
    return buf;
}

std::vector<TargetCell> grid_cells(int bins_per_axis) {
    if (bins_per_axis < 2) throw std::invalid_argument("grid_cells: B >= 2");
    const double b = bins_per_axis;
    std::vector<TargetCell> cells;
    cells.reserve(static_cast<size_t>(bins_per_axis) * bins_per_axis);
    for (int ii = 0; ii < bins_per_axis; ++ii) {
        for (int jj = 0; jj < bins_per_axis; ++jj) {
            TargetCell c;
            c.ii = ii;
            c.jj = jj;
            c.x_lo = jj / b;
            c.x_hi = (jj + 1) / b;
            c.y_lo = ii / b;
            c.y_hi = (ii + 1) / b;
            c.x_center = (jj + 0.5) / b;
            c.y_center = (ii + 0.5) / b;
            cells.push_back(c);
        }
    }
    return cells;
}

TargetCell cell_of(int bins_per_axis, double x, double y) {
    if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0)
        throw std::invalid_argument("cell_of: point outside the unit square");
    auto bin = [&](double v) {
        if (v <= 0.0) return 0;
        const int b = static_cast<int>(std::ceil(v * bins_per_axis)) - 1;
        return std::clamp(b, 0, bins_per_axis - 1);
    };
    const int jj = bin(x), ii = bin(y);
    const auto cells = grid_cells(bins_per_axis);
    return cells[static_cast<size_t>(ii) * bins_per_axis + jj];
}

}  // namespace mws
