#pragma once

#include <string>
#include <vector>

namespace mws {

// One box of the B x B partition of the unit performance square.
// x-axis: KNN score bin jj, y-axis: LR score bin ii.
struct TargetCell {
    int ii = 0;
    int jj = 0;
    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
    double x_center = 0, y_center = 0;

    bool contains(double x, double y) const {  // closed-interval box test
        return x_lo <= x && x <= x_hi && y_lo <= y && y <= y_hi;
    }
    std::string id() const;           // "cell_ii_jj" with zero padding
    std::string description() const;  // six numbers rendered to 6 decimals
};

// B^2 cells in (ii, jj) row-major order.
std::vector<TargetCell> grid_cells(int bins_per_axis);

// Cell index for a score pair in [0,1]^2; boundary points go to the
// lower-index cell except at 1.0.
TargetCell cell_of(int bins_per_axis, double x, double y);

}  // namespace mws
