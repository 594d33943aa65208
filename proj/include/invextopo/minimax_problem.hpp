#pragma once

// Shared description of a min-max problem min_x max_y f(x, y): the field over
// the joint space, the block split, and the per-block boxes.

#include "invextopo/grid.hpp"

namespace invextopo {

struct MinimaxProblem {
    ScalarField field;  // arity n_x + n_y; x coordinates first
    int n_x = 0, n_y = 0;
    BoxDomain x_box, y_box;

    BoxDomain joint_box() const { return concat_boxes(x_box, y_box); }
    std::vector<int> x_axes() const;
    std::vector<int> y_axes() const;
    void validate() const;
};

MinimaxProblem make_minimax(ScalarField field, int n_x, BoxDomain x_box, BoxDomain y_box);

}  // namespace invextopo
