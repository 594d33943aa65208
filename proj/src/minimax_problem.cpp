#include "invextopo/minimax_problem.hpp"

namespace invextopo {

std::vector<int> MinimaxProblem::x_axes() const {
    std::vector<int> a(n_x);
    for (int i = 0; i < n_x; ++i) a[i] = i;
    return a;
}

std::vector<int> MinimaxProblem::y_axes() const {
    std::vector<int> a(n_y);
    for (int i = 0; i < n_y; ++i) a[i] = n_x + i;
    return a;
}

void MinimaxProblem::validate() const {
    if (n_x < 1 || n_y < 1)
        throw std::invalid_argument("minimax problem: both blocks need at least one variable");
    if (n_x + n_y != field.dim)
        throw std::invalid_argument("minimax problem: block split does not match field arity");
    x_box.validate();
    y_box.validate();
    if (x_box.dim() != n_x || y_box.dim() != n_y)
        throw std::invalid_argument("minimax problem: box dimensions do not match the split");
}

MinimaxProblem make_minimax(ScalarField field, int n_x, BoxDomain x_box, BoxDomain y_box) {
    MinimaxProblem p;
    p.field = std::move(field);
    p.n_x = n_x;
    p.n_y = p.field.dim - n_x;
    p.x_box = std::move(x_box);
    p.y_box = std::move(y_box);
    p.validate();
    return p;
}

}  // namespace invextopo
