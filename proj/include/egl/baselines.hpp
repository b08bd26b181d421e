#pragma once

#include "egl/core.hpp"
#include "egl/objectives.hpp"

namespace egl {

// Textbook Nelder-Mead (reflection 1, expansion 2, contraction 0.5, shrink
// 0.5). Initial simplex is x0 plus one axis step of the given length per
// dimension; scale <= 0 picks 5% of the domain width. Runs until the budget
// is spent.
RunRecord nelder_mead(BudgetedObjective& obj, const Vec& x0, double scale, std::uint64_t seed);

// Uniform samples over the global box until the budget is spent.
RunRecord random_search(BudgetedObjective& obj, std::uint64_t seed);

}  // namespace egl
