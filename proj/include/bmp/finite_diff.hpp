#pragma once

#include <functional>

#include "bmp/types.hpp"

namespace bmp {

// Central differences g_i = (f(x + h_i e_i) - f(x - h_i e_i)) / (2 h_i) with
// h_i = h_rel · max(1, |x_i|).
VecX finite_diff_grad(const std::function<double(const VecX&)>& f, const VecX& x, double h_rel = 1e-6);

// |a - b| / max(|a|, |b|), or 0 when both vanish.
double relative_error(const VecX& a, const VecX& b);

}  // namespace bmp
