#include "bmp/finite_diff.hpp"

#include <algorithm>
#include <cmath>

namespace bmp {

VecX finite_diff_grad(const std::function<double(const VecX&)>& f, const VecX& x, double h_rel) {
  VecX g(x.size());
  VecX probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = h_rel * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(const VecX& a, const VecX& b) {
  const double scale = std::max(a.norm(), b.norm());
  if (scale == 0.0) return 0.0;
  return (a - b).norm() / scale;
}

}  // namespace bmp
