#include "lab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lab/error.hpp"

namespace lab::fit {

SlopeFit fit_slope(std::span<const double> x, std::span<const double> y, int drop_smallest) {
  if (x.size() != y.size()) throw InputError("fit_slope: column lengths differ");
  if (drop_smallest < 0) throw InputError("fit_slope: drop_smallest must be >= 0");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  const std::size_t skip = std::min(order.size(), static_cast<std::size_t>(drop_smallest));
  const std::size_t m = order.size() - skip;
  if (m < 4) throw InputError("fit_slope: need at least 4 points after dropping");

  std::vector<double> lx, ly;
  for (std::size_t k = skip; k < order.size(); ++k) {
    const double xv = x[order[k]], yv = y[order[k]];
    if (!(xv > 0.0) || !(yv > 0.0)) throw InputError("fit_slope: values must be positive");
    lx.push_back(std::log(xv));
    ly.push_back(std::log(yv));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
    syy += (ly[k] - my) * (ly[k] - my);
  }
  if (sxx == 0.0) throw InputError("fit_slope: x values are all equal");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace lab::fit
