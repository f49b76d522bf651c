#include "qtopc/channels.hpp"

#include <cmath>
#include <stdexcept>

namespace qtopc {

DensityMatrix apply_depolarizing(const DensityMatrix& rho, double p_d) {
  if (p_d < 0.0 || p_d > 1.0)
    throw std::invalid_argument("apply_depolarizing: p_D must lie in [0,1]");
  int d = rho.dim();
  return DensityMatrix{p_d * Matrix::Identity(d, d) / static_cast<double>(d) +
                       (1.0 - p_d) * rho.m};
}

double depolarizing_overlap(double gamma, double ts, int d) {
  double inv_d = 1.0 / static_cast<double>(d);
  return inv_d + (1.0 - inv_d) * std::exp(-gamma * ts);
}

} // namespace qtopc
