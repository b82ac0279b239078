#pragma once

#include <cmath>

namespace freepath {

// Geometry of the golden-slope chain, all derived from sqrt(5):
//   tau      golden ratio, tau^2 = tau + 1
//   nu       sqrt(1 + tau^2), norm of the lattice direction (1, tau)
//   alpha    tau^2 / nu, points per unit length
//   spacing  nu / tau^2, mean gap; alpha * spacing = 1
struct GoldenConstants {
  double tau;
  double nu;
  double alpha;
  double spacing;
};

inline GoldenConstants golden_constants() {
  const double tau = 0.5 * (1.0 + std::sqrt(5.0));
  const double nu = std::sqrt(1.0 + tau * tau);
  return {tau, nu, tau * tau / nu, nu / (tau * tau)};
}

}  // namespace freepath
