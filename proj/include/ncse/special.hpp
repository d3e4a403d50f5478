#pragma once

#include "ncse/types.hpp"

namespace ncse {

// log I_nu(x) for nu >= 0, x >= 0, evaluated entirely in the log domain.
// Branches: power series for x < max(nu, 20); for larger x the Hankel
// large-argument expansion (nu < 8) or Olver's uniform asymptotic expansion
// in nu (nu >= 8). Finite for x <= 1e6 and nu <= 2100; throws
// NumericOverflow if an intermediate goes non-finite.
double log_bessel_i(double nu, double x);

// log of the surface area of the unit sphere S^{p-1} embedded in R^p.
double log_unit_sphere_area(Index p);

}  // namespace ncse
