#pragma once

#include <functional>
#include <vector>

namespace smic {

/// Adaptive Gauss-Kronrod integral of f over [lo, hi], controlled by an
/// absolute error tolerance. Interior knots force panel boundaries; callers
/// list integrand kinks (step-function breaks, oscillation landmarks) there
/// so the adaptive refinement is not wasted discovering them. Throws
/// std::runtime_error when the accumulated error estimate exceeds abs_tol.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double abs_tol = 1e-8, std::vector<double> interior_knots = {});

}  // namespace smic
