#pragma once

#include <functional>

namespace cloakbench {

// Adaptive Gauss-Kronrod (7-15) quadrature on [a, b].
double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    double rel_tol = 1e-10, double abs_tol = 1e-14, int max_depth = 30);

}  // namespace cloakbench
