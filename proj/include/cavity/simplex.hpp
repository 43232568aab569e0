#pragma once

#include <functional>
#include <vector>

namespace cavity {

struct SimplexOptions {
    double f_tol = 1e-12;     // spread of simplex values
    double x_tol = 1e-8;      // simplex diameter
    int max_evaluations = 20000;
    int restarts = 3;         // re-expand around the optimum until no improvement
    double initial_step = 0.1;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0;
    int evaluations = 0;
    bool converged = false;
};

// Nelder–Mead downhill simplex (standard coefficients 1, 2, 1/2, 1/2).
// Non-finite objective values are treated as +infinity.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                          const SimplexOptions& opts = {});

}  // namespace cavity
