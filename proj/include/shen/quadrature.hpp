#pragma once

#include <functional>

namespace shen::quad {

struct Options {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int limit = 512;
};

// Adaptive integration on [a,b]; integrable endpoint singularities are fine.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts = {});

// Adaptive integration on [a, infinity).
double integrate_to_inf(const std::function<double(double)>& f, double a,
                        const Options& opts = {});

}  // namespace shen::quad
