#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace shen {

// Reaction and diffusion coefficients with their derivatives and sup norms.
// Presets are smooth with bounded derivatives of all orders.
struct Coefficients {
    using Fn = double (*)(double);
    Fn b = nullptr;
    Fn db = nullptr;
    Fn sigma = nullptr;
    Fn dsigma = nullptr;
    double b_sup = 0.0;
    double sigma_sup = 0.0;
    double sigma_lower = 0.0;  // inf |sigma|; > 0 means nondegenerate
    std::string name;
};

namespace coeffs {

inline double zero(double) { return 0.0; }
inline double one(double) { return 1.0; }
inline double sine_sigma(double v) { return 1.0 + 0.5 * std::sin(v); }
inline double sine_dsigma(double v) { return 0.5 * std::cos(v); }
inline double cos_drift(double v) { return 0.3 * std::cos(v); }
inline double cos_ddrift(double v) { return -0.3 * std::sin(v); }

inline Coefficients linear() {
    return {&zero, &zero, &one, &zero, 0.0, 1.0, 1.0, "linear"};
}

inline Coefficients sine_diffusion() {
    return {&zero, &zero, &sine_sigma, &sine_dsigma, 0.0, 1.5, 0.5, "sine-diffusion"};
}

inline Coefficients drift() {
    return {&cos_drift, &cos_ddrift, &sine_sigma, &sine_dsigma, 0.3, 1.5, 0.5, "drift"};
}

inline Coefficients by_name(const std::string& name) {
    if (name == "linear") return linear();
    if (name == "sine-diffusion") return sine_diffusion();
    if (name == "drift") return drift();
    throw std::invalid_argument("unknown coefficient preset: " + name);
}

}  // namespace coeffs
}  // namespace shen
