#include "shen/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace shen::kernel {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
using spectral::Family;
}  // namespace

double gamma(double t, double dist_sq, int dim) {
    if (!(t > 0.0)) throw std::invalid_argument("gamma: t must be positive");
    return std::pow(4.0 * kPi * t, -0.5 * dim) * std::exp(-dist_sq / (4.0 * t));
}

double gamma(double t, const std::array<double, 2>& x, int dim) {
    return gamma(t, x[0] * x[0] + x[1] * x[1], dim);
}

double fourier_gamma(double t, double xi_norm_sq) {
    if (t < 0.0) throw std::invalid_argument("fourier_gamma: t must be nonnegative");
    return std::exp(-t * xi_norm_sq);
}

bool PhiEvaluator::has_closed_j() const {
    return measure.family == Family::WhiteNoise || measure.family == Family::Riesz;
}

bool PhiEvaluator::has_closed_phi() const {
    if (measure.family == Family::WhiteNoise) return measure.dim == 1;
    if (measure.family == Family::Riesz) return measure.param < 2.0;
    return false;
}

double PhiEvaluator::j_rate(double t, Route route) const {
    if (!(t > 0.0)) throw std::invalid_argument("j_rate: t must be positive");
    const bool closed = route == Route::ClosedForm ||
                        (route == Route::Auto && has_closed_j());
    if (route == Route::ClosedForm && !has_closed_j())
        throw std::domain_error("j_rate: no closed form for this measure");
    if (closed) {
        switch (measure.family) {
            case Family::WhiteNoise:
                return std::pow(kTwoPi, -measure.dim) * std::pow(kPi / (2.0 * t), 0.5 * measure.dim);
            case Family::Riesz: {
                const double eta = measure.param;
                const double c = spectral::SpectralMeasure::riesz_constant(eta, measure.dim);
                return c * spectral::sphere_surface(measure.dim) * 0.5 *
                       std::tgamma(0.5 * eta) * std::pow(2.0 * t, -0.5 * eta);
            }
            default:
                break;
        }
    }
    const double surf = spectral::sphere_surface(measure.dim);
    const auto& m = measure;
    return quad::integrate_to_inf(
        [&m, surf, t](double r) {
            return surf * m.density_radial(r) * std::pow(r, m.dim - 1) *
                   std::exp(-2.0 * t * r * r);
        },
        0.0, quad_opts);
}

double PhiEvaluator::phi(double t, Route route) const {
    if (t < 0.0) throw std::invalid_argument("phi: t must be nonnegative");
    if (t == 0.0) return 0.0;
    const bool closed = route == Route::ClosedForm ||
                        (route == Route::Auto && has_closed_phi());
    if (route == Route::ClosedForm && !has_closed_phi())
        throw std::domain_error("phi: no closed form for this measure");
    if (closed) {
        switch (measure.family) {
            case Family::WhiteNoise:
                if (measure.dim != 1)
                    throw std::domain_error("phi: divergent for white noise with d > 1");
                return std::sqrt(t / kTwoPi);
            case Family::Riesz: {
                const double eta = measure.param;
                if (!(eta < 2.0)) throw std::domain_error("phi: divergent for riesz eta >= 2");
                return j_rate(t, Route::ClosedForm) * t / (1.0 - 0.5 * eta);
            }
            default:
                break;
        }
    }
    // Fully numeric: time integral of the quadrature J, integrable
    // singularity at s=0 handled by the adaptive rule.
    const Route inner = route == Route::Quadrature ? Route::Quadrature : Route::Auto;
    quad::Options outer = quad_opts;
    outer.rel_tol = 1e-9;
    return quad::integrate([this, inner](double s) { return j_rate(s, inner); }, 0.0, t,
                           outer);
}

PhiEvaluator::IncrementBound PhiEvaluator::phi_increment_lower(double t, double tau1,
                                                               double tau2, double T) const {
    if (!(0.0 <= tau1 && tau1 <= tau2 && tau2 <= t && t <= T))
        throw std::invalid_argument("phi_increment_lower: need 0 <= tau1 <= tau2 <= t <= T");
    IncrementBound b;
    b.lhs = (tau2 > tau1) ? j_rate(T) * (tau2 - tau1) : 0.0;
    b.rhs = phi(t - tau1) - phi(t - tau2);
    b.holds = b.rhs >= b.lhs * (1.0 - 1e-9) - 1e-15;
    return b;
}

}  // namespace shen::kernel
