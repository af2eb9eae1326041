#include "shen/spectral.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>

#include "shen/fft.hpp"
#include "shen/quadrature.hpp"

namespace shen::spectral {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

SpectralMeasure SpectralMeasure::white(int dim) {
    SpectralMeasure m{Family::WhiteNoise, dim, 0.0};
    m.validate();
    return m;
}

SpectralMeasure SpectralMeasure::riesz(double eta, int dim) {
    SpectralMeasure m{Family::Riesz, dim, eta};
    m.validate();
    return m;
}

SpectralMeasure SpectralMeasure::bessel(double order, int dim) {
    SpectralMeasure m{Family::Bessel, dim, order};
    m.validate();
    return m;
}

SpectralMeasure SpectralMeasure::exponential_cov(double scale) {
    SpectralMeasure m{Family::ExponentialCov, 1, scale};
    m.validate();
    return m;
}

void SpectralMeasure::validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("measure: dim must be 1, 2 or 3");
    switch (family) {
        case Family::WhiteNoise:
            break;
        case Family::Riesz:
            if (!(param > 0.0) || !(param < dim))
                throw std::invalid_argument("measure: riesz eta must satisfy 0 < eta < dim");
            break;
        case Family::Bessel:
            if (!(param > 0.0)) throw std::invalid_argument("measure: bessel order must be > 0");
            break;
        case Family::ExponentialCov:
            if (dim != 1)
                throw std::invalid_argument("measure: exponential covariance is d=1 only");
            if (!(param > 0.0)) throw std::invalid_argument("measure: scale must be > 0");
            break;
    }
}

double SpectralMeasure::riesz_constant(double eta, int dim) {
    // F[|x|^{-eta}] = 2^{d-eta} pi^{d/2} Gamma((d-eta)/2)/Gamma(eta/2) |xi|^{eta-d},
    // and the inverse transform contributes (2 pi)^{-d}.
    return std::pow(kTwoPi, -dim) * std::pow(2.0, dim - eta) * std::pow(kPi, 0.5 * dim) *
           std::tgamma(0.5 * (dim - eta)) / std::tgamma(0.5 * eta);
}

double SpectralMeasure::density_radial(double r) const {
    switch (family) {
        case Family::WhiteNoise:
            return std::pow(kTwoPi, -dim);
        case Family::Riesz:
            return riesz_constant(param, dim) * std::pow(r, param - dim);
        case Family::Bessel:
            return std::pow(kTwoPi, -dim) * std::pow(1.0 + r * r, -param);
        case Family::ExponentialCov:
            return (param / kPi) / (1.0 + param * param * r * r);
    }
    return 0.0;
}

double SpectralMeasure::density(const std::array<double, 2>& xi) const {
    return density_radial(std::sqrt(xi[0] * xi[0] + xi[1] * xi[1]));
}

std::string SpectralMeasure::name() const {
    char buf[64];
    switch (family) {
        case Family::WhiteNoise:
            std::snprintf(buf, sizeof(buf), "white-d%d", dim);
            break;
        case Family::Riesz:
            std::snprintf(buf, sizeof(buf), "riesz-d%d-eta%g", dim, param);
            break;
        case Family::Bessel:
            std::snprintf(buf, sizeof(buf), "bessel-d%d-order%g", dim, param);
            break;
        case Family::ExponentialCov:
            std::snprintf(buf, sizeof(buf), "expcov-scale%g", param);
            break;
        default:
            return "?";
    }
    return buf;
}

bool operator==(const SpectralMeasure& a, const SpectralMeasure& b) {
    return a.family == b.family && a.dim == b.dim && a.param == b.param;
}

double sphere_surface(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return kTwoPi;
        case 3: return 4.0 * kPi;
    }
    throw std::invalid_argument("sphere_surface: dim must be 1, 2 or 3");
}

std::vector<double> spectral_weights(const SpectralMeasure& m, const GridSpec& grid) {
    if (m.dim != grid.dim) throw std::invalid_argument("spectral_weights: dim mismatch");
    const std::size_t half = fft::spec_size(grid);
    const FrequencyGrid freq(grid);
    const double cell = freq.cell();
    std::vector<double> w(half);
    for (std::size_t k = 0; k < half; ++k) {
        const double r = std::sqrt(fft::xi_norm_sq_half(grid, k));
        if (k == 0 && m.family == Family::Riesz) {
            // Exact integral of the density over the zero-frequency cell.
            const double c = SpectralMeasure::riesz_constant(m.param, m.dim);
            const double dxi = kTwoPi / grid.L;
            if (m.dim == 1) {
                w[k] = 2.0 * c * std::pow(0.5 * dxi, m.param) / m.param;
            } else {
                const double rho = dxi / std::sqrt(kPi);  // disk of equal cell area
                w[k] = kTwoPi * c * std::pow(rho, m.param) / m.param;
            }
            continue;
        }
        const double g = m.density_radial(r);
        if (!(g >= 0.0) || !std::isfinite(g))
            throw std::runtime_error("spectral_weights: density not finite/nonnegative at a grid frequency");
        w[k] = g * cell;
    }
    return w;
}

double h_norm_sq_weighted(const Field& phi, const GridSpec& grid,
                          const std::vector<double>& weights) {
    if (phi.size() != grid.sites()) throw std::invalid_argument("h_norm_sq: field size mismatch");
    std::vector<std::complex<double>> spec(fft::spec_size(grid));
    fft::forward_r2c(grid, phi.data(), spec.data());
    const double hd = grid.cell();
    double acc = 0.0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double mag = std::norm(spec[k]);
        acc += fft::multiplicity_half(grid, k) * weights[k] * mag;
    }
    return acc * hd * hd;
}

double h_norm_sq(const Field& phi, const GridSpec& grid, const SpectralMeasure& m) {
    return h_norm_sq_weighted(phi, grid, spectral_weights(m, grid));
}

DalangReport dalang_integral(const SpectralMeasure& m, const std::vector<double>& cutoffs) {
    if (cutoffs.size() < 3)
        throw std::invalid_argument("dalang_integral: need at least three cutoffs");
    for (std::size_t i = 1; i < cutoffs.size(); ++i)
        if (!(cutoffs[i] > cutoffs[i - 1]) || !(cutoffs[0] > 0.0))
            throw std::invalid_argument("dalang_integral: cutoffs must be positive increasing");

    const double surf = sphere_surface(m.dim);
    auto radial = [&](double r) {
        return surf * m.density_radial(r) * std::pow(r, m.dim - 1) / (1.0 + r * r);
    };

    DalangReport rep;
    rep.cutoffs = cutoffs;
    quad::Options opts;
    opts.abs_tol = 1e-11;
    opts.rel_tol = 1e-11;
    double prev = 0.0, lower = 0.0, total = 0.0;
    for (double R : cutoffs) {
        total += quad::integrate(radial, lower, R, opts);
        rep.values.push_back(total);
        rep.increments.push_back(total - prev);
        prev = total;
        lower = R;
    }
    const std::size_t n = rep.increments.size();
    rep.ratio = rep.increments[n - 1] / rep.increments[n - 2];
    rep.converges = rep.ratio < 0.9;
    rep.value = rep.values.back();
    return rep;
}

}  // namespace shen::spectral
