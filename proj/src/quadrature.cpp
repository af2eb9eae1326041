#include "shen/quadrature.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace shen::quad {

namespace {

void disable_gsl_abort() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

double call_thunk(double x, void* params) {
    return (*static_cast<const std::function<double(double)>*>(params))(x);
}

using Workspace =
    std::unique_ptr<gsl_integration_workspace, decltype(&gsl_integration_workspace_free)>;

Workspace make_workspace(int limit) {
    return {gsl_integration_workspace_alloc(static_cast<std::size_t>(limit)),
            &gsl_integration_workspace_free};
}

void check_status(int status, const char* what) {
    // Roundoff/extrapolation warnings still return the best estimate.
    if (status == GSL_SUCCESS || status == GSL_EROUND || status == GSL_EDIVERGE) return;
    if (status == GSL_EMAXITER) return;
    throw std::runtime_error(std::string(what) + ": " + gsl_strerror(status));
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts) {
    disable_gsl_abort();
    auto ws = make_workspace(opts.limit);
    gsl_function gf{&call_thunk, const_cast<std::function<double(double)>*>(&f)};
    double result = 0.0, abserr = 0.0;
    const int status =
        gsl_integration_qags(&gf, a, b, opts.abs_tol, opts.rel_tol,
                             static_cast<std::size_t>(opts.limit), ws.get(), &result, &abserr);
    check_status(status, "integrate");
    return result;
}

double integrate_to_inf(const std::function<double(double)>& f, double a,
                        const Options& opts) {
    disable_gsl_abort();
    auto ws = make_workspace(opts.limit);
    gsl_function gf{&call_thunk, const_cast<std::function<double(double)>*>(&f)};
    double result = 0.0, abserr = 0.0;
    const int status =
        gsl_integration_qagiu(&gf, a, opts.abs_tol, opts.rel_tol,
                              static_cast<std::size_t>(opts.limit), ws.get(), &result, &abserr);
    check_status(status, "integrate_to_inf");
    return result;
}

}  // namespace shen::quad
