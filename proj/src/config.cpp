#include "shen/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "shen/noise.hpp"
#include "shen/report.hpp"

namespace shen::config {

namespace {

using nlohmann::json;
constexpr double kPi = 3.14159265358979323846;

const std::vector<double> kDalangCutoffs = {10.0, 100.0, 1000.0, 10000.0};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void check_keys(const json& j, const std::string& scope,
                const std::set<std::string>& allowed, std::vector<std::string>& errors) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            errors.push_back(scope + ": unknown key '" + it.key() + "'");
    }
}

bool get_number(const json& j, const char* key, double& out, const std::string& scope,
                std::vector<std::string>& errors) {
    if (!j.contains(key)) return false;
    if (!j.at(key).is_number()) {
        errors.push_back(scope + "." + key + ": must be a number");
        return false;
    }
    out = j.at(key).get<double>();
    return true;
}

bool get_integer(const json& j, const char* key, long long& out, const std::string& scope,
                 std::vector<std::string>& errors) {
    if (!j.contains(key)) return false;
    if (!j.at(key).is_number_integer() && !j.at(key).is_number_unsigned()) {
        errors.push_back(scope + "." + key + ": must be an integer");
        return false;
    }
    out = j.at(key).get<long long>();
    return true;
}

bool is_power_of_two(std::size_t v) { return v > 0 && (v & (v - 1)) == 0; }

std::string family_name(spectral::Family f) {
    switch (f) {
        case spectral::Family::WhiteNoise: return "white";
        case spectral::Family::Riesz: return "riesz";
        case spectral::Family::Bessel: return "bessel";
        case spectral::Family::ExponentialCov: return "expcov";
    }
    return "?";
}

const char* param_key(spectral::Family f) {
    switch (f) {
        case spectral::Family::Riesz: return "eta";
        case spectral::Family::Bessel: return "order";
        case spectral::Family::ExponentialCov: return "scale";
        default: return nullptr;
    }
}

}  // namespace

int ExperimentConfig::steps() const {
    const double raw = T / dt;
    return static_cast<int>(std::llround(raw));
}

std::size_t ExperimentConfig::observation_site() const {
    if (x_obs != static_cast<std::size_t>(-1)) return x_obs;
    const std::size_t n = static_cast<std::size_t>(grid.n);
    return grid.dim == 1 ? n / 2 : (n / 2) * n + n / 2;
}

Field ExperimentConfig::build_u0() const {
    const std::size_t sites = grid.sites();
    if (u0_type == "constant") {
        if (u0_value == 0.0) return {};
        return Field(sites, u0_value);
    }
    if (u0_type == "sine") {
        Field f(sites);
        const double k = 2.0 * kPi * u0_mode / grid.L;
        for (std::size_t j = 0; j < sites; ++j) {
            const auto x = grid.coord(j);
            f[j] = u0_value * std::sin(k * x[0]);
        }
        return f;
    }
    if (u0_type == "delta") {
        Field f(sites, 0.0);
        f[u0_site] = u0_value / grid.cell();
        return f;
    }
    if (u0_type == "file") return noise::read_field_dump(u0_file);
    throw std::invalid_argument("unknown u0 type: " + u0_type);
}

solver::SolverConfig ExperimentConfig::solver() const {
    solver::SolverConfig s;
    s.grid = grid;
    s.measure = measure;
    s.coeffs = coeffs::by_name(coefficients);
    s.dt = dt;
    s.steps = steps();
    s.u0 = build_u0();
    s.x_obs = observation_site();
    s.seed = seed;
    return s;
}

std::string ExperimentConfig::canonical_json() const {
    json j;
    j["grid"] = {{"dim", grid.dim}, {"n", grid.n}, {"L", grid.L}};
    json m;
    m["family"] = family_name(measure.family);
    if (const char* k = param_key(measure.family)) m[k] = measure.param;
    j["measure"] = m;
    j["coefficients"] = coefficients;
    json u0;
    u0["type"] = u0_type;
    if (u0_type == "constant" || u0_type == "sine" || u0_type == "delta")
        u0["value"] = u0_value;
    if (u0_type == "sine") u0["mode"] = u0_mode;
    if (u0_type == "delta") u0["site"] = u0_site;
    if (u0_type == "file") u0["path"] = u0_file;
    j["u0"] = u0;
    j["dt"] = dt;
    j["T"] = T;
    j["x_obs"] = observation_site();
    j["paths"] = paths;
    j["seed"] = seed;
    j["out_dir"] = out_dir;
    return j.dump(2) + "\n";
}

std::uint64_t ExperimentConfig::hash() const { return report::fnv1a(canonical_json()); }

std::string ParseResult::error_text() const {
    std::ostringstream os;
    for (const auto& e : errors) os << e << "\n";
    return os.str();
}

ParseResult parse_config(const std::string& json_text) {
    ParseResult res;
    auto& errors = res.errors;
    auto& c = res.config;

    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& ex) {
        errors.push_back(std::string("json: ") + ex.what());
        return res;
    }
    if (!j.is_object()) {
        errors.push_back("json: top level must be an object");
        return res;
    }

    check_keys(j, "config",
               {"grid", "measure", "coefficients", "u0", "dt", "T", "x_obs", "paths", "seed",
                "out_dir"},
               errors);

    if (j.contains("grid")) {
        const json& g = j.at("grid");
        if (!g.is_object()) {
            errors.push_back("grid: must be an object");
        } else {
            check_keys(g, "grid", {"dim", "n", "L"}, errors);
            long long v = 0;
            if (get_integer(g, "dim", v, "grid", errors)) c.grid.dim = static_cast<int>(v);
            if (get_integer(g, "n", v, "grid", errors)) c.grid.n = static_cast<int>(v);
            double L = 0.0;
            if (get_number(g, "L", L, "grid", errors)) c.grid.L = L;
        }
    }
    if (c.grid.dim != 1 && c.grid.dim != 2) errors.push_back("grid.dim: must be 1 or 2");
    if (!is_power_of_two(static_cast<std::size_t>(std::max(c.grid.n, 0))))
        errors.push_back("grid.n: must be a positive power of two");
    if (!(c.grid.L > 0.0)) errors.push_back("grid.L: must be positive");

    if (j.contains("measure")) {
        const json& m = j.at("measure");
        if (!m.is_object()) {
            errors.push_back("measure: must be an object");
        } else {
            check_keys(m, "measure", {"family", "eta", "order", "scale"}, errors);
            std::string fam = m.value("family", std::string("white"));
            double eta = 0.0, order = 0.0, scale = 0.0;
            const bool has_eta = get_number(m, "eta", eta, "measure", errors);
            const bool has_order = get_number(m, "order", order, "measure", errors);
            const bool has_scale = get_number(m, "scale", scale, "measure", errors);
            const int dim = (c.grid.dim == 1 || c.grid.dim == 2) ? c.grid.dim : 1;
            if (fam == "white") {
                c.measure = spectral::SpectralMeasure{spectral::Family::WhiteNoise, dim, 0.0};
                if (has_eta || has_order || has_scale)
                    errors.push_back("measure: white takes no parameter");
            } else if (fam == "riesz") {
                if (!has_eta) errors.push_back("measure.eta: required for riesz");
                c.measure = spectral::SpectralMeasure{spectral::Family::Riesz, dim, eta};
            } else if (fam == "bessel") {
                if (!has_order) errors.push_back("measure.order: required for bessel");
                c.measure = spectral::SpectralMeasure{spectral::Family::Bessel, dim, order};
            } else if (fam == "expcov") {
                if (!has_scale) errors.push_back("measure.scale: required for expcov");
                c.measure =
                    spectral::SpectralMeasure{spectral::Family::ExponentialCov, dim, scale};
            } else {
                errors.push_back("measure.family: unknown family '" + fam + "'");
            }
        }
    } else {
        c.measure.dim = (c.grid.dim == 1 || c.grid.dim == 2) ? c.grid.dim : 1;
    }

    if (j.contains("coefficients")) {
        if (!j.at("coefficients").is_string()) {
            errors.push_back("coefficients: must be a preset name");
        } else {
            c.coefficients = j.at("coefficients").get<std::string>();
        }
    }
    try {
        coeffs::by_name(c.coefficients);
    } catch (const std::exception&) {
        errors.push_back("coefficients: unknown preset '" + c.coefficients + "'");
    }

    if (j.contains("u0")) {
        const json& u = j.at("u0");
        if (!u.is_object()) {
            errors.push_back("u0: must be an object");
        } else {
            check_keys(u, "u0", {"type", "value", "mode", "site", "path"}, errors);
            c.u0_type = u.value("type", std::string("constant"));
            double v = 0.0;
            if (get_number(u, "value", v, "u0", errors)) c.u0_value = v;
            long long iv = 0;
            if (get_integer(u, "mode", iv, "u0", errors)) c.u0_mode = static_cast<int>(iv);
            if (get_integer(u, "site", iv, "u0", errors))
                c.u0_site = static_cast<std::size_t>(iv);
            if (u.contains("path")) {
                if (u.at("path").is_string())
                    c.u0_file = u.at("path").get<std::string>();
                else
                    errors.push_back("u0.path: must be a string");
            }
            if (c.u0_type != "constant" && c.u0_type != "sine" && c.u0_type != "delta" &&
                c.u0_type != "file")
                errors.push_back("u0.type: must be constant, sine, delta, or file");
            if (c.u0_type == "file" && c.u0_file.empty())
                errors.push_back("u0.path: required for file initial data");
        }
    }

    double d = 0.0;
    if (get_number(j, "dt", d, "config", errors)) c.dt = d;
    if (get_number(j, "T", d, "config", errors)) c.T = d;
    long long iv = 0;
    if (get_integer(j, "x_obs", iv, "config", errors)) {
        if (iv < 0)
            errors.push_back("x_obs: must be nonnegative");
        else
            c.x_obs = static_cast<std::size_t>(iv);
    }
    if (get_integer(j, "paths", iv, "config", errors)) {
        if (iv < 1)
            errors.push_back("paths: must be at least 1");
        else
            c.paths = static_cast<std::size_t>(iv);
    }
    if (get_integer(j, "seed", iv, "config", errors)) c.seed = static_cast<std::uint64_t>(iv);
    if (j.contains("out_dir")) {
        if (j.at("out_dir").is_string())
            c.out_dir = j.at("out_dir").get<std::string>();
        else
            errors.push_back("out_dir: must be a string");
    }

    if (!(c.dt > 0.0)) errors.push_back("dt: must be positive");
    if (!(c.T > 0.0)) errors.push_back("T: must be positive");
    if (c.dt > 0.0 && c.T > 0.0) {
        const double raw = c.T / c.dt;
        if (std::abs(raw - std::llround(raw)) > 1e-6 * std::max(1.0, raw))
            errors.push_back("T: must be an integer multiple of dt");
        else if (std::llround(raw) < 1)
            errors.push_back("T: must cover at least one step");
    }
    if (c.grid.dim >= 1 && c.grid.n > 0 && c.grid.L > 0.0 && c.dt > 0.0) {
        const double h = c.grid.L / c.grid.n;
        if (c.dt > 0.25 * h * h * (1.0 + 1e-12))
            errors.push_back("dt: exceeds the stability guard h^2/4 = " + fmt(0.25 * h * h));
    }
    if ((c.grid.dim == 1 || c.grid.dim == 2) && is_power_of_two(static_cast<std::size_t>(
                                                    std::max(c.grid.n, 0)))) {
        if (c.x_obs != static_cast<std::size_t>(-1) && c.x_obs >= c.grid.sites())
            errors.push_back("x_obs: outside the grid");
        if (c.u0_type == "delta" && c.u0_site >= c.grid.sites())
            errors.push_back("u0.site: outside the grid");
    }

    // Dalang's condition, checked with increasing frequency cutoffs
    try {
        c.measure.validate();
        if (c.measure.dim == c.grid.dim) {
            const auto rep = spectral::dalang_integral(c.measure, kDalangCutoffs);
            if (!rep.converges) {
                std::ostringstream os;
                os << "measure: Dalang integral diverges (cutoff/value:";
                for (std::size_t i = 0; i < rep.cutoffs.size(); ++i)
                    os << " " << rep.cutoffs[i] << "/" << fmt(rep.values[i]);
                os << ", increment ratio " << fmt(rep.ratio) << " >= 0.9)";
                errors.push_back(os.str());
            }
        } else {
            errors.push_back("measure: dimension does not match the grid");
        }
    } catch (const std::exception& ex) {
        errors.push_back(std::string("measure: ") + ex.what());
    }

    return res;
}

ParseResult load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        ParseResult res;
        res.errors.push_back("config: cannot open " + path);
        return res;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;  // defaults: d=1, n=128, L=16, dt=h^2/4, T=0.5
    c.paths = 10000;
    const auto split = name.find('-');
    const std::string co = split == std::string::npos ? name : name.substr(0, split);
    const std::string me = split == std::string::npos ? "white" : name.substr(split + 1);

    if (co == "linear")
        c.coefficients = "linear";
    else if (co == "sine")
        c.coefficients = "sine-diffusion";
    else if (co == "drift")
        c.coefficients = "drift";
    else
        throw std::invalid_argument("unknown preset: " + name);

    if (me == "white")
        c.measure = spectral::SpectralMeasure::white(1);
    else if (me == "riesz")
        c.measure = spectral::SpectralMeasure::riesz(0.5, 1);
    else if (me == "expcov")
        c.measure = spectral::SpectralMeasure::exponential_cov(1.0);
    else
        throw std::invalid_argument("unknown preset: " + name);
    return c;
}

std::vector<std::string> preset_names() {
    return {"linear-white", "linear-riesz",  "linear-expcov", "sine-white",
            "sine-riesz",   "sine-expcov",   "drift-white",   "drift-riesz",
            "drift-expcov"};
}

}  // namespace shen::config
