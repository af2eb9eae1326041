#include "shen/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace shen::report {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void ScalingReport::finalize(double expected, double tol) {
    expected_slope = expected;
    slope_tol = tol;
    // A quantity that vanishes at some width (e.g. a drift term under b = 0)
    // has no log-log exponent; report it as a non-pass instead of fitting.
    for (double e : estimate) {
        if (!(e > 0.0)) {
            fit = stats::LinFit{};
            fit.points = estimate.size();
            pass = false;
            return;
        }
    }
    fit = stats::loglog_fit(scale, estimate);
    pass = std::abs(fit.slope - expected) <= tol;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size())
        throw std::invalid_argument("csv: header/column count mismatch");
    std::size_t rows = 0;
    for (const auto& c : columns) rows = std::max(rows, c.size());
    for (const auto& c : columns)
        if (c.size() != rows) throw std::invalid_argument("csv: ragged columns");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (std::size_t j = 0; j < header.size(); ++j)
        out << (j ? "," : "") << header[j];
    out << "\n";
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j)
            out << (j ? "," : "") << fmt(columns[j][i]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_scaling_csv(const std::string& path, const ScalingReport& r) {
    write_csv(path, {"delta", "scale", "estimate", "stderr"},
              {r.delta, r.scale, r.estimate, r.stderr_});
}

std::string scaling_json(const ScalingReport& r, std::uint64_t config_hash) {
    nlohmann::json j;
    j["quantity"] = r.quantity;
    j["slope"] = r.fit.slope;
    j["ci_low"] = r.fit.ci_low;
    j["ci_high"] = r.fit.ci_high;
    j["r2"] = r.fit.r2;
    j["expected_slope"] = r.expected_slope;
    j["slope_tol"] = r.slope_tol;
    j["pass"] = r.pass;
    j["config_hash"] = config_hash;
    j["points"] = nlohmann::json::array();
    for (std::size_t i = 0; i < r.scale.size(); ++i) {
        j["points"].push_back({{"delta", r.delta.size() > i ? r.delta[i] : 0.0},
                               {"scale", r.scale[i]},
                               {"estimate", r.estimate[i]},
                               {"stderr", r.stderr_.size() > i ? r.stderr_[i] : 0.0}});
    }
    return j.dump(2) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::uint64_t fnv1a(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a(const std::string& text) { return fnv1a(text.data(), text.size()); }

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for hashing: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

void RunManifest::add_artifact(const std::string& file) {
    ManifestEntry e;
    e.path = file;
    std::ifstream in(file, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("manifest: missing artifact " + file);
    e.bytes = static_cast<std::uint64_t>(in.tellg());
    in.close();
    e.checksum = hash_file(file);
    artifacts.push_back(std::move(e));
}

void RunManifest::write(const std::string& path) const {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["timestamp"] = timestamp;
    j["artifacts"] = nlohmann::json::array();
    for (const auto& a : artifacts)
        j["artifacts"].push_back(
            {{"path", a.path}, {"bytes", a.bytes}, {"checksum", a.checksum}});
    j["checks"] = nlohmann::json::array();
    for (const auto& c : checks) j["checks"].push_back({{"name", c.first}, {"pass", c.second}});
    write_text(path, j.dump(2) + "\n");
}

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace shen::report
