#pragma once

// Shared plumbing: validation reports, global tolerances, deterministic
// sampling helpers and small string/number utilities used across the library.

#include <cstdio>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hynet {

/// Default containment tolerance. Overridable process-wide via the
/// HYNET_TOL environment variable (read once).
inline double global_tol() {
    static const double tol = [] {
        if (const char* s = std::getenv("HYNET_TOL")) {
            char* end = nullptr;
            double v = std::strtod(s, &end);
            if (end != s && v > 0) return v;
        }
        return 1e-9;
    }();
    return tol;
}

/// Half-width of the window used when sampling unbounded coordinates.
inline constexpr double kSampleWindow = 10.0;

/// One finding of a validator. `structural` distinguishes shape/arity
/// problems from sampled semantic failures.
struct ReportItem {
    std::string what;
    double residual = 0.0;
    bool structural = false;
};

struct Report {
    std::vector<ReportItem> failures;
    std::vector<std::string> notes;
    double worst_observed = 0.0;  // largest residual seen, passing or not

    bool ok() const { return failures.empty(); }

    double worst_residual() const {
        double w = 0.0;
        for (const auto& f : failures)
            if (f.residual > w) w = f.residual;
        return w;
    }

    void fail(std::string what, double residual = 0.0, bool structural = false) {
        observe(residual);
        failures.push_back({std::move(what), residual, structural});
    }

    void note(std::string s) { notes.push_back(std::move(s)); }

    void observe(double residual) {
        if (residual > worst_observed && residual < 1e300) worst_observed = residual;
    }

    void merge(const Report& other, const std::string& prefix = "") {
        for (const auto& f : other.failures)
            failures.push_back({prefix + f.what, f.residual, f.structural});
        for (const auto& n : other.notes) notes.push_back(prefix + n);
        observe(other.worst_observed);
    }

    bool has_structural() const {
        for (const auto& f : failures)
            if (f.structural) return true;
        return false;
    }
};

/// Deterministic RNG wrapper; every sampling code path takes one of these
/// seeded explicitly so runs are reproducible.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(eng_);
    }

    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_);
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

/// Prints a double so that parsing it back recovers the same bits.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace hynet
