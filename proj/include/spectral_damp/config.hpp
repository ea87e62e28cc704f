#pragma once

// Flat key = value experiment configuration. '#' starts a comment; list
// values are comma separated. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spectral_damp/harness.hpp"
#include "spectral_damp/rmt.hpp"

namespace spectral_damp {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Config {
public:
    static Config parse(std::string_view text, const std::string& source = "<string>");
    static Config load(const std::filesystem::path& path);

    /// Every key accepted by parse().
    static const std::vector<std::string>& known_keys();

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<std::uint64_t> get_seeds(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::string where(const std::string& key) const;

    std::map<std::string, std::string> values_;
    std::string source_;
};

/// Requires `seeds`.
ExperimentSpec experiment_from_config(const Config& cfg);

struct RmtConfig {
    SpikedEnsembleSpec ensemble;
    std::size_t n_seeds = 20;
    std::uint64_t seed = 0;
};
RmtConfig rmt_from_config(const Config& cfg);

struct StabilityConfig {
    std::string target = "quadratic";  // quadratic | preconditioned | adam | sgd
    std::vector<double> grid;
    double lambda_max = 4.0;
    std::size_t dim = 50;
    long steps = 1000;
    double damping = 1e-8;
    std::uint64_t seed = 0;
};
StabilityConfig stability_from_config(const Config& cfg);

}  // namespace spectral_damp
