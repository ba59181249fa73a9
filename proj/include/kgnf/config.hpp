#pragma once
// Run configuration: a plain key = value file, flag overrides, validation,
// the resolved echo and its hash.

#include "kgnf/model.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace kgnf {

/// Any problem with a configuration value; the message names the key.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;
    std::string model = "g11u";
    double mass = 1.0;
    std::map<std::string, double> coef;   ///< custom model table, "coef.<channel>:<monomial>"
    int n = 256;
    double L = 6.283185307179586;
    double dt = 1e-3;                     ///< 0 selects half the CFL limit
    double T = 1.0;
    std::vector<double> eps{0.02, 0.01, 0.005};
    double s = 3.0;
    std::string profile = "twomode";
    std::uint64_t seed = 1;
    std::string out;
    bool dealias = true;
    bool skip_conjugation_nf = false;
    int sample_every = 10;
    double window_start = 0.1;
    double theta = 2.0;
    double cap_factor = 50.0;
    double delta = 1e-5;
    double lip_T_factor = 0.1;
    int samples = 1000;
    std::string fault = "none";
    int ensemble = 20;
    std::vector<double> horizons{4.0, 8.0, 16.0};
    double source_T = 8.0;
    int high_mode = 30;
    double high_amp = 1e-4;
    int threads = 0;

    /// Every key with its resolved value, in a fixed order.
    nlohmann::ordered_json echo() const;
    /// FNV-1a 64 of the canonical echo, as 16 hex digits.
    std::string hash() const;
};

/// Keys accepted in files and as --key flags.
const std::vector<std::string>& config_keys();

/// Apply one key/value pair; throws ConfigError naming the key.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
/// Parse the file format: "key = value" lines, '#' comments, blank lines.
void read_config_text(RunConfig& cfg, const std::string& text);
void read_config_file(RunConfig& cfg, const std::string& path);
/// Cross-field validation (power-of-two n, positivity, known profile, ...).
void validate(const RunConfig& cfg);

/// File values first, then overrides in order, then validation.
RunConfig parse_config(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides);

ModelSpec resolve_model(const RunConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace kgnf
