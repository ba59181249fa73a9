#include "kgnf/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kgnf {

namespace {

const double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Accepts plain numbers and multiples of pi ("2pi", "64*pi", "pi").
double to_double(const std::string& key, const std::string& v) {
    std::string t = trim(v);
    double scale = 1.0;
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
        scale = kPi;
        t = trim(t.substr(0, t.size() - 2));
        if (!t.empty() && t.back() == '*') t = trim(t.substr(0, t.size() - 1));
        if (t.empty()) return scale;
    }
    size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(t, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != t.size() || !std::isfinite(x))
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    return x * scale;
}

long long to_int(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    size_t pos = 0;
    long long x = 0;
    try {
        x = std::stoll(t, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != t.size()) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
    return x;
}

bool to_bool(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (trim(tok).empty()) continue;
        out.push_back(to_double(key, tok));
    }
    if (out.empty()) throw ConfigError("key '" + key + "': expected a comma-separated list of numbers");
    return out;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "command", "model", "mass", "n", "L", "dt", "T", "eps", "s", "profile", "seed", "out",
        "dealias", "skip_conjugation_nf", "sample_every", "window_start", "theta", "cap_factor",
        "delta", "lip_T_factor", "samples", "fault", "ensemble", "horizons", "source_T",
        "high_mode", "high_amp", "threads"};
    return keys;
}

void set_config_value(RunConfig& c, const std::string& rawkey, const std::string& rawval) {
    const std::string key = trim(rawkey);
    const std::string v = trim(rawval);
    if (key.rfind("coef.", 0) == 0) {
        const std::string k = key.substr(5);
        if (k.find(':') == std::string::npos)
            throw ConfigError("key '" + key + "': expected coef.<g01|g11|f>:<monomial>");
        c.coef[k] = to_double(key, v);
        return;
    }
    if (key == "command") c.command = v;
    else if (key == "model") c.model = v;
    else if (key == "mass") c.mass = to_double(key, v);
    else if (key == "n") c.n = static_cast<int>(to_int(key, v));
    else if (key == "L") c.L = to_double(key, v);
    else if (key == "dt") c.dt = to_double(key, v);
    else if (key == "T") c.T = to_double(key, v);
    else if (key == "eps") c.eps = to_list(key, v);
    else if (key == "s") c.s = to_double(key, v);
    else if (key == "profile") c.profile = v;
    else if (key == "seed") {
        const long long x = to_int(key, v);
        if (x < 0) throw ConfigError("key 'seed': must be non-negative");
        c.seed = static_cast<std::uint64_t>(x);
    } else if (key == "out") c.out = v;
    else if (key == "dealias") c.dealias = to_bool(key, v);
    else if (key == "skip_conjugation_nf") c.skip_conjugation_nf = to_bool(key, v);
    else if (key == "sample_every") c.sample_every = static_cast<int>(to_int(key, v));
    else if (key == "window_start") c.window_start = to_double(key, v);
    else if (key == "theta") c.theta = to_double(key, v);
    else if (key == "cap_factor") c.cap_factor = to_double(key, v);
    else if (key == "delta") c.delta = to_double(key, v);
    else if (key == "lip_T_factor") c.lip_T_factor = to_double(key, v);
    else if (key == "samples") c.samples = static_cast<int>(to_int(key, v));
    else if (key == "fault") c.fault = v;
    else if (key == "ensemble") c.ensemble = static_cast<int>(to_int(key, v));
    else if (key == "horizons") c.horizons = to_list(key, v);
    else if (key == "source_T") c.source_T = to_double(key, v);
    else if (key == "high_mode") c.high_mode = static_cast<int>(to_int(key, v));
    else if (key == "high_amp") c.high_amp = to_double(key, v);
    else if (key == "threads") c.threads = static_cast<int>(to_int(key, v));
    else throw ConfigError("unknown config key '" + key + "'");
}

void read_config_text(RunConfig& cfg, const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        set_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
    }
}

void read_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    read_config_text(cfg, buf.str());
}

void validate(const RunConfig& c) {
    auto positive = [](const char* key, double x) {
        if (!(x > 0.0)) throw ConfigError(std::string("key '") + key + "': must be positive");
    };
    if (c.n < 16 || (c.n & (c.n - 1)) != 0)
        throw ConfigError("key 'n': must be a power of two >= 16 (got " + std::to_string(c.n) + ")");
    positive("mass", c.mass);
    positive("L", c.L);
    if (c.dt < 0.0) throw ConfigError("key 'dt': must be positive, or 0 for the automatic CFL step");
    positive("T", c.T);
    for (double e : c.eps) positive("eps", e);
    if (c.s < 1.0) throw ConfigError("key 's': must be >= 1");
    if (c.sample_every < 1) throw ConfigError("key 'sample_every': must be >= 1");
    if (c.window_start < 0.0 || (c.command == "drift-sweep" && c.window_start >= c.T))
        throw ConfigError("key 'window_start': must lie in [0, T)");
    if (!(c.theta > 1.0)) throw ConfigError("key 'theta': must exceed 1");
    positive("cap_factor", c.cap_factor);
    positive("delta", c.delta);
    positive("lip_T_factor", c.lip_T_factor);
    if (c.samples < 1) throw ConfigError("key 'samples': must be >= 1");
    if (c.ensemble < 1) throw ConfigError("key 'ensemble': must be >= 1");
    for (double h : c.horizons) positive("horizons", h);
    positive("source_T", c.source_T);
    if (c.high_mode < 2 || (c.profile == "lowhigh" && c.high_mode + 1 >= c.n / 3))
        throw ConfigError("key 'high_mode': must lie in [2, n/3 - 1)");
    positive("high_amp", c.high_amp);
    if (c.threads < 0) throw ConfigError("key 'threads': must be >= 0");
    static const std::vector<std::string> profiles = {"single", "twomode", "random", "localized", "lowhigh"};
    if (std::find(profiles.begin(), profiles.end(), c.profile) == profiles.end())
        throw ConfigError("key 'profile': unknown profile '" + c.profile + "'");
    static const std::vector<std::string> faults = {"none", "a0"};
    if (std::find(faults.begin(), faults.end(), c.fault) == faults.end())
        throw ConfigError("key 'fault': unknown fault '" + c.fault + "'");
    if (c.model != "custom") {
        const auto names = gallery_names();
        if (std::find(names.begin(), names.end(), c.model) == names.end())
            throw ConfigError("key 'model': unknown model '" + c.model + "'");
        if (!c.coef.empty()) throw ConfigError("key 'coef.*': coefficients require model = custom");
    }
    try {
        (void)resolve_model(c);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("key 'model': ") + e.what());
    }
}

RunConfig parse_config(const std::string& path,
                       const std::vector<std::pair<std::string, std::string>>& overrides) {
    RunConfig cfg;
    if (!path.empty()) read_config_file(cfg, path);
    for (const auto& [k, v] : overrides) set_config_value(cfg, k, v);
    validate(cfg);
    return cfg;
}

ModelSpec resolve_model(const RunConfig& cfg) {
    ModelSpec m = cfg.model == "custom" ? polynomial_model("custom", cfg.mass, cfg.coef) : gallery_model(cfg.model, cfg.mass);
    m.dealias = cfg.dealias;
    return m;
}

nlohmann::ordered_json RunConfig::echo() const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["model"] = model;
    j["mass"] = mass;
    nlohmann::ordered_json cj = nlohmann::ordered_json::object();
    for (const auto& [k, v] : coef) cj[k] = v;
    j["coef"] = cj;
    j["n"] = n;
    j["L"] = L;
    j["dt"] = dt;
    j["T"] = T;
    j["eps"] = eps;
    j["s"] = s;
    j["profile"] = profile;
    j["seed"] = seed;
    j["out"] = out;
    j["dealias"] = dealias;
    j["skip_conjugation_nf"] = skip_conjugation_nf;
    j["sample_every"] = sample_every;
    j["window_start"] = window_start;
    j["theta"] = theta;
    j["cap_factor"] = cap_factor;
    j["delta"] = delta;
    j["lip_T_factor"] = lip_T_factor;
    j["samples"] = samples;
    j["fault"] = fault;
    j["ensemble"] = ensemble;
    j["horizons"] = horizons;
    j["source_T"] = source_T;
    j["high_mode"] = high_mode;
    j["high_amp"] = high_amp;
    j["threads"] = threads;
    return j;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string RunConfig::hash() const {
    // Canonical text: key=value lines, numbers at full precision. The output
    // path and thread count do not change results and are left out.
    std::string text;
    const auto e = echo();
    for (const auto& [k, v] : e.items()) {
        if (k == "out" || k == "threads") continue;
        std::string val;
        if (v.is_number_float()) val = num(v.get<double>());
        else if (v.is_array()) {
            for (const auto& x : v) val += num(x.get<double>()) + ",";
        } else if (v.is_object()) {
            for (const auto& [ck, cv] : v.items()) val += ck + ":" + num(cv.get<double>()) + ";";
        } else val = v.dump();
        text += k + "=" + val + "\n";
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

}  // namespace kgnf
