#include "kgnf/cli.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

namespace kgnf {

namespace {

nlohmann::ordered_json error_record(const std::string& command, const std::string& type, const std::string& msg) {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = command;
    j["error"] = {{"type", type}, {"message", msg}};
    return j;
}

// "runs/x.csv" -> "runs/x"
std::string stem_of(const std::string& out) {
    for (const char* ext : {".csv", ".json"}) {
        const std::string e(ext);
        if (out.size() > e.size() && out.compare(out.size() - e.size(), e.size(), e) == 0)
            return out.substr(0, out.size() - e.size());
    }
    return out;
}

bool ends_with_csv(const std::string& s) { return s.size() > 4 && s.compare(s.size() - 4, 4, ".csv") == 0; }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write '" + path + "'");
    f << text << "\n";
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> cmds = {"nf-check", "evolve", "drift-sweep", "lifespan", "lipschitz",
                                                  "strichartz"};
    return cmds;
}

SweepReport run_experiment(const RunConfig& cfg) {
    if (cfg.command == "nf-check") return nf_verify(cfg);
    if (cfg.command == "evolve") return evolve_run(cfg);
    if (cfg.command == "drift-sweep") return drift_sweep(cfg);
    if (cfg.command == "lifespan") return lifespan_probe(cfg);
    if (cfg.command == "lipschitz") return lipschitz_test(cfg);
    if (cfg.command == "strichartz") return strichartz_tracker(cfg);
    throw ConfigError("key 'command': unknown subcommand '" + cfg.command + "'");
}

int dispatch(const RunConfig& cfg, std::ostream& out) {
    const std::string stem = stem_of(cfg.out);
    try {
        const SweepReport rep = run_experiment(cfg);
        const auto j = rep.to_json(cfg);
        if (!cfg.out.empty()) {
            write_text(stem + ".json", j.dump(2));
            for (const auto& t : rep.tables) {
                const std::string path =
                    rep.tables.size() == 1 && ends_with_csv(cfg.out) ? cfg.out : stem + "_" + t.name + ".csv";
                write_csv(path, t, cfg);
            }
        }
        out << j.dump(2) << "\n";
        return rep.all_pass() ? kExitPass : kExitGateFail;
    } catch (const ConfigError& e) {
        const auto j = error_record(cfg.command, "config", e.what());
        out << j.dump(2) << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        const auto j = error_record(cfg.command, "failure", e.what());
        if (!cfg.out.empty()) {
            try {
                write_text(stem + ".json", j.dump(2));
            } catch (const std::exception&) {
            }
        }
        out << j.dump(2) << "\n";
        return kExitFailure;
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Normal form energies for quasilinear Klein-Gordon equations in one dimension", "kgnf"};
    std::string command, config_path;
    std::vector<std::string> coefs;
    bool skip_conj = false, no_dealias = false;
    app.add_option("command", command, "Subcommand")
        ->required()
        ->check(CLI::IsMember(subcommands()));
    app.add_option("-c,--config", config_path, "Config file (key = value lines)");
    app.add_option("--coef", coefs, "Custom model coefficient, <g01|g11|f>:<monomial>=<value>; repeatable");
    app.add_flag("--skip-conjugation-nf", skip_conj, "Ablation: drop the conjugation normal form in E^s");
    app.add_flag("--no-dealias", no_dealias, "Disable dealiasing of initial data");

    // Every scalar config key is also a --key flag.
    std::vector<std::string> values(config_keys().size());
    for (size_t i = 0; i < config_keys().size(); ++i) {
        const std::string& k = config_keys()[i];
        if (k == "command" || k == "skip_conjugation_nf" || k == "dealias") continue;
        std::string names = "--" + k;
        std::string dashed = k;
        std::replace(dashed.begin(), dashed.end(), '_', '-');
        if (dashed != k) names += ",--" + dashed;
        app.add_option(names, values[i], "Override '" + k + "'");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitPass : kExitConfig;
    }

    std::vector<std::pair<std::string, std::string>> overrides{{"command", command}};
    for (size_t i = 0; i < config_keys().size(); ++i) {
        const std::string& k = config_keys()[i];
        std::string names = "--" + k;
        if (k == "command" || k == "skip_conjugation_nf" || k == "dealias") continue;
        if (app.get_option(names)->count() > 0) overrides.emplace_back(k, values[i]);
    }
    for (const auto& c : coefs) {
        const auto eq = c.find('=');
        if (eq == std::string::npos) {
            std::cout << error_record(command, "config", "flag --coef: expected <channel>:<monomial>=<value>").dump(2)
                      << "\n";
            return kExitConfig;
        }
        overrides.emplace_back("coef." + c.substr(0, eq), c.substr(eq + 1));
    }
    if (skip_conj) overrides.emplace_back("skip_conjugation_nf", "true");
    if (no_dealias) overrides.emplace_back("dealias", "false");

    RunConfig cfg;
    try {
        cfg = parse_config(config_path, overrides);
    } catch (const ConfigError& e) {
        std::cout << error_record(command, "config", e.what()).dump(2) << "\n";
        return kExitConfig;
    }
    return dispatch(cfg, std::cout);
}

}  // namespace kgnf
