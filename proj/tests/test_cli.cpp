#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kgnf/cli.hpp"
#include "kgnf/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace kgnf;

namespace {

std::string write_temp(const std::string& name, const std::string& text) {
    const auto p = std::filesystem::temp_directory_path() / ("kgnf_cli_" + name);
    std::ofstream(p) << text;
    return p.string();
}

int cli(std::vector<std::string> args) {
    args.insert(args.begin(), "kgnf");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string config_error(const std::string& text) {
    try {
        RunConfig c;
        read_config_text(c, text);
        validate(c);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("minimal file fills defaults and echoes every key") {
    const std::string path = write_temp("min.cfg", "# minimal\nmodel = g11u\nn = 256\n");
    const RunConfig c = parse_config(path, {});
    const RunConfig d;
    CHECK(c.model == "g11u");
    CHECK(c.n == 256);
    CHECK(c.eps == d.eps);
    CHECK(c.dt == d.dt);
    const auto e = c.echo();
    for (const auto& k : config_keys()) CHECK(e.contains(k));
    CHECK(e.contains("coef"));
    std::filesystem::remove(path);
}

TEST_CASE("flags override file values") {
    const std::string path = write_temp("eps.cfg", "eps = 0.02, 0.01, 0.005\nL = 64pi\n");
    const RunConfig c = parse_config(path, {{"eps", "0.01"}});
    CHECK(c.eps == std::vector<double>{0.01});
    CHECK(c.L == doctest::Approx(64 * 3.14159265358979323846));
    std::filesystem::remove(path);
}

TEST_CASE("errors name the offending key") {
    const std::string pow2 = config_error("n = 100\n");
    CHECK(pow2.find("'n'") != std::string::npos);
    CHECK(pow2.find("power of two") != std::string::npos);
    CHECK(config_error("bogus = 1\n").find("bogus") != std::string::npos);
    CHECK(config_error("dt = fast\n").find("'dt'") != std::string::npos);
    CHECK(config_error("mass = -1\n").find("'mass'") != std::string::npos);
    CHECK(config_error("profile = zigzag\n").find("'profile'") != std::string::npos);
    CHECK(config_error("coef.g11:u = 1\n").find("coef") != std::string::npos);
    CHECK(config_error("model = custom\ncoef.g11:u = 1\ncoef.f:u^2 = 0.5\n").empty());
    CHECK(config_error("just words\n").find("line 1") != std::string::npos);
}

TEST_CASE("hash ignores output path and threads, tracks everything else") {
    RunConfig a, b;
    b.out = "/tmp/x";
    b.threads = 7;
    CHECK(a.hash() == b.hash());
    b.seed = 2;
    CHECK(a.hash() != b.hash());
    CHECK(a.hash().size() == 16);
}

TEST_CASE("dispatch exit codes") {
    RunConfig c;
    c.command = "nf-check";
    c.model = "flat";
    c.samples = 100;
    std::ostringstream out;
    CHECK(dispatch(c, out) == kExitPass);
    CHECK(out.str().find("\"all_pass\": true") != std::string::npos);

    RunConfig f = c;
    f.model = "g11u";
    f.fault = "a0";
    std::ostringstream fo;
    CHECK(dispatch(f, fo) == kExitGateFail);

    RunConfig d;
    d.command = "drift-sweep";
    d.n = 64;
    d.T = 0.5;
    d.eps = {0.02, 0.01};
    std::ostringstream dout;
    CHECK(dispatch(d, dout) != kExitPass);

    RunConfig s;
    s.command = "strichartz";
    s.n = 64;
    std::ostringstream sout;
    CHECK(dispatch(s, sout) == kExitFailure);
    CHECK(sout.str().find("\"error\"") != std::string::npos);
}

TEST_CASE("command line front end") {
    CHECK(cli({"nf-check", "--model", "flat", "--samples", "50"}) == kExitPass);
    CHECK(cli({"nf-check", "--model", "g11u", "--samples", "50", "--fault", "a0"}) == kExitGateFail);
    CHECK(cli({"nf-check", "--n", "100"}) == kExitConfig);
    CHECK(cli({"nf-check", "--no-such-flag", "1"}) == kExitConfig);
    CHECK(cli({"warp-drive"}) == kExitConfig);
    CHECK(cli({"nf-check", "--model", "custom", "--coef", "g11:u=1", "--samples", "50"}) == kExitPass);
    CHECK(cli({"nf-check", "--model", "custom", "--coef", "g11:u"}) == kExitConfig);

    const auto dir = std::filesystem::temp_directory_path() / "kgnf_cli_out";
    std::filesystem::create_directories(dir);
    const std::string stem = (dir / "run").string();
    CHECK(cli({"evolve", "--model", "g11u", "--n", "64", "--T", "0.1", "--eps", "0.01", "--out", stem}) ==
          kExitPass);
    CHECK(std::filesystem::exists(stem + ".json"));
    CHECK(std::filesystem::exists(stem + "_trajectory.csv"));
    std::ifstream in(stem + "_trajectory.csv");
    std::string first;
    std::getline(in, first);
    CHECK(first == "# schema_version=1");
    std::filesystem::remove_all(dir);
}
