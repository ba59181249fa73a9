#pragma once
// Experiment drivers: data profiles, log-log fits, the drift sweep, lifespan
// probe, Lipschitz test, Strichartz tracker and the normal form battery.

#include "kgnf/config.hpp"
#include "kgnf/energy.hpp"
#include "kgnf/evolve.hpp"
#include "kgnf/model.hpp"
#include "kgnf/normalform.hpp"
#include "kgnf/spectral.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

namespace kgnf {

inline constexpr int kSchemaVersion = 1;

//--------------------------------------------------------------------------
// Data
//--------------------------------------------------------------------------

/// mt19937_64 with doubles built from the top 53 bits.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

private:
    std::mt19937_64 gen_;
};

struct ProfileParams {
    int high_mode = 30;
    double high_amp = 1e-4;
    bool dealias = true;
};

/// Initial data of amplitude eps. Profiles:
///   single     u = eps cos(x)
///   twomode    u = eps (cos x + sin(2x)/2), u_t = 0.3 eps sin x
///   random     modes 1..8, amplitude k^-2, random phases; sup|u| = eps
///   localized  two Gaussian bumps (width ~2) in the central quarter, u and u_t
///   lowhigh    u = eps (cos x + a (cos Kx + sin (K+1)x))
/// x is measured in units of L / (2 pi).
State make_data(const std::string& profile, const Grid& grid, double eps, std::uint64_t seed,
                const ProfileParams& pp = {});

/// Real, dealiased field with random phases on modes 1..8, unit H^1 x L^2 norm.
State random_direction(const Grid& grid, std::uint64_t seed);
/// Random phases on modes kmin..n/3, flat spectrum, unit H^1 x L^2 norm.
State high_direction(const Grid& grid, std::uint64_t seed, int kmin);

/// Signed ratios (E - E_ref) / (A_2 E_ref) for the four corrected energies at
/// background u. nf is probed with w, lin with v; para and s use u itself.
struct EquivalenceConstants {
    double nf = 0.0, para = 0.0, lin = 0.0, s = 0.0;
};
EquivalenceConstants equivalence_constants(const EnergyContext& c1, const EnergyContext& cs, const State& u,
                                           const State& v, const State& w);

//--------------------------------------------------------------------------
// Fits and derivatives
//--------------------------------------------------------------------------

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< RMS of the natural-log residuals
    int points = 0;
    bool valid = false;     ///< at least three positive points
};

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Central differences of uniformly sampled data with one Richardson step
/// ((4 D_h - D_2h) / 3); entries within two samples of either end are NaN.
std::vector<double> richardson_derivative(const std::vector<double>& y, double h);

//--------------------------------------------------------------------------
// Reports
//--------------------------------------------------------------------------

struct Gate {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct CsvTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct SweepPoint {
    double eps = 0.0;
    std::map<std::string, double> metrics;
    bool valid = true;
    std::string note;
};

struct SweepReport {
    std::string experiment;
    std::string model;
    std::vector<double> epsilons;
    std::vector<SweepPoint> points;
    std::map<std::string, SlopeFit> slopes;
    std::vector<Gate> gates;
    std::vector<CsvTable> tables;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    double runtime = 0.0;

    bool all_pass() const;
    nlohmann::ordered_json to_json(const RunConfig& cfg) const;
};

/// Write "# schema_version", "# config_hash", a header line and the rows.
void write_csv(const std::string& path, const CsvTable& t, const RunConfig& cfg);

/// Worker count: KGNF_THREADS if set, else cfg.threads, else the hardware.
int worker_count(const RunConfig& cfg);
/// Run jobs 0..count-1 on a small pool; exceptions are rethrown after join.
void parallel_for(int count, int workers, const std::function<void(int)>& job);

//--------------------------------------------------------------------------
// Experiments
//--------------------------------------------------------------------------

Grid config_grid(const RunConfig& cfg);
double config_dt(const RunConfig& cfg, const State& u0, const ModelSpec& model);

/// Energy trace along one trajectory.
struct EnergyTrace {
    std::vector<double> t, E1, E1para, Es, A0, A2, A3, Hs;
    std::vector<double> dE1, dE1para, dEs;
    bool blow_up = false;
};

EnergyTrace energy_trace(const RunConfig& cfg, const ModelSpec& model, double eps);

/// Single trajectory at eps[0]: energies, norms and the reality residue.
SweepReport evolve_run(const RunConfig& cfg);
SweepReport drift_sweep(const RunConfig& cfg);
SweepReport lifespan_probe(const RunConfig& cfg);
SweepReport lipschitz_test(const RunConfig& cfg);
SweepReport strichartz_tracker(const RunConfig& cfg);

/// Residual and identity battery for one model.
struct NfBattery {
    std::string model;
    double ab_residual = 0.0;
    double c_residual = 0.0;
    double abcd_residual = 0.0;
    double delta_agreement = 0.0;
    double lead_c = 0.0;        ///< |c01 xi - c02 - G11t/2|
    double lead_ab = 0.0;       ///< |a0 xi + b0 (xi^2+m) - G11u/4 - i G11x xi/4|
    double kappa_identity = 0.0;
    bool parity_exact = true;
    std::map<std::string, double> decay;  ///< fitted exponents (absent when the remainder vanishes)
};

NfBattery nf_battery(const ModelSpec& model, int samples, std::uint64_t seed, const std::string& fault = "none");
SweepReport nf_verify(const RunConfig& cfg);

}  // namespace kgnf
