#include "kgnf/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

namespace kgnf {

namespace {

const double kPi = 3.14159265358979323846;
const double kNaN = std::numeric_limits<double>::quiet_NaN();
const cplx I(0.0, 1.0);

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

State from_samples(const Grid& g, const std::vector<double>& u, const std::vector<double>& ut, bool filter = true) {
    Field a = to_spectral(u, g), b = to_spectral(ut, g);
    return filter ? State(dealias(a), dealias(b)) : State(a, b);
}

double spread(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

}  // namespace

//--------------------------------------------------------------------------
// Data profiles
//--------------------------------------------------------------------------

State make_data(const std::string& profile, const Grid& g, double eps, std::uint64_t seed, const ProfileParams& pp) {
    const int n = g.n();
    const double L = g.length();
    const auto xs = grid_points(g);
    std::vector<double> u(static_cast<size_t>(n)), ut(static_cast<size_t>(n));
    auto phase = [&](int j) { return 2.0 * kPi * xs[static_cast<size_t>(j)] / L; };

    if (profile == "single") {
        for (int j = 0; j < n; ++j) u[j] = eps * std::cos(phase(j));
    } else if (profile == "twomode") {
        for (int j = 0; j < n; ++j) {
            const double x = phase(j);
            u[j] = eps * (std::cos(x) + 0.5 * std::sin(2.0 * x));
            ut[j] = 0.3 * eps * std::sin(x);
        }
    } else if (profile == "random") {
        Rng rng(seed);
        for (int k = 1; k <= 8; ++k) {
            const double pu = rng.uniform(0.0, 2.0 * kPi), pv = rng.uniform(0.0, 2.0 * kPi);
            const double a = 1.0 / (k * k);
            for (int j = 0; j < n; ++j) {
                u[j] += a * std::cos(k * phase(j) + pu);
                ut[j] += 0.5 * a * std::cos(k * phase(j) + pv);
            }
        }
        double sup = 0.0;
        for (double v : u) sup = std::max(sup, std::abs(v));
        for (int j = 0; j < n; ++j) {
            u[j] *= eps / sup;
            ut[j] *= eps / sup;
        }
    } else if (profile == "localized") {
        Rng rng(seed);
        for (int b = 0; b < 2; ++b) {
            const double cu = rng.uniform(0.375 * L, 0.625 * L), wu = rng.uniform(1.5, 2.5);
            const double au = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.0);
            const double cv = rng.uniform(0.375 * L, 0.625 * L), wv = rng.uniform(1.5, 2.5);
            const double av = rng.uniform(-0.5, 0.5);
            for (int j = 0; j < n; ++j) {
                const double x = xs[static_cast<size_t>(j)];
                u[j] += eps * au * std::exp(-0.5 * (x - cu) * (x - cu) / (wu * wu));
                ut[j] += eps * av * std::exp(-0.5 * (x - cv) * (x - cv) / (wv * wv));
            }
        }
    } else if (profile == "lowhigh") {
        const int K = pp.high_mode;
        if (K + 1 >= g.dealias_cutoff()) throw std::invalid_argument("lowhigh: high mode above the dealiasing cutoff");
        for (int j = 0; j < n; ++j) {
            const double x = phase(j);
            u[j] = eps * (std::cos(x) + pp.high_amp * (std::cos(K * x) + std::sin((K + 1) * x)));
        }
    } else {
        throw std::invalid_argument("unknown data profile '" + profile + "'");
    }
    return from_samples(g, u, ut, pp.dealias);
}

State random_direction(const Grid& g, std::uint64_t seed) {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const int n = g.n();
    const auto xs = grid_points(g);
    std::vector<double> u(static_cast<size_t>(n)), ut(static_cast<size_t>(n));
    for (int k = 1; k <= 8; ++k) {
        const double pu = rng.uniform(0.0, 2.0 * kPi), pv = rng.uniform(0.0, 2.0 * kPi);
        for (int j = 0; j < n; ++j) {
            const double x = 2.0 * kPi * xs[static_cast<size_t>(j)] / g.length();
            u[j] += std::cos(k * x + pu) / k;
            ut[j] += std::cos(k * x + pv) / k;
        }
    }
    State st = from_samples(g, u, ut);
    const double nrm = sobolev_norm(st, 1.0);
    return (1.0 / nrm) * st;
}

State high_direction(const Grid& g, std::uint64_t seed, int kmin) {
    Rng rng(seed ^ 0x7f4a7c159e3779b9ULL);
    const int n = g.n();
    const auto xs = grid_points(g);
    std::vector<double> u(static_cast<size_t>(n)), ut(static_cast<size_t>(n));
    for (int k = kmin; k < n / 3; ++k) {
        const double pu = rng.uniform(0.0, 2.0 * kPi), pv = rng.uniform(0.0, 2.0 * kPi);
        for (int j = 0; j < n; ++j) {
            const double x = 2.0 * kPi * xs[static_cast<size_t>(j)] / g.length();
            u[j] += std::cos(k * x + pu) / k;
            ut[j] += std::cos(k * x + pv);
        }
    }
    State st = from_samples(g, u, ut);
    return (1.0 / sobolev_norm(st, 1.0)) * st;
}

EquivalenceConstants equivalence_constants(const EnergyContext& c1, const EnergyContext& cs, const State& u,
                                           const State& v, const State& w) {
    const double m = c1.model().m;
    const double a2 = control_params(u, 2);
    const Background b1 = make_background(c1, u), bs = make_background(cs, u);
    const double eu = base_energy(u, m), ev = base_energy(v, m), ew = base_energy(w, m);
    const double hs = 0.5 * std::pow(sobolev_norm(u, cs.sigma() + 1.0), 2);
    EquivalenceConstants c;
    c.nf = (nf_energy(c1, b1, w) - ew) / (a2 * ew);
    c.para = (modified_energy_s(c1, b1) - eu) / (a2 * eu);
    c.lin = (linearized_energy(c1, b1, v) - ev) / (a2 * ev);
    c.s = (modified_energy_s(cs, bs) / hs - 1.0) / a2;
    return c;
}

//--------------------------------------------------------------------------
// Fits
//--------------------------------------------------------------------------

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    SlopeFit f;
    std::vector<double> lx, ly;
    for (size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
            lx.push_back(std::log(x[i]));
            ly.push_back(std::log(y[i]));
        }
    }
    f.points = static_cast<int>(lx.size());
    if (f.points < 2) return f;
    const double k = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (f.intercept + f.slope * lx[i]);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / k);
    f.valid = f.points >= 3;
    return f;
}

std::vector<double> richardson_derivative(const std::vector<double>& y, double h) {
    std::vector<double> d(y.size(), kNaN);
    for (size_t k = 2; k + 2 < y.size(); ++k) {
        const double d1 = (y[k + 1] - y[k - 1]) / (2.0 * h);
        const double d2 = (y[k + 2] - y[k - 2]) / (4.0 * h);
        d[k] = (4.0 * d1 - d2) / 3.0;
    }
    return d;
}

//--------------------------------------------------------------------------
// Reports and workers
//--------------------------------------------------------------------------

bool SweepReport::all_pass() const {
    return std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.pass; });
}

nlohmann::ordered_json SweepReport::to_json(const RunConfig& cfg) const {
    nlohmann::ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["config_hash"] = cfg.hash();
    j["experiment"] = experiment;
    j["model"] = model;
    j["config"] = cfg.echo();
    j["epsilons"] = epsilons;
    auto pts = nlohmann::ordered_json::array();
    for (const auto& p : points) {
        nlohmann::ordered_json pj;
        pj["eps"] = p.eps;
        pj["valid"] = p.valid;
        if (!p.note.empty()) pj["note"] = p.note;
        for (const auto& [k, v] : p.metrics) pj[k] = std::isfinite(v) ? nlohmann::ordered_json(v) : nullptr;
        pts.push_back(pj);
    }
    j["points"] = pts;
    auto sl = nlohmann::ordered_json::object();
    for (const auto& [k, f] : slopes) {
        if (!f.valid) continue;
        sl[k] = {{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}, {"points", f.points}};
    }
    j["slopes"] = sl;
    auto gs = nlohmann::ordered_json::array();
    for (const auto& g : gates) gs.push_back({{"name", g.name}, {"pass", g.pass}, {"detail", g.detail}});
    j["gates"] = gs;
    j["all_pass"] = all_pass();
    j["extra"] = extra;
    j["runtime_s"] = runtime;
    return j;
}

void write_csv(const std::string& path, const CsvTable& t, const RunConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "# schema_version=" << kSchemaVersion << "\n";
    out << "# config_hash=" << cfg.hash() << "\n";
    out << "# table=" << t.name << "\n";
    for (size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << "\n";
    char buf[40];
    for (const auto& row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.10e", row[i]);
            out << (i ? "," : "") << buf;
        }
        out << "\n";
    }
}

int worker_count(const RunConfig& cfg) {
    int n = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("KGNF_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, cap);
    }
    return std::max(1, n);
}

void parallel_for(int count, int workers, const std::function<void(int)>& job) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

//--------------------------------------------------------------------------
// Shared helpers
//--------------------------------------------------------------------------

Grid config_grid(const RunConfig& cfg) { return make_grid(cfg.n, cfg.L); }

double config_dt(const RunConfig& cfg, const State& u0, const ModelSpec& model) {
    return cfg.dt > 0.0 ? cfg.dt : 0.5 * cfl_limit(u0, model, 0.5);
}

namespace {

ProfileParams profile_params(const RunConfig& cfg) { return {cfg.high_mode, cfg.high_amp, cfg.dealias}; }

bool is_flat(const ModelSpec& m) {
    const auto& d = m.d;
    for (int i = 0; i < 3; ++i) {
        if (d.g01[i] != 0.0 || d.g11[i] != 0.0) return false;
        for (int k = 0; k < 3; ++k)
            if (d.f[i][k] != 0.0) return false;
    }
    return true;
}

Gate slope_gate(const std::string& name, const SlopeFit& f, double lo, double hi) {
    Gate g{name, false, ""};
    if (!f.valid) {
        g.detail = "needs at least three positive points";
        return g;
    }
    g.pass = f.residual < 0.1 && f.slope >= lo && f.slope <= hi;
    g.detail = "slope " + fmt("%.3f", f.slope) + ", residual " + fmt("%.3g", f.residual);
    return g;
}

}  // namespace

//--------------------------------------------------------------------------
// Single trajectory
//--------------------------------------------------------------------------

SweepReport evolve_run(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec model = resolve_model(cfg);
    const Grid g = config_grid(cfg);
    const double eps = cfg.eps.front();
    const State u0 = make_data(cfg.profile, g, eps, cfg.seed, profile_params(cfg));
    SweepReport rep;
    rep.experiment = "evolve";
    rep.model = model.name;
    rep.epsilons = {eps};

    Observer obs = [&](const State& st) {
        return std::vector<double>{base_energy(st, model.m), sobolev_norm(st, 1.0), sobolev_norm(st, cfg.s),
                                   control_params(st, 0),    control_params(st, 2),
                                   std::max(max_imag_residue(st.pos), max_imag_residue(st.vel))};
    };
    EvolveOptions opt;
    opt.sample_every = cfg.sample_every;
    opt.store_states = false;
    const Trajectory tr = evolve(u0, model, cfg.T, config_dt(cfg, u0, model), {obs}, opt);

    CsvTable tab{"trajectory", {"t", "E1", "H1_norm", "Hs_norm", "A0", "A2", "imag_residue"}, {}};
    double imag = 0.0;
    for (size_t k = 0; k < tr.times.size(); ++k) {
        std::vector<double> row{tr.times[k]};
        row.insert(row.end(), tr.records[0][k].begin(), tr.records[0][k].end());
        imag = std::max(imag, row.back());
        tab.rows.push_back(std::move(row));
    }
    rep.tables.push_back(tab);
    SweepPoint p;
    p.eps = eps;
    p.valid = !tr.blow_up;
    p.metrics = {{"T_reached", tr.blow_up ? tr.blow_up_time : tr.times.back()},
                 {"dt", tr.dt},
                 {"E1_0", tab.rows.front()[1]},
                 {"E1_T", tab.rows.back()[1]},
                 {"imag_residue", imag}};
    if (tr.blow_up) p.note = tr.message;
    rep.points.push_back(p);
    if (tr.cfl_warning) rep.extra["cfl_warning"] = true;
    rep.gates.push_back({"no blow-up", !tr.blow_up, tr.message});
    rep.gates.push_back({"reality preserved (imag residue < 1e-11)", imag < 1e-11, fmt("%.3g", imag)});
    rep.runtime = seconds_since(t0);
    return rep;
}

//--------------------------------------------------------------------------
// Drift sweep
//--------------------------------------------------------------------------

EnergyTrace energy_trace(const RunConfig& cfg, const ModelSpec& model, double eps) {
    const Grid g = config_grid(cfg);
    const State u0 = make_data(cfg.profile, g, eps, cfg.seed, profile_params(cfg));
    const EnergyContext c1(model, g, 1.0);
    const EnergyContext cs(model, g, cfg.s, cfg.skip_conjugation_nf);
    const double s = cfg.s;
    Observer obs = [&](const State& st) {
        const Background b1 = make_background(c1, st);
        const Background bs = make_background(cs, st);
        return std::vector<double>{base_energy(st, model.m), modified_energy_s(c1, b1), modified_energy_s(cs, bs),
                                   control_params(st, 0),    control_params(st, 2),     control_params(st, 3),
                                   sobolev_norm(st, s)};
    };
    EvolveOptions opt;
    opt.sample_every = cfg.sample_every;
    opt.store_states = false;
    const double dt = config_dt(cfg, u0, model);
    const Trajectory tr = evolve(u0, model, cfg.T, dt, {obs}, opt);

    EnergyTrace e;
    e.blow_up = tr.blow_up;
    for (size_t k = 0; k < tr.times.size(); ++k) {
        const auto& r = tr.records[0][k];
        e.t.push_back(tr.times[k]);
        e.E1.push_back(r[0]);
        e.E1para.push_back(r[1]);
        e.Es.push_back(r[2]);
        e.A0.push_back(r[3]);
        e.A2.push_back(r[4]);
        e.A3.push_back(r[5]);
        e.Hs.push_back(r[6]);
    }
    const double h = tr.sample_dt();
    e.dE1 = richardson_derivative(e.E1, h);
    e.dE1para = richardson_derivative(e.E1para, h);
    e.dEs = richardson_derivative(e.Es, h);
    return e;
}

SweepReport drift_sweep(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec model = resolve_model(cfg);
    SweepReport rep;
    rep.experiment = "drift-sweep";
    rep.model = model.name;
    rep.epsilons = cfg.eps;

    std::vector<EnergyTrace> traces(cfg.eps.size());
    parallel_for(static_cast<int>(cfg.eps.size()), worker_count(cfg),
                 [&](int i) { traces[static_cast<size_t>(i)] = energy_trace(cfg, model, cfg.eps[static_cast<size_t>(i)]); });

    std::vector<double> e_ok, d1, dp, ds, cst;
    CsvTable summary{"sweep", {"eps", "max_dE1_dt", "max_dE1para_dt", "max_dEs_dt", "emp_const"}, {}};
    for (size_t i = 0; i < cfg.eps.size(); ++i) {
        const EnergyTrace& e = traces[i];
        SweepPoint p;
        p.eps = cfg.eps[i];
        double m1 = 0, mp = 0, ms = 0, mc = 0;
        for (size_t k = 0; k < e.t.size(); ++k) {
            if (e.t[k] < cfg.window_start || !std::isfinite(e.dE1[k])) continue;
            m1 = std::max(m1, std::abs(e.dE1[k]));
            mp = std::max(mp, std::abs(e.dE1para[k]));
            ms = std::max(ms, std::abs(e.dEs[k]));
            const double denom = e.A0[k] * e.A3[k] * e.E1para[k];
            if (denom > 0.0) mc = std::max(mc, std::abs(e.dE1para[k]) / denom);
        }
        p.metrics = {{"max_dE1_dt", m1},       {"max_dE1para_dt", mp},   {"max_dEs_dt", ms},
                     {"emp_const", mc},        {"E1_0", e.E1.front()},   {"A2_0", e.A2.front()},
                     {"Hs_0", e.Hs.front()}};
        if (e.blow_up) {
            p.valid = false;
            p.note = "blow-up before T";
        } else {
            e_ok.push_back(p.eps);
            d1.push_back(m1);
            dp.push_back(mp);
            ds.push_back(ms);
            cst.push_back(mc);
        }
        rep.points.push_back(p);
        summary.rows.push_back({p.eps, m1, mp, ms, mc});

        CsvTable tr{"traj_eps" + std::to_string(i),
                    {"t", "E1", "E1para", "Es", "A0", "A2", "A3", "Hs_norm", "dE1_dt", "dE1para_dt"},
                    {}};
        for (size_t k = 0; k < e.t.size(); ++k)
            tr.rows.push_back({e.t[k], e.E1[k], e.E1para[k], e.Es[k], e.A0[k], e.A2[k], e.A3[k], e.Hs[k],
                               e.dE1[k], e.dE1para[k]});
        rep.tables.push_back(std::move(tr));
    }
    rep.tables.insert(rep.tables.begin(), summary);

    if (e_ok.size() >= 3) {
        rep.slopes["E1"] = fit_loglog(e_ok, d1);
        rep.slopes["E1para"] = fit_loglog(e_ok, dp);
        rep.slopes["Es"] = fit_loglog(e_ok, ds);
    }
    rep.gates.push_back({"at least three valid eps points", e_ok.size() >= 3,
                         std::to_string(e_ok.size()) + " valid of " + std::to_string(cfg.eps.size())});
    if (e_ok.size() >= 3) {
        if (is_flat(model)) {
            const double worst = std::max({*std::max_element(d1.begin(), d1.end()),
                                           *std::max_element(dp.begin(), dp.end()),
                                           *std::max_element(ds.begin(), ds.end())});
            rep.gates.push_back({"flat drifts at noise floor", worst < 1e-10, "max drift " + fmt("%.3g", worst)});
        } else {
            // Some models conserve E1 exactly; its drift is then roundoff and has no slope.
            double rel1 = 0.0;
            for (const auto& p : rep.points)
                if (p.valid) rel1 = std::max(rel1, p.metrics.at("max_dE1_dt") / p.metrics.at("E1_0"));
            if (rel1 < 1e-10)
                rep.gates.push_back({"E1 conserved (relative drift < 1e-10)", true, "max relative drift " + fmt("%.3g", rel1)});
            else
                rep.gates.push_back(slope_gate("slope dE1/dt in [2.7, 3.3]", rep.slopes["E1"], 2.7, 3.3));
            rep.gates.push_back(slope_gate("slope dE1para/dt >= 3.6", rep.slopes["E1para"], 3.6, 1e9));
            rep.gates.push_back(slope_gate("slope dEs/dt >= 3.6", rep.slopes["Es"], 3.6, 1e9));
            const double sp = spread(cst);
            rep.gates.push_back({"empirical constant bounded (max/min <= 2)", sp <= 2.0, "spread " + fmt("%.3f", sp)});
        }
    }
    rep.runtime = seconds_since(t0);
    return rep;
}

//--------------------------------------------------------------------------
// Lifespan
//--------------------------------------------------------------------------

SweepReport lifespan_probe(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec model = resolve_model(cfg);
    const Grid g = config_grid(cfg);
    SweepReport rep;
    rep.experiment = "lifespan";
    rep.model = model.name;
    rep.epsilons = cfg.eps;
    rep.points.resize(cfg.eps.size());

    parallel_for(static_cast<int>(cfg.eps.size()), worker_count(cfg), [&](int i) {
        const double eps = cfg.eps[static_cast<size_t>(i)];
        const State u0 = make_data(cfg.profile, g, eps, cfg.seed, profile_params(cfg));
        const double n0 = sobolev_norm(u0, cfg.s);
        const double cap = cfg.cap_factor / (eps * eps);
        EvolveOptions opt;
        opt.sample_every = cfg.sample_every;
        opt.store_states = false;
        opt.stop = [&](const State& st) { return sobolev_norm(st, cfg.s) >= cfg.theta * n0; };
        const Trajectory tr = evolve(u0, model, cap, config_dt(cfg, u0, model), {}, opt);
        SweepPoint& p = rep.points[static_cast<size_t>(i)];
        p.eps = eps;
        const double T = tr.blow_up ? tr.blow_up_time : tr.times.back();
        const bool capped = !tr.stopped && !tr.blow_up;
        p.metrics = {{"T_double", T}, {"T_eps2", T * eps * eps}, {"capped", capped ? 1.0 : 0.0},
                     {"norm0", n0}};
        if (capped) p.note = "cap reached: lower bound";
        if (tr.blow_up) p.note = "blow-up marker at t = " + fmt("%.4g", T);
    });

    CsvTable tab{"lifespan", {"eps", "T_double", "T_eps2", "capped"}, {}};
    std::vector<double> te2;
    int capped = 0;
    for (const auto& p : rep.points) {
        tab.rows.push_back({p.eps, p.metrics.at("T_double"), p.metrics.at("T_eps2"), p.metrics.at("capped")});
        te2.push_back(p.metrics.at("T_eps2"));
        capped += p.metrics.at("capped") > 0.0;
    }
    rep.tables.push_back(tab);
    const double sp = spread(te2);
    rep.extra["T_eps2_spread"] = sp;
    rep.extra["capped_points"] = capped;
    rep.extra["lower_bound_only"] = capped == static_cast<int>(rep.points.size());
    rep.gates.push_back({"at least three eps points", rep.points.size() >= 3, ""});
    rep.gates.push_back({"T_double eps^2 within factor 2", sp <= 2.0,
                         "spread " + fmt("%.3f", sp) + (capped ? ", " + std::to_string(capped) + " capped" : "")});
    rep.runtime = seconds_since(t0);
    return rep;
}

//--------------------------------------------------------------------------
// Lipschitz
//--------------------------------------------------------------------------

SweepReport lipschitz_test(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec model = resolve_model(cfg);
    const Grid g = config_grid(cfg);
    const double eps = cfg.eps.front();
    const double T = cfg.lip_T_factor / (eps * eps);
    SweepReport rep;
    rep.experiment = "lipschitz";
    rep.model = model.name;
    rep.epsilons = {eps};

    const State base = make_data(cfg.profile, g, eps, cfg.seed, profile_params(cfg));
    const State dir = random_direction(g, cfg.seed + 1);
    const std::vector<double> deltas{cfg.delta, 0.5 * cfg.delta};
    std::vector<State> st{base, base + deltas[0] * dir, base + deltas[1] * dir};
    const double dt0 = config_dt(cfg, base, model);
    const long steps = std::max(1L, std::lround(T / dt0));
    const double dt = T / static_cast<double>(steps);
    if (dt > cfl_limit(base, model, 0.5)) throw CflViolation("lipschitz: dt exceeds the CFL limit");

    std::vector<double> d0(2), sup(2, 0.0);
    for (int k = 0; k < 2; ++k) d0[k] = sobolev_norm(st[k + 1] - st[0], 1.0);
    CsvTable tab{"lipschitz", {"t", "ratio_delta", "ratio_half_delta"}, {}};
    auto record = [&](double t) {
        std::vector<double> row{t};
        for (int k = 0; k < 2; ++k) {
            const double d = sobolev_norm(st[k + 1] - st[0], 1.0);
            const double r = d0[k] > 0.0 ? d / d0[k] : 1.0;
            sup[k] = std::max(sup[k], r);
            row.push_back(r);
        }
        tab.rows.push_back(row);
    };
    record(0.0);
    bool blown = false;
    for (long k = 1; k <= steps && !blown; ++k) {
        try {
            for (auto& s : st) s = step_rk4(s, model, dt);
        } catch (const BlowUp&) {
            blown = true;
        }
        if (!blown && (k % cfg.sample_every == 0 || k == steps)) record(static_cast<double>(k) * dt);
    }
    rep.tables.push_back(tab);
    SweepPoint p;
    p.eps = eps;
    p.metrics = {{"T", T}, {"ratio_delta", sup[0]}, {"ratio_half_delta", sup[1]}, {"delta", cfg.delta}};
    p.valid = !blown;
    if (blown) p.note = "blow-up invalidates the pair";
    rep.points.push_back(p);
    const double inv = std::abs(sup[0] / sup[1] - 1.0);
    rep.extra["delta_invariance"] = inv;
    rep.gates.push_back({"no blow-up", !blown, ""});
    rep.gates.push_back({"difference ratio <= 3", sup[0] <= 3.0 && sup[1] <= 3.0,
                         "ratios " + fmt("%.4f", sup[0]) + ", " + fmt("%.4f", sup[1])});
    rep.gates.push_back({"delta-invariant within 5%", inv <= 0.05, "relative change " + fmt("%.3g", inv)});
    rep.runtime = seconds_since(t0);
    return rep;
}

//--------------------------------------------------------------------------
// Strichartz
//--------------------------------------------------------------------------

namespace {

// sup_x |<D>^{-1/4} (u_t, u_x)|
double strichartz_sup(const State& st) {
    const auto vt = to_physical(bracket_pow(st.vel, -0.25));
    const auto vx = to_physical(bracket_pow(dx(st.pos), -0.25));
    double m = 0.0;
    for (size_t i = 0; i < vt.size(); ++i) m = std::max(m, std::hypot(vt[i], vx[i]));
    return m;
}

// sup_x max_{j <= 3} |d_x^j (u_t, u_x)|
double deriv4_sup(const State& st) {
    Field a = st.vel, b = dx(st.pos);
    double m = 0.0;
    for (int j = 0; j <= 3; ++j) {
        m = std::max({m, sup_norm(a), sup_norm(b)});
        a = dx(a);
        b = dx(b);
    }
    return m;
}

// Exact linear Klein-Gordon propagator.
State kg_propagate(const State& s0, double t, double m) {
    State s = s0;
    const Grid& g = s0.grid();
    for (int j = 0; j < g.n(); ++j) {
        const double k = g.freq(j);
        const double w = std::sqrt(k * k + m);
        const double c = std::cos(w * t), sn = std::sin(w * t);
        s.pos[j] = c * s0.pos[j] + (sn / w) * s0.vel[j];
        s.vel[j] = -w * sn * s0.pos[j] + c * s0.vel[j];
    }
    s.time = t;
    return s;
}

double trapezoid(const std::vector<double>& y, double h) {
    if (y.size() < 2) return 0.0;
    double s = 0.5 * (y.front() + y.back());
    for (size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
    return s * h;
}

}  // namespace

SweepReport strichartz_tracker(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec model = resolve_model(cfg);
    const Grid g = config_grid(cfg);
    const double horizon = g.length() / 4.0;
    for (double T : cfg.horizons)
        if (T >= horizon) throw std::invalid_argument("horizon " + fmt("%g", T) + " exceeds L/4 = " + fmt("%.4g", horizon));
    if (cfg.source_T >= horizon) throw std::invalid_argument("source_T exceeds L/4");

    SweepReport rep;
    rep.experiment = "strichartz";
    rep.model = model.name;
    rep.epsilons = cfg.eps;

    // Linear ensemble.
    const double tau = cfg.dt > 0.0 ? cfg.dt : 0.01;
    const double Tmax = *std::max_element(cfg.horizons.begin(), cfg.horizons.end());
    const long nt = std::lround(Tmax / tau);
    std::vector<std::vector<double>> ratio(cfg.horizons.size(), std::vector<double>(static_cast<size_t>(cfg.ensemble)));
    std::vector<std::vector<double>> ratio4 = ratio;
    parallel_for(cfg.ensemble, worker_count(cfg), [&](int e) {
        const State u0 = make_data("localized", g, 1.0, cfg.seed + static_cast<std::uint64_t>(e));
        const double n0 = sobolev_norm(u0, 1.0);
        std::vector<double> f4, d4;
        for (long k = 0; k <= nt; ++k) {
            const State s = kg_propagate(u0, static_cast<double>(k) * tau, model.m);
            f4.push_back(std::pow(strichartz_sup(s), 4));
            d4.push_back(std::pow(deriv4_sup(s), 4));
        }
        for (size_t h = 0; h < cfg.horizons.size(); ++h) {
            const long kk = std::lround(cfg.horizons[h] / tau);
            const std::vector<double> a(f4.begin(), f4.begin() + kk + 1), b(d4.begin(), d4.begin() + kk + 1);
            ratio[h][static_cast<size_t>(e)] = std::pow(trapezoid(a, tau), 0.25) / n0;
            ratio4[h][static_cast<size_t>(e)] = std::pow(trapezoid(b, tau), 0.25) / n0;
        }
    });
    CsvTable lin{"linear", {"T", "max_ratio", "mean_ratio", "max_ratio_d4"}, {}};
    std::vector<double> cmax;
    for (size_t h = 0; h < cfg.horizons.size(); ++h) {
        const double mx = *std::max_element(ratio[h].begin(), ratio[h].end());
        double mean = 0;
        for (double r : ratio[h]) mean += r;
        mean /= static_cast<double>(ratio[h].size());
        lin.rows.push_back({cfg.horizons[h], mx, mean, *std::max_element(ratio4[h].begin(), ratio4[h].end())});
        cmax.push_back(mx);
    }
    rep.tables.push_back(lin);
    const double growth = spread(cmax);
    rep.extra["linear_constant"] = *std::max_element(cmax.begin(), cmax.end());
    rep.extra["linear_growth"] = growth;
    rep.gates.push_back({"linear ratio bounded across horizons (max/min <= 1.25)", growth <= 1.25,
                         "growth " + fmt("%.4f", growth)});

    // Nonlinear cubic source.
    const EnergyContext ctx(model, g, 1.0);
    rep.points.resize(cfg.eps.size());
    parallel_for(static_cast<int>(cfg.eps.size()), worker_count(cfg), [&](int i) {
        const double eps = cfg.eps[static_cast<size_t>(i)];
        const State u0 = make_data("localized", g, eps, cfg.seed);
        std::vector<double> src, f4;
        Observer obs = [&](const State& st) {
            return std::vector<double>{hs_norm(nf_cubic_source(ctx.tables(), st, model), 3.25),
                                       std::pow(strichartz_sup(st), 4)};
        };
        EvolveOptions opt;
        opt.sample_every = cfg.sample_every;
        opt.store_states = false;
        const Trajectory tr = evolve(u0, model, cfg.source_T, config_dt(cfg, u0, model), {obs}, opt);
        for (const auto& r : tr.records[0]) {
            src.push_back(r[0]);
            f4.push_back(r[1]);
        }
        const double h = tr.sample_dt();
        const double S = trapezoid(src, h);
        const double N = std::pow(trapezoid(f4, h), 0.25);
        SweepPoint& p = rep.points[static_cast<size_t>(i)];
        p.eps = eps;
        p.valid = !tr.blow_up;
        p.metrics = {{"source_L1H", S}, {"L4Linf", N},
                     {"shape_ratio", S / (std::sqrt(cfg.source_T) * N * N * sobolev_norm(u0, 1.0))}};
    });
    std::vector<double> es, ss;
    CsvTable nl{"source", {"eps", "source_L1H", "L4Linf", "shape_ratio"}, {}};
    for (const auto& p : rep.points) {
        nl.rows.push_back({p.eps, p.metrics.at("source_L1H"), p.metrics.at("L4Linf"), p.metrics.at("shape_ratio")});
        if (p.valid) {
            es.push_back(p.eps);
            ss.push_back(p.metrics.at("source_L1H"));
        }
    }
    rep.tables.push_back(nl);
    rep.slopes["source"] = fit_loglog(es, ss);
    rep.gates.push_back(slope_gate("cubic source slope 3 +- 0.3", rep.slopes["source"], 2.7, 3.3));
    rep.runtime = seconds_since(t0);
    return rep;
}

//--------------------------------------------------------------------------
// Normal form battery
//--------------------------------------------------------------------------

namespace {

double rel(cplx r, double scale) { return scale > 0.0 ? std::abs(r) / scale : 0.0; }

// Random sample of magnitude 10^[0,3] with random sign.
double draw(Rng& rng) { return (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::pow(10.0, rng.uniform(0.0, 3.0)); }

// Solve [[p, q], [r, s]] x = y by elimination with partial pivoting, in
// extended precision: the system's condition number reaches ~1e6.
using lcplx = std::complex<long double>;
std::array<cplx, 2> solve2(lcplx p, lcplx q, lcplx r, lcplx s, cplx y0d, cplx y1d) {
    lcplx y0(y0d.real(), y0d.imag()), y1(y1d.real(), y1d.imag());
    if (std::abs(r) > std::abs(p)) {
        std::swap(p, r);
        std::swap(q, s);
        std::swap(y0, y1);
    }
    const lcplx l = r / p;
    const lcplx x1 = (y1 - l * y0) / (s - l * q);
    const lcplx x0 = (y0 - q * x1) / p;
    return {cplx(static_cast<double>(x0.real()), static_cast<double>(x0.imag())),
            cplx(static_cast<double>(x1.real()), static_cast<double>(x1.imag()))};
}

double fit_remainder(const std::function<cplx(double)>& rem, const std::function<double(double)>& scale) {
    std::vector<double> xs, ys;
    double worst = 0.0;
    for (int k = 0; k < 12; ++k) {
        const double x = std::pow(10.0, 2.0 + 2.0 * k / 11.0);
        const double r = std::abs(rem(x));
        worst = std::max(worst, r / scale(x));
        xs.push_back(x);
        ys.push_back(r);
    }
    if (worst < 1e-13) return kNaN;
    return fit_loglog(xs, ys).slope;
}

}  // namespace

NfBattery nf_battery(const ModelSpec& model, int samples, std::uint64_t seed, const std::string& fault) {
    NfBattery out;
    out.model = model.name;
    const double m = model.m;
    const NfSymbols sym = nf_symbols(model);
    NfTaylor tay = sym.taylor;
    if (fault == "a0") {
        auto a0 = tay.a0;
        tay.a0 = [a0](double x) { return 1.01 * a0(x); };
    }
    const auto& q = sym.q;
    const auto& d = model.d;
    Rng rng(seed);

    // Random polynomial h-forms for the generalized solver.
    std::array<std::array<cplx, 4>, 4> hc;
    for (auto& row : hc)
        for (auto& c : row) c = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    auto hpoly = [&hc](int k) {
        return BilinearSymbol{[c = hc[static_cast<size_t>(k)]](double a, double b) {
                                  return c[0] + c[1] * a + c[2] * b + c[3] * a * b;
                              },
                              false, Region::full};
    };
    const auto hs = solve_h_system(hpoly(0), hpoly(1), hpoly(2), hpoly(3), m);
    const auto cj = conjugation_symbols(2.0, model);
    const auto cs = solve_h_system(cj.h00, cj.h01, cj.h10, cj.h11, m);

    auto abcd_res = [m](const HSystemSolution& s, const BilinearSymbol& h00, const BilinearSymbol& h01,
                        const BilinearSymbol& h10, const BilinearSymbol& h11, double x1, double x2) {
        const double M = m - 2 * x1 * x2, P = (x1 * x1 + m) * (x2 * x2 + m);
        const cplx a = s.a(x1, x2), b = s.b(x1, x2), c = s.c(x1, x2), dd = s.d(x1, x2);
        const cplx r11 = M * a - 2.0 * P * b - h11(x1, x2);
        const cplx r00 = M * b - 2.0 * a - h00(x1, x2);
        const cplx r01 = M * c + 2.0 * (x2 * x2 + m) * dd - h01(x1, x2);
        const cplx r10 = M * dd + 2.0 * (x1 * x1 + m) * c - h10(x1, x2);
        return std::max({rel(r11, std::abs(M * a) + std::abs(2.0 * P * b) + std::abs(h11(x1, x2))),
                         rel(r00, std::abs(M * b) + std::abs(2.0 * a) + std::abs(h00(x1, x2))),
                         rel(r01, std::abs(M * c) + std::abs(2.0 * (x2 * x2 + m) * dd) + std::abs(h01(x1, x2))),
                         rel(r10, std::abs(M * dd) + std::abs(2.0 * (x1 * x1 + m) * c) + std::abs(h10(x1, x2)))});
    };

    for (int i = 0; i < samples; ++i) {
        const double x1 = draw(rng), x2 = draw(rng);
        const double M = m - 2 * x1 * x2, P = (x1 * x1 + m) * (x2 * x2 + m);
        const cplx a = sym.a(x1, x2), b = sym.b(x1, x2);
        const cplx q11 = q.q11(x1, x2), q00 = q.q00(x1, x2);
        out.ab_residual = std::max({out.ab_residual,
                                    rel(M * a - 2.0 * P * b - q11, std::abs(M * a) + std::abs(2.0 * P * b) + std::abs(q11)),
                                    rel(M * b - 2.0 * a - q00, std::abs(M * b) + std::abs(2.0 * a) + std::abs(q00))});
        // Generic solve cross-check.
        const long double LM = m - 2.0L * x1 * x2, LP = (1.0L * x1 * x1 + m) * (1.0L * x2 * x2 + m);
        const auto ab = solve2(LM, -2.0L * LP, -2.0L, LM, q11, q00);
        out.ab_residual = std::max({out.ab_residual, rel(ab[0] - a, std::abs(a) + std::abs(ab[0])),
                                    rel(ab[1] - b, std::abs(b) + std::abs(ab[1]))});

        const cplx c12 = sym.c(x1, x2), c21 = sym.c(x2, x1);
        const cplx q01 = q.q01(x1, x2), q10 = q.q01(x2, x1);
        out.c_residual = std::max(
            {out.c_residual,
             rel(M * c12 + 2.0 * (x2 * x2 + m) * c21 - q01,
                 std::abs(M * c12) + std::abs(2.0 * (x2 * x2 + m) * c21) + std::abs(q01)),
             rel(M * c21 + 2.0 * (x1 * x1 + m) * c12 - q10,
                 std::abs(M * c21) + std::abs(2.0 * (x1 * x1 + m) * c12) + std::abs(q10))});

        out.abcd_residual = std::max(out.abcd_residual, abcd_res(hs, hpoly(0), hpoly(1), hpoly(2), hpoly(3), x1, x2));
        // Conjugation forms live on the low-high region.
        const double lo = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.0, 4.0);
        const double hi = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::pow(10.0, rng.uniform(2.0, 3.0));
        out.abcd_residual = std::max(out.abcd_residual, abcd_res(cs, cj.h00, cj.h01, cj.h10, cj.h11, lo, hi));

        const double dl = delta(x1, x2, m), de = delta_expanded(x1, x2, m);
        out.delta_agreement = std::max(out.delta_agreement, std::abs(dl - de) / std::abs(de));

        const double xi = draw(rng);
        const cplx lc = tay.c01(xi) * xi - tay.c02(xi);
        out.lead_c = std::max(out.lead_c, rel(lc - 0.5 * d.g11[1], std::abs(tay.c01(xi) * xi) + std::abs(tay.c02(xi)) + 1.0));
        const cplx lab = tay.a0(xi) * xi + tay.b0(xi) * (xi * xi + m);
        const cplx rhs = 0.25 * d.g11[0] + 0.25 * I * d.g11[2] * xi;
        out.lead_ab = std::max(out.lead_ab, rel(lab - rhs, std::abs(tay.a0(xi) * xi) + std::abs(tay.b0(xi) * (xi * xi + m)) + 1.0));

        // Parity: group one has odd real and even imaginary parts.
        const Multiplier odd[] = {tay.a0, tay.b1, tay.c01, tay.c12};
        const Multiplier even[] = {tay.a1, tay.b0, tay.c02, tay.c11};
        for (const auto& f : odd)
            if (f(-xi) != -std::conj(f(xi))) out.parity_exact = false;
        for (const auto& f : even)
            if (f(-xi) != std::conj(f(xi))) out.parity_exact = false;
    }

    // Paracoefficient identity on a random state.
    {
        const Grid g = make_grid(64, 2.0 * kPi);
        const State u = 0.01 * random_direction(g, seed);
        const ParaCoefficients k = para_coefficients(u, tay, m);
        const Field lam = lambda1_g11(u, model);
        const double scale = l2_norm(k.k0) + l2_norm(k.k2) + l2_norm(lam);
        out.kappa_identity = scale > 0.0 ? l2_norm(k.k2 - k.k0 - lam) / scale : 0.0;
    }

    // Remainder decay with the low frequency fixed at 1.
    const double lowf = 1.0;
    auto put = [&](const char* name, double v) {
        if (std::isfinite(v)) out.decay[name] = v;
    };
    put("a", fit_remainder([&](double x) { return sym.a(lowf, x) - tay.a0(lowf) * x - tay.a1(lowf); },
                           [&](double x) { return std::abs(tay.a0(lowf) * x) + std::abs(tay.a1(lowf)) + 1e-300; }));
    put("b", fit_remainder([&](double x) { return sym.b(lowf, x) - tay.b0(lowf) - tay.b1(lowf) / x; },
                           [&](double) { return std::abs(tay.b0(lowf)) + std::abs(tay.b1(lowf)) + 1e-300; }));
    put("c_lh", fit_remainder([&](double x) { return sym.c(lowf, x) - tay.c01(lowf) * x - tay.c11(lowf); },
                              [&](double x) { return std::abs(tay.c01(lowf) * x) + std::abs(tay.c11(lowf)) + 1e-300; }));
    put("c_hl", fit_remainder([&](double x) { return sym.c(x, lowf) - tay.c02(lowf) - tay.c12(lowf) / x; },
                              [&](double) { return std::abs(tay.c02(lowf)) + std::abs(tay.c12(lowf)) + 1e-300; }));
    return out;
}

SweepReport nf_verify(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const ModelSpec model = resolve_model(cfg);
    const NfBattery b = nf_battery(model, cfg.samples, cfg.seed, cfg.fault);
    SweepReport rep;
    rep.experiment = "nf-check";
    rep.model = model.name;
    auto lt = [](const std::string& name, double v, double tol) {
        return Gate{name, v < tol, fmt("%.3g", v) + " (tol " + fmt("%.0e", tol) + ")"};
    };
    rep.gates.push_back(lt("(a,b) system residual", b.ab_residual, 1e-12));
    rep.gates.push_back(lt("(c) system residual", b.c_residual, 1e-12));
    rep.gates.push_back(lt("(a,b,c,d) system residual", b.abcd_residual, 1e-12));
    rep.gates.push_back(lt("delta forms agree", b.delta_agreement, 1e-12));
    rep.gates.push_back(lt("lead symbol c identity", b.lead_c, 1e-12));
    rep.gates.push_back(lt("lead symbol a,b identity", b.lead_ab, 1e-12));
    rep.gates.push_back(lt("kappa2 - kappa0 identity", b.kappa_identity, 1e-10));
    rep.gates.push_back({"parity table exact", b.parity_exact, ""});
    const std::map<std::string, double> nominal{{"a", -1.0}, {"b", -2.0}, {"c_lh", -1.0}, {"c_hl", -2.0}};
    nlohmann::ordered_json dj = nlohmann::ordered_json::object();
    for (const auto& [k, v] : b.decay) {
        dj[k] = v;
        rep.gates.push_back({"remainder decay " + k, std::abs(v - nominal.at(k)) <= 0.1, "exponent " + fmt("%.3f", v)});
    }
    rep.extra = {{"ab_residual", b.ab_residual},       {"c_residual", b.c_residual},
                 {"abcd_residual", b.abcd_residual},   {"delta_agreement", b.delta_agreement},
                 {"lead_c", b.lead_c},                 {"lead_ab", b.lead_ab},
                 {"kappa_identity", b.kappa_identity}, {"parity_exact", b.parity_exact},
                 {"decay", dj},                        {"fault", cfg.fault}};
    rep.runtime = seconds_since(t0);
    return rep;
}

}  // namespace kgnf
