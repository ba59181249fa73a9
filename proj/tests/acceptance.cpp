// Acceptance run: one PASS/FAIL line per criterion on stdout, diagnostics on
// stderr. Exit status is the number of failed criteria (capped at 100).

#include "kgnf/bilinear.hpp"
#include "kgnf/energy.hpp"
#include "kgnf/evolve.hpp"
#include "kgnf/experiments.hpp"
#include "kgnf/normalform.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace kgnf;
using namespace kgnf::testing;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            std::fprintf(stderr, "    failed: %s\n", what.c_str());
        }
    }
};

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

double rel(const Field& a, const Field& b) { return l2_norm(a - b) / std::max(l2_norm(b), 1e-300); }

bool gate_passed(const SweepReport& r, const std::string& prefix) {
    for (const auto& g : r.gates)
        if (g.name.rfind(prefix, 0) == 0) return g.pass;
    return false;
}

void dump_gates(const SweepReport& r) {
    for (const auto& g : r.gates)
        std::fprintf(stderr, "    [%s] %s: %s %s\n", r.model.c_str(), g.name.c_str(), g.pass ? "ok" : "FAIL",
                     g.detail.c_str());
}

int failures = 0;

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& body) {
    std::fprintf(stderr, "[%d] %s\n", id, name.c_str());
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (dt > budget_s) {
        o.pass = false;
        o.detail += " runtime over budget";
    }
    if (!o.pass) ++failures;
    std::printf("%s  %2d %-28s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), dt);
    std::fflush(stdout);
}

//--------------------------------------------------------------------------

Outcome nf_algebra() {
    Outcome o;
    double worst_sys = 0, worst_delta = 0, worst_lead = 0, worst_kappa = 0;
    for (const auto& name : gallery_names()) {
        const NfBattery b = nf_battery(gallery_model(name), 1000, 1);
        const double sys = std::max({b.ab_residual, b.c_residual, b.abcd_residual});
        worst_sys = std::max(worst_sys, sys);
        worst_delta = std::max(worst_delta, b.delta_agreement);
        worst_lead = std::max({worst_lead, b.lead_c, b.lead_ab});
        worst_kappa = std::max(worst_kappa, b.kappa_identity);
        o.require(sys < 1e-12, name + " system residual " + fmt("%.3g", sys));
        o.require(b.delta_agreement < 1e-12, name + " delta agreement " + fmt("%.3g", b.delta_agreement));
        o.require(b.lead_c < 1e-10 && b.lead_ab < 1e-10, name + " lead identities");
        o.require(b.kappa_identity < 1e-10, name + " kappa identity " + fmt("%.3g", b.kappa_identity));
        o.require(b.parity_exact, name + " parity");
    }
    o.detail = "6 models x 1000 pairs; residual " + fmt("%.2g", worst_sys) + ", delta " + fmt("%.2g", worst_delta) +
               ", lead " + fmt("%.2g", worst_lead) + ", kappa " + fmt("%.2g", worst_kappa);
    return o;
}

Outcome taylor_decay() {
    Outcome o;
    const std::map<std::string, double> nominal{{"a", -1.0}, {"b", -2.0}, {"c_lh", -1.0}, {"c_hl", -2.0}};
    std::string shown;
    for (const auto& name : gallery_names()) {
        const NfBattery b = nf_battery(gallery_model(name), 200, 1);
        for (const auto& [k, v] : b.decay) {
            o.require(std::abs(v - nominal.at(k)) <= 0.1, name + " " + k + " exponent " + fmt("%.3f", v));
            std::fprintf(stderr, "    %s %s %.3f\n", name.c_str(), k.c_str(), v);
            if (name == "generic") shown += " " + k + "=" + fmt("%.3f", v);
        }
        if (name == "generic") o.require(b.decay.size() == 4, "generic model has all four remainders");
    }
    o.detail = "generic:" + shown;
    return o;
}

Outcome bilinear_oracle() {
    Outcome o;
    double worst = 0, worst_dec = 0;
    int count = 0;
    for (int n : {64, 128}) {
        const Grid g = make_grid(n, 2 * kPi);
        const Field f = random_field(g, n / 3, 11), h = random_field(g, n / 3, 12);
        auto check = [&](const Field& fast, const Field& slow, const std::string& what) {
            const double r = rel(fast, slow);
            worst = std::max(worst, r);
            ++count;
            o.require(r < 1e-10, what + " n=" + std::to_string(n) + " rel " + fmt("%.3g", r));
        };
        // Paraproducts T_a D^j w, as used by the paradifferential energies.
        for (int j = 0; j <= 2; ++j) {
            Field dh = h;
            for (int i = 0; i < j; ++i) dh = dx(dh);
            const BilinearSymbol s{[j](double a, double b) { return chi_weyl(a, b) * std::pow(cplx(0, b), j); }};
            check(paraproduct(f, dh), apply_bilinear(s, f, h), "T_f D^" + std::to_string(j));
        }
        const LhExpansion e{{[](double x) { return cplx(jbracket(x)); }, [](double x) { return cplx(0, x); }},
                            {[](double) { return cplx(1.0); }, [](double x) { return cplx(x * x); }}};
        check(apply_bilinear_fast(e, f, h), apply_bilinear(expansion_symbol(e), f, h), "two-term expansion");
        // Tabulated normal form and conjugation symbols.
        for (const auto& name : gallery_names()) {
            const ModelSpec m = gallery_model(name);
            const NfSymbols s = nf_symbols(m);
            const NfTables t = build_nf_tables(s, g);
            const std::vector<std::pair<const SymbolTable*, BilinearSymbol>> pairs{
                {&t.a, s.a},
                {&t.b, s.b},
                {&t.c, s.c},
                {&t.a_lh, restrict_to(s.a, Region::lh)},
                {&t.c_hl, restrict_to(s.c, Region::hl)},
                {&t.b_hh, restrict_to(s.b, Region::hh)}};
            for (const auto& [tab, sym] : pairs) check(tab->apply(f, h), apply_bilinear(sym, f, h), name + " nf table");
            const ConjugationSymbols cs = conjugation_symbols(2.0, m);
            const HSystemSolution sol = solve_h_system(cs.h00, cs.h01, cs.h10, cs.h11, m.m);
            const ConjTables ct = build_conj_tables(2.0, m, g);
            if (ct.active) {
                check(ct.A.apply(f, h), apply_bilinear(sol.a, f, h), name + " conj A");
                check(ct.D.apply(f, h), apply_bilinear(sol.d, f, h), name + " conj D");
            }
        }
        // fg = T_f g + T_g f + Pi(f,g); band below n/4 so the pointwise product is exact.
        const Field p = random_field(g, n / 4 - 1, 21), q = random_field(g, n / 4 - 1, 22);
        const auto pp = to_physical(p), qq = to_physical(q);
        std::vector<double> prod(pp.size());
        for (size_t i = 0; i < pp.size(); ++i) prod[i] = pp[i] * qq[i];
        const Field fg = to_spectral(prod, g);
        const double d = rel(paraproduct(p, q) + paraproduct(q, p) + balanced_product(p, q), fg);
        worst_dec = std::max(worst_dec, d);
        o.require(d < 1e-12, "decomposition n=" + std::to_string(n) + " rel " + fmt("%.3g", d));
    }
    o.detail = std::to_string(count) + " fast/direct pairs, worst " + fmt("%.2g", worst) + "; decomposition " +
               fmt("%.2g", worst_dec);
    return o;
}

State run_to(const State& u0, const ModelSpec& m, double T, double dt) {
    EvolveOptions opt;
    opt.sample_every = 1 << 30;
    const Trajectory tr = evolve(u0, m, T, dt, {}, opt);
    if (tr.blow_up) throw std::runtime_error("blow-up in convergence run");
    return tr.states.back();
}

Outcome integrator() {
    Outcome o;
    double lo = 1e9, hi = -1e9;
    {
        const Grid g = make_grid(64, 2 * kPi);
        for (const auto& name : gallery_names()) {
            const ModelSpec m = gallery_model(name);
            const State u0 = make_data("twomode", g, 0.05, 1);
            const double dt = 0.04;
            const State a = run_to(u0, m, 1.0, dt), b = run_to(u0, m, 1.0, dt / 2), r = run_to(u0, m, 1.0, dt / 4);
            const double order = std::log2(sobolev_norm(a - r, 1.0) / sobolev_norm(b - r, 1.0));
            lo = std::min(lo, order);
            hi = std::max(hi, order);
            o.require(std::abs(order - 4.0) <= 0.2, name + " order " + fmt("%.3f", order));
        }
    }
    const Grid g = make_grid(256, 2 * kPi);
    const ModelSpec flat = gallery_model("flat");
    const State u0 = make_data("random", g, 0.1, 3);
    Observer obs = [](const State& s) { return std::vector<double>{base_energy(s, 1.0)}; };
    EvolveOptions opt;
    opt.sample_every = 100;
    opt.store_states = false;
    const Trajectory tr = evolve(u0, flat, 10.0, 1e-3, {obs}, opt);
    const double e0 = tr.records[0].front()[0];
    double drift = 0;
    for (const auto& r : tr.records[0]) drift = std::max(drift, std::abs(r[0] - e0) / e0);
    o.require(drift < 1e-8, "flat drift " + fmt("%.3g", drift));
    o.detail = "order " + fmt("%.3f", lo) + ".." + fmt("%.3f", hi) + "; flat E1 drift " + fmt("%.2g", drift);
    return o;
}

Outcome norm_equivalence() {
    Outcome o;
    // Signed ratios C(eps)/C(eps/2); a constant is stable within 25%, or its
    // cubic part vanishes identically and the ratio is the quartic value 2.
    const double e_big = 0.0025, e_small = 0.00125;
    const Grid g = make_grid(128, 2 * kPi);
    const State v = random_direction(g, 3), w = high_direction(g, 5, 24);
    int stable = 0, quartic = 0, exact = 0;
    for (const auto& name : gallery_names()) {
        const ModelSpec m = gallery_model(name);
        const EnergyContext c1(m, g, 1.0), c3(m, g, 3.0);
        const EquivalenceConstants a = equivalence_constants(c1, c3, make_data("random", g, e_big, 1), v, w);
        const EquivalenceConstants b = equivalence_constants(c1, c3, make_data("random", g, e_small, 1), v, w);
        const std::vector<std::tuple<std::string, double, double>> rows{
            {"E_NF", a.nf, b.nf}, {"E1para", a.para, b.para}, {"E_lin", a.lin, b.lin}, {"E^s", a.s, b.s}};
        for (const auto& [label, ca, cb] : rows) {
            std::fprintf(stderr, "    %-8s %-7s C=%.4g, %.4g\n", name.c_str(), label.c_str(), ca, cb);
            if (std::abs(ca) < 1e-10 && std::abs(cb) < 1e-10) {
                ++exact;
                continue;
            }
            const double r = ca / cb;
            if (std::abs(r - 1.0) <= 0.25) {
                ++stable;
            } else if (std::abs(r - 2.0) <= 0.1) {
                ++quartic;
                std::fprintf(stderr, "    %s %s: cubic part absent, C halves with eps\n", name.c_str(), label.c_str());
            } else {
                o.require(false, name + " " + label + " ratio " + fmt("%.3f", r));
            }
        }
    }
    o.detail = "eps " + fmt("%g", e_big) + "/" + fmt("%g", e_small) + ": " + std::to_string(stable) + " stable, " +
               std::to_string(quartic) + " quartic-only, " + std::to_string(exact) + " identically zero";
    return o;
}

Outcome drift_separation() {
    Outcome o;
    int sloped = 0;
    std::string shown;
    for (const auto& name : {"g11u", "generic", "g01ut", "fuu", "futut"}) {
        RunConfig c;
        c.command = "drift-sweep";
        c.model = name;
        c.eps = {0.02, 0.01, 0.005};
        c.T = 1.0;
        c.n = 256;
        const SweepReport r = drift_sweep(c);
        dump_gates(r);
        o.require(r.all_pass(), std::string(name) + " gates");
        if (gate_passed(r, "slope dE1/dt in [2.7, 3.3]")) ++sloped;
        const bool conserved = gate_passed(r, "E1 conserved");
        shown += std::string(" ") + name + " " + (conserved ? std::string("conserved") : fmt("%.2f", r.slopes.at("E1").slope)) + "/" +
                 fmt("%.2f", r.slopes.at("E1para").slope);
    }
    o.require(sloped >= 2, "at least two models with a cubic E1 drift");
    o.detail = "E1/E1para slopes:" + shown;
    return o;
}

Outcome lifespan() {
    Outcome o;
    RunConfig c;
    c.command = "lifespan";
    c.model = "custom";
    c.coef = {{"g11:u", 1.0}, {"f:u^2*ut", 1.0}};
    c.n = 128;
    c.dt = 0;
    c.eps = {0.1, 0.05, 0.025};
    const SweepReport r = lifespan_probe(c);
    dump_gates(r);
    o.require(r.all_pass(), "gates");
    o.require(r.extra.value("lower_bound_only", true) == false, "doubling observed at every eps");
    std::string shown;
    for (const auto& p : r.points) shown += " " + fmt("%.3f", p.metrics.at("T_eps2"));

    RunConfig f = c;
    f.model = "flat";
    f.coef.clear();
    f.cap_factor = 1.0;
    const SweepReport rf = lifespan_probe(f);
    o.require(rf.extra.value("lower_bound_only", false) == true, "flat model never doubles");
    o.detail = "T eps^2 =" + shown + ", spread " + fmt("%.3f", r.extra.value("T_eps2_spread", 0.0)) +
               "; flat capped";
    return o;
}

Outcome lipschitz() {
    Outcome o;
    RunConfig c;
    c.command = "lipschitz";
    c.model = "g11u";
    c.eps = {0.05};
    c.delta = 1e-5;
    c.lip_T_factor = 0.1;
    const SweepReport r = lipschitz_test(c);
    dump_gates(r);
    o.require(r.all_pass(), "gates");
    const auto& mt = r.points.at(0).metrics;
    o.detail = "ratio " + fmt("%.4f", std::max(mt.at("ratio_delta"), mt.at("ratio_half_delta"))) + ", delta change " +
               fmt("%.2g", r.extra.value("delta_invariance", 0.0));
    return o;
}

Outcome strichartz() {
    Outcome o;
    RunConfig c;
    c.command = "strichartz";
    c.model = "g11u";
    c.L = 64 * kPi;
    c.n = 512;
    c.dt = 0.01;
    const SweepReport r = strichartz_tracker(c);
    dump_gates(r);
    o.require(r.all_pass(), "gates");
    o.detail = "linear growth " + fmt("%.3f", r.extra.value("linear_growth", 0.0)) + ", source slope " +
               fmt("%.3f", r.slopes.at("source").slope);
    return o;
}

Outcome negative_controls() {
    Outcome o;
    RunConfig nf;
    nf.command = "nf-check";
    nf.model = "g11u";
    nf.samples = 1000;
    nf.fault = "a0";
    const SweepReport fr = nf_verify(nf);
    o.require(!fr.all_pass() && !gate_passed(fr, "lead symbol a,b"), "a0 fault trips the lead-symbol gate");

    RunConfig two;
    two.command = "drift-sweep";
    two.eps = {0.02, 0.01};
    const SweepReport tr = drift_sweep(two);
    o.require(!tr.all_pass() && !gate_passed(tr, "at least three"), "two-point sweep trips the point-count gate");

    RunConfig ab;
    ab.command = "drift-sweep";
    ab.model = "g01ut";
    ab.profile = "lowhigh";
    const SweepReport with = drift_sweep(ab);
    ab.skip_conjugation_nf = true;
    const SweepReport without = drift_sweep(ab);
    const double s1 = with.slopes.at("Es").slope, s0 = without.slopes.at("Es").slope;
    o.require(gate_passed(with, "slope dEs/dt"), "full E^s passes its slope gate");
    o.require(!gate_passed(without, "slope dEs/dt"), "ablated E^s fails its slope gate");
    o.require(s1 - s0 >= 0.3, "ablation degrades the slope by >= 0.3");
    o.detail = "a0 fault, 2-point sweep, skip-conjugation (Es slope " + fmt("%.2f", s1) + " -> " +
               fmt("%.2f", s0) + ") all rejected";
    return o;
}

}  // namespace

int main() {
    criterion(1, "normal form algebra", 30, nf_algebra);
    criterion(2, "Taylor remainder decay", 60, taylor_decay);
    criterion(3, "bilinear oracle", 60, bilinear_oracle);
    criterion(4, "integrator", 120, integrator);
    criterion(5, "norm equivalence", 180, norm_equivalence);
    criterion(6, "cubic estimate separation", 600, drift_separation);
    criterion(7, "lifespan scaling", 900, lifespan);
    criterion(8, "Lipschitz bound", 300, lipschitz);
    criterion(9, "Strichartz sanity", 600, strichartz);
    criterion(10, "negative controls", 600, negative_controls);
    std::printf("%s  %d of 10 criteria failed\n", failures ? "FAIL" : "PASS", failures);
    return std::min(failures, 100);
}
