#include "kgnf/energy.hpp"

#include <stdexcept>

namespace kgnf {

namespace {
const cplx I(0.0, 1.0);
}

EnergyContext::EnergyContext(ModelSpec model, const Grid& grid, double s, bool skip_conjugation)
    : model_(std::move(model)), grid_(grid), sigma_(s - 1.0), skip_conj_(skip_conjugation) {
    if (s < 1.0) throw std::invalid_argument("energy regularity s must be >= 1");
    sym_ = nf_symbols(model_);
    nf_ = build_nf_tables(sym_, grid_);
    if (!skip_conj_) conj_ = build_conj_tables(sigma_, model_, grid_);
}

double base_energy(const State& w, double m) {
    const Field wx = dx(w.pos);
    return 0.5 * (inner(w.vel, w.vel) + inner(wx, wx) + m * inner(w.pos, w.pos));
}

//--------------------------------------------------------------------------
// Paracoefficients. Each kappa is p(D) u + q(D) u_t with D = -i d/dx.
//--------------------------------------------------------------------------

ParaCoefficients para_coefficients(const State& u, const NfTaylor& t, double m) {
    auto k0u = [t, m](double x) { return 4.0 * (-0.5 * t.a0(x) * x + t.a1(x) - t.b0(x) * (x * x + m)); };
    auto k0t = [t](double x) { return 2.0 * (-0.5 * t.c01(x) * x + t.c11(x) + t.c02(x)); };
    auto k1u = [t, m](double x) { return 2.0 * (I * t.c01(x) * (x * x + m) + 2.0 * I * t.c12(x)); };
    auto k1t = [t](double x) { return 4.0 * (-I * t.a0(x) + 2.0 * I * t.b1(x)); };
    auto k2u = [t](double x) { return 4.0 * (0.5 * t.a0(x) * x + t.a1(x)); };
    auto k2t = [t](double x) { return 2.0 * (0.5 * t.c01(x) * x + t.c11(x)); };
    ParaCoefficients k;
    k.k0 = apply_multiplier(u.pos, k0u) + apply_multiplier(u.vel, k0t);
    k.k1 = apply_multiplier(u.pos, k1u) + apply_multiplier(u.vel, k1t);
    k.k2 = apply_multiplier(u.pos, k2u) + apply_multiplier(u.vel, k2t);
    return k;
}

ParaCoefficients para_coefficients(const State& u, const ModelSpec& model) {
    return para_coefficients(u, nf_taylor(model), model.m);
}

Background make_background(const EnergyContext& ctx, const State& u) {
    if (u.grid() != ctx.grid()) throw std::invalid_argument("background grid differs from the context grid");
    const ModelSpec& ms = ctx.model();
    Background bg;
    bg.u = u;
    bg.utt = utt_from_state(u, ms);
    bg.lin = linearized_coefficients(u, ms);
    bg.kappa = para_coefficients(u, ctx.symbols().taylor, ms.m);
    bg.lam11 = lambda1_g11(u, ms);
    bg.lam01 = lambda1_g01(u, ms);
    bg.r11 = bg.lin.g11 - bg.lam11;
    bg.r11[0] -= 1.0;
    bg.r01 = bg.lin.g01 - bg.lam01;
    return bg;
}

Field para_wtt(const Background& bg, const State& w, double m) {
    const Field wx = dx(w.pos);
    const Field wxx = dxx(w.pos);
    Field g11m1 = bg.lin.g11;
    g11m1[0] -= 1.0;
    return wxx - m * w.pos + paraproduct(g11m1, wxx) + 2.0 * paraproduct(bg.lin.g01, dx(w.vel)) +
           paraproduct(bg.lin.F0, w.vel) + paraproduct(bg.lin.F1, wx) + paraproduct(bg.lin.F, w.pos);
}

//--------------------------------------------------------------------------
// Normal form energy: E1(w) + the cross terms of E1(w + X) with
//   X = 2 A_lh(u,w) + 2 B_lh(u_t,w_t) + C_lh(u_t,w) + C_hl(w_t,u).
//--------------------------------------------------------------------------

double nf_energy(const EnergyContext& ctx, const Background& bg, const State& w) {
    const NfTables& t = ctx.tables();
    const double m = ctx.model().m;
    const Field& u = bg.u.pos;
    const Field& ut = bg.u.vel;
    const Field& utt = bg.utt;
    const Field wtt = para_wtt(bg, w, m);
    Field X = 2.0 * t.a_lh.apply(u, w.pos) + 2.0 * t.b_lh.apply(ut, w.vel) + t.c_lh.apply(ut, w.pos) +
              t.c_hl.apply(w.vel, u);
    Field Xt = 2.0 * (t.a_lh.apply(ut, w.pos) + t.a_lh.apply(u, w.vel)) +
               2.0 * (t.b_lh.apply(utt, w.vel) + t.b_lh.apply(ut, wtt)) + t.c_lh.apply(utt, w.pos) +
               t.c_lh.apply(ut, w.vel) + t.c_hl.apply(wtt, u) + t.c_hl.apply(w.vel, ut);
    const double cross = inner(w.vel, Xt) + inner(dx(w.pos), dx(X)) + m * inner(w.pos, X);
    return base_energy(w, m) + cross;
}

//--------------------------------------------------------------------------
// Main energy
//   1/2 int w_t T_{1+k0} w_t + T_{1+k0} w_x T_{g11} w_x + w_t T_{k1} w_x
//           - T_{k1} w_x T_{g01} w_x
// with T_{1+k0} = 1 + T_{k0}, T_{g11} = 1 + T_{lam11} + T_{r11},
// T_{g01} = T_{lam01} + T_{r01}; w counts as degree one, u-fields by grade.
//--------------------------------------------------------------------------

GradedScalar graded_main_energy(const Background& bg, const State& w) {
    const Field& wt = w.vel;
    const Field wx = dx(w.pos);
    const Field k0wt = paraproduct(bg.kappa.k0, wt);
    const Field k0wx = paraproduct(bg.kappa.k0, wx);
    const Field l11wx = paraproduct(bg.lam11, wx);
    const Field r11wx = paraproduct(bg.r11, wx);
    const Field k1wx = paraproduct(bg.kappa.k1, wx);
    const Field g01wx = paraproduct(bg.lam01, wx) + paraproduct(bg.r01, wx);

    const double d2 = 0.5 * (inner(wt, wt) + inner(wx, wx));
    const double d3 = 0.5 * (inner(wt, k0wt) + inner(k0wx, wx) + inner(wx, l11wx) + inner(wt, k1wx));
    const double d4 =
        0.5 * (inner(k0wx, l11wx) + inner(wx + k0wx, r11wx) - inner(k1wx, g01wx));
    GradedScalar g;
    g.by_degree = {{2, d2}, {3, d3}, {4, d4}};
    g.total = d2 + d3 + d4;
    return g;
}

double main_energy(const Background& bg, const State& w) {
    // Direct evaluation with the full coefficient fields.
    const Field& wt = w.vel;
    const Field wx = dx(w.pos);
    Field g11m1 = bg.lin.g11;
    g11m1[0] -= 1.0;
    const Field A = wt + paraproduct(bg.kappa.k0, wt);
    const Field B = wx + paraproduct(bg.kappa.k0, wx);
    const Field C = wx + paraproduct(g11m1, wx);
    const Field k1wx = paraproduct(bg.kappa.k1, wx);
    const Field g01wx = paraproduct(bg.lin.g01, wx);
    return 0.5 * (inner(wt, A) + inner(B, C) + inner(wt, k1wx) - inner(k1wx, g01wx));
}

double modified_energy_h1(const EnergyContext& ctx, const Background& bg, const State& w) {
    const GradedScalar gm = graded_main_energy(bg, w);
    return main_energy(bg, w) + nf_energy(ctx, bg, w) - gm.by_degree.at(2) - gm.by_degree.at(3);
}

//--------------------------------------------------------------------------
// H^s energy: high-high normal form, conjugation by <D>^sigma, one layer of
// conjugation normal form, then the H^1 energy of the corrected pair.
//--------------------------------------------------------------------------

State conjugated_pair(const EnergyContext& ctx, const Background& bg, const State& w) {
    const double s = ctx.sigma();
    State ws(bracket_pow(w.pos, s), bracket_pow(w.vel, s), w.time);
    if (s == 0.0 || ctx.skip_conjugation() || !ctx.conj().active) return ws;
    const ConjTables& c = ctx.conj();
    const Field& u = bg.u.pos;
    const Field& ut = bg.u.vel;
    const Field wstt = bracket_pow(para_wtt(bg, w, ctx.model().m), s);
    Field pos = ws.pos + c.A.apply(u, ws.pos) + c.B.apply(ut, ws.vel) + c.C.apply(ut, ws.pos) + c.D.apply(u, ws.vel);
    Field vel = ws.vel + c.A.apply(ut, ws.pos) + c.A.apply(u, ws.vel) + c.B.apply(bg.utt, ws.vel) +
                c.B.apply(ut, wstt) + c.C.apply(bg.utt, ws.pos) + c.C.apply(ut, ws.vel) + c.D.apply(ut, ws.vel) +
                c.D.apply(u, wstt);
    return State(std::move(pos), std::move(vel), w.time);
}

double modified_energy_s(const EnergyContext& ctx, const Background& bg) {
    const State W = nf_hh(ctx.tables(), bg.u, bg.utt);
    return modified_energy_h1(ctx, bg, conjugated_pair(ctx, bg, W));
}

double modified_energy_s(const EnergyContext& ctx, const State& u) {
    return modified_energy_s(ctx, make_background(ctx, u));
}

double linearized_energy(const EnergyContext& ctx, const Background& bg, const State& v) {
    const Field vtt = linearized_vtt(bg.lin, v, ctx.model().m);
    return modified_energy_h1(ctx, bg, nf_linearized(ctx.tables(), bg.u, bg.utt, v, vtt));
}

//--------------------------------------------------------------------------
// Convenience overloads
//--------------------------------------------------------------------------

double nf_energy(const State& u, const State& w, const ModelSpec& model) {
    EnergyContext ctx(model, u.grid());
    return nf_energy(ctx, make_background(ctx, u), w);
}

double main_energy(const State& u, const State& w, const ModelSpec& model) {
    EnergyContext ctx(model, u.grid());
    return main_energy(make_background(ctx, u), w);
}

GradedScalar graded_main_energy(const State& u, const State& w, const ModelSpec& model) {
    EnergyContext ctx(model, u.grid());
    return graded_main_energy(make_background(ctx, u), w);
}

double modified_energy_h1(const State& u, const State& w, const ModelSpec& model) {
    EnergyContext ctx(model, u.grid());
    return modified_energy_h1(ctx, make_background(ctx, u), w);
}

double modified_energy_s(const State& u, const ModelSpec& model, double s) {
    EnergyContext ctx(model, u.grid(), s);
    return modified_energy_s(ctx, u);
}

double linearized_energy(const State& u, const State& v, const ModelSpec& model) {
    EnergyContext ctx(model, u.grid());
    return linearized_energy(ctx, make_background(ctx, u), v);
}

}  // namespace kgnf
