#include "kgnf/normalform.hpp"

#include <cmath>
#include <stdexcept>

namespace kgnf {

namespace {
const cplx I(0.0, 1.0);
}

double delta(double x1, double x2, double m) {
    // The product form cancels about four digits at |x| ~ 1e3; extended
    // precision keeps it comparable with the expanded form.
    const long double X1 = x1, X2 = x2, Lm = m;
    const long double M = Lm - 2.0L * X1 * X2;
    return static_cast<double>(M * M - 4.0L * (X1 * X1 + Lm) * (X2 * X2 + Lm));
}

double delta_expanded(double x1, double x2, double m) {
    return -4.0 * m * (x1 * x1 + x2 * x2 + x1 * x2) - 3.0 * m * m;
}

//--------------------------------------------------------------------------
// Full symbols and their Taylor data
//--------------------------------------------------------------------------

NfSymbols nf_symbols(const ModelSpec& model) {
    const double m = model.m;
    if (!(m > 0.0)) throw std::invalid_argument("mass must be positive");
    NfSymbols s;
    s.q = quadratic_symbols(model);
    s.mass = m;
    const auto q00 = s.q.q00.eval, q01 = s.q.q01.eval, q11 = s.q.q11.eval;
    s.a = {[=](double x1, double x2) {
               const double M = m - 2.0 * x1 * x2;
               const double P = (x1 * x1 + m) * (x2 * x2 + m);
               return (M * q11(x1, x2) + 2.0 * P * q00(x1, x2)) / delta_expanded(x1, x2, m);
           },
           true, Region::full};
    s.b = {[=](double x1, double x2) {
               const double M = m - 2.0 * x1 * x2;
               return (2.0 * q11(x1, x2) + M * q00(x1, x2)) / delta_expanded(x1, x2, m);
           },
           true, Region::full};
    s.c = {[=](double x1, double x2) {
               const double M = m - 2.0 * x1 * x2;
               return (M * q01(x1, x2) - 2.0 * (x2 * x2 + m) * q01(x2, x1)) / delta_expanded(x1, x2, m);
           },
           true, Region::full};
    s.taylor = nf_taylor(model);
    return s;
}

NfTaylor nf_taylor(const ModelSpec& model) {
    const double m = model.m;
    const QTaylor q = q_taylor_coeffs(model);
    NfTaylor t;
    t.a0 = [=](double x) { return (x * q.q11_2(x) - (x * x + m) * q.q00_1(x)) / (2.0 * m); };
    t.a1 = [=](double x) {
        const cplx a0 = (x * q.q11_2(x) - (x * x + m) * q.q00_1(x)) / (2.0 * m);
        return -(m * q.q11_2(x) - 2.0 * x * q.q11_1(x) + 2.0 * (x * x + m) * q.q00_0(x)) / (4.0 * m) - x * a0;
    };
    t.b0 = [=](double x) { return (x * q.q00_1(x) - q.q11_2(x)) / (2.0 * m); };
    t.b1 = [=](double x) {
        const cplx b0 = (x * q.q00_1(x) - q.q11_2(x)) / (2.0 * m);
        return -(2.0 * q.q11_1(x) + m * q.q00_1(x) - 2.0 * x * q.q00_0(x)) / (4.0 * m) - x * b0;
    };
    t.c01 = [=](double x) { return (q.q01_2(x) * x + q.q01t_1(x)) / (2.0 * m); };
    t.c11 = [=](double x) {
        const cplx c0 = (q.q01_2(x) * x + q.q01t_1(x)) / (2.0 * m);
        return -(m * q.q01_2(x) - 2.0 * x * q.q01_1(x) - 2.0 * q.q01t_0(x)) / (4.0 * m) - x * c0;
    };
    t.c02 = [=](double x) { return (q.q01t_1(x) * x + (x * x + m) * q.q01_2(x)) / (2.0 * m); };
    t.c12 = [=](double x) {
        const cplx c0 = (q.q01t_1(x) * x + (x * x + m) * q.q01_2(x)) / (2.0 * m);
        return -(m * q.q01t_1(x) - 2.0 * x * q.q01t_0(x) - 2.0 * (x * x + m) * q.q01_1(x)) / (4.0 * m) - x * c0;
    };
    return t;
}

RegionSplit region_split(const BilinearSymbol& s) {
    return {restrict_to(s, Region::lh), restrict_to(s, Region::hl), restrict_to(s, Region::hh)};
}

//--------------------------------------------------------------------------
// h-system
//--------------------------------------------------------------------------

HSystemSolution solve_h_system(const BilinearSymbol& h00, const BilinearSymbol& h01,
                               const BilinearSymbol& h10, const BilinearSymbol& h11, double m) {
    if (!(m > 0.0)) throw std::invalid_argument("mass must be positive");
    HSystemSolution r;
    r.a = {[=](double x1, double x2) {
               const double M = m - 2.0 * x1 * x2;
               const double P = (x1 * x1 + m) * (x2 * x2 + m);
               return (M * h11(x1, x2) + 2.0 * P * h00(x1, x2)) / delta_expanded(x1, x2, m);
           },
           true, Region::full};
    r.b = {[=](double x1, double x2) {
               const double M = m - 2.0 * x1 * x2;
               return (2.0 * h11(x1, x2) + M * h00(x1, x2)) / delta_expanded(x1, x2, m);
           },
           true, Region::full};
    r.c = {[=](double x1, double x2) {
               const double M = m - 2.0 * x1 * x2;
               return (M * h01(x1, x2) - 2.0 * (x2 * x2 + m) * h10(x1, x2)) / delta_expanded(x1, x2, m);
           },
           true, Region::full};
    r.d = {[=](double x1, double x2) {
               const double M = m - 2.0 * x1 * x2;
               return (M * h10(x1, x2) - 2.0 * (x1 * x1 + m) * h01(x1, x2)) / delta_expanded(x1, x2, m);
           },
           true, Region::full};
    return r;
}

//--------------------------------------------------------------------------
// Conjugation by <D>^sigma. The commutator of <D>^sigma with T_c (c low)
// has symbol K(x1,x2) c^(x1) with K below; each term of the paradifferential
// operator contributes K times the degree-one coefficient symbol times the
// derivative applied to w.
//--------------------------------------------------------------------------

namespace {

double commutator_weight(double x1, double x2, double sigma) {
    const double c = chi_weyl(x1, x2);
    if (c == 0.0 || sigma == 0.0) return 0.0;
    // <x1+x2>^s / <x2>^s - 1 without cancellation when x1 is small.
    const double r = x1 * (x1 + 2.0 * x2) / (1.0 + x2 * x2);
    return std::expm1(0.5 * sigma * std::log1p(r)) * c;
}

}  // namespace

double q_sigma(double x1, double x2, double sigma) {
    const double c = chi_weyl(x1, x2);
    if (c == 0.0 || sigma == 0.0) return 0.0;
    if (std::abs(x1) < 1e-12) return sigma * x2 * x2 / (1.0 + x2 * x2) * c;
    return commutator_weight(x1, x2, sigma) * x2 / x1;
}

ConjugationSymbols conjugation_symbols(double sigma, const ModelSpec& model) {
    const auto& d = model.d;
    const double G01u = d.g01[0], G01t = d.g01[1], G01x = d.g01[2];
    const double G11u = d.g11[0], G11t = d.g11[1], G11x = d.g11[2];
    const double fuu = d.f[0][0], fut = d.f[0][1], fux = d.f[0][2];
    const double ftt = d.f[1][1], ftx = d.f[1][2], fxx = d.f[2][2];
    ConjugationSymbols h;
    h.h11 = {[=](double a, double b) {
                 const double K = commutator_weight(a, b, sigma);
                 if (K == 0.0) return cplx(0.0);
                 const cplx g11 = G11u + I * a * G11x;             // on w_xx
                 const cplx f1 = -G11x * a * a + fux + I * fxx * a;  // on w_x
                 const cplx f0 = -G11u * a * a + fuu + I * fux * a;  // on w
                 return K * (g11 * (-b * b) + f1 * (I * b) + f0);
             },
             true, Region::lh};
    h.h01 = {[=](double a, double b) {
                 const double K = commutator_weight(a, b, sigma);
                 if (K == 0.0) return cplx(0.0);
                 const cplx f1 = 2.0 * I * G01x * a + ftx;
                 const cplx f0 = 2.0 * I * G01u * a + fut;
                 return K * (G11t * (-b * b) + f1 * (I * b) + f0);
             },
             true, Region::lh};
    h.h10 = {[=](double a, double b) {
                 const double K = commutator_weight(a, b, sigma);
                 if (K == 0.0) return cplx(0.0);
                 const cplx g01 = G01u + I * a * G01x;                // 2 T_g01 on w_tx
                 const cplx f0 = -G11t * a * a + fut + I * ftx * a;  // on w_t
                 return K * (2.0 * g01 * (I * b) + f0);
             },
             true, Region::lh};
    h.h00 = {[=](double a, double b) {
                 const double K = commutator_weight(a, b, sigma);
                 if (K == 0.0) return cplx(0.0);
                 return K * (2.0 * G01t * (I * b) + 2.0 * I * G01t * a + ftt);
             },
             true, Region::lh};
    return h;
}

//--------------------------------------------------------------------------
// Tables and application
//--------------------------------------------------------------------------

namespace {

BilinearSymbol scaled(const BilinearSymbol& s, double k) {
    auto fn = s.eval;
    return {[fn, k](double a, double b) { return k * fn(a, b); }, s.parity_real, s.region};
}

// Everything except the low-high box where the first argument (u) is low.
BilinearSymbol not_u_low(const BilinearSymbol& s) {
    auto fn = s.eval;
    return {[fn](double a, double b) {
                const double w = 1.0 - chi_weyl(a, b);
                return w == 0.0 ? cplx(0.0) : w * fn(a, b);
            },
            s.parity_real, Region::full};
}

BilinearSymbol swapped(const BilinearSymbol& s) {
    auto fn = s.eval;
    return {[fn](double a, double b) { return fn(b, a); }, s.parity_real, s.region};
}

}  // namespace

NfTables build_nf_tables(const NfSymbols& s, const Grid& g) {
    NfTables t;
    t.a = SymbolTable(s.a, g);
    t.b = SymbolTable(s.b, g);
    t.c = SymbolTable(s.c, g);
    t.a_lh = SymbolTable(restrict_to(s.a, Region::lh), g);
    t.b_lh = SymbolTable(restrict_to(s.b, Region::lh), g);
    t.c_lh = SymbolTable(restrict_to(s.c, Region::lh), g);
    t.c_hl = SymbolTable(restrict_to(s.c, Region::hl), g);
    t.a_hh = SymbolTable(restrict_to(s.a, Region::hh), g);
    t.b_hh = SymbolTable(restrict_to(s.b, Region::hh), g);
    t.c_hh = SymbolTable(restrict_to(s.c, Region::hh), g);
    t.a_lin = SymbolTable(not_u_low(scaled(s.a, 2.0)), g);
    t.b_lin = SymbolTable(not_u_low(scaled(s.b, 2.0)), g);
    t.c_lin = SymbolTable(not_u_low(s.c), g);
    t.d_lin = SymbolTable(not_u_low(swapped(s.c)), g);
    return t;
}

ConjTables build_conj_tables(double sigma, const ModelSpec& model, const Grid& g) {
    ConjTables t;
    if (sigma == 0.0) return t;
    const auto h = conjugation_symbols(sigma, model);
    const auto sol = solve_h_system(h.h00, h.h01, h.h10, h.h11, model.m);
    t.A = SymbolTable(sol.a, g);
    t.B = SymbolTable(sol.b, g);
    t.C = SymbolTable(sol.c, g);
    t.D = SymbolTable(sol.d, g);
    t.active = true;
    return t;
}

Field nf_full_correction(const NfTables& t, const State& u) {
    return t.a.apply(u.pos, u.pos) + t.b.apply(u.vel, u.vel) + t.c.apply(u.vel, u.pos);
}

State nf_hh(const NfTables& t, const State& u, const Field& utt) {
    Field pos = u.pos + t.a_hh.apply(u.pos, u.pos) + t.b_hh.apply(u.vel, u.vel) + t.c_hh.apply(u.vel, u.pos);
    Field vel = u.vel + t.a_hh.apply(u.vel, u.pos) + t.a_hh.apply(u.pos, u.vel) + t.b_hh.apply(utt, u.vel) +
                t.b_hh.apply(u.vel, utt) + t.c_hh.apply(utt, u.pos) + t.c_hh.apply(u.vel, u.vel);
    return State(std::move(pos), std::move(vel), u.time);
}

State nf_linearized(const NfTables& t, const State& u, const Field& utt, const State& v, const Field& vtt) {
    Field pos = v.pos + t.a_lin.apply(u.pos, v.pos) + t.b_lin.apply(u.vel, v.vel) + t.c_lin.apply(u.vel, v.pos) +
                t.d_lin.apply(u.pos, v.vel);
    Field vel = v.vel + t.a_lin.apply(u.vel, v.pos) + t.a_lin.apply(u.pos, v.vel) + t.b_lin.apply(utt, v.vel) +
                t.b_lin.apply(u.vel, vtt) + t.c_lin.apply(utt, v.pos) + t.c_lin.apply(u.vel, v.vel) +
                t.d_lin.apply(u.vel, v.vel) + t.d_lin.apply(u.pos, vtt);
    return State(std::move(pos), std::move(vel), v.time);
}

Field apply_nf_full(const State& st, const ModelSpec& model) {
    const auto s = nf_symbols(model);
    NfTables t;
    t.a = SymbolTable(s.a, st.grid());
    t.b = SymbolTable(s.b, st.grid());
    t.c = SymbolTable(s.c, st.grid());
    return st.pos + nf_full_correction(t, st);
}

State apply_nf_hh(const State& st, const ModelSpec& model) {
    const auto s = nf_symbols(model);
    NfTables t;
    t.a_hh = SymbolTable(restrict_to(s.a, Region::hh), st.grid());
    t.b_hh = SymbolTable(restrict_to(s.b, Region::hh), st.grid());
    t.c_hh = SymbolTable(restrict_to(s.c, Region::hh), st.grid());
    return nf_hh(t, st, utt_from_state(st, model));
}

State apply_nf_linearized(const State& u, const State& v, const ModelSpec& model) {
    check_same_grid(u.pos, v.pos);
    const auto t = build_nf_tables(nf_symbols(model), u.grid());
    const auto coeffs = linearized_coefficients(u, model);
    return nf_linearized(t, u, utt_from_state(u, model), v, linearized_vtt(coeffs, v, model.m));
}

Field nf_cubic_source(const NfTables& t, const State& u, const ModelSpec& model) {
    const Field utt = utt_from_state(u, model);
    // u_t solves the linearized equation, which gives u_ttt exactly.
    const auto coeffs = linearized_coefficients(u, model);
    const Field uttt = linearized_vtt(coeffs, State(u.vel, utt), model.m);
    const Field& p = u.pos;
    const Field& v = u.vel;
    Field X = nf_full_correction(t, u);
    Field Xtt = t.a.apply(utt, p) + 2.0 * t.a.apply(v, v) + t.a.apply(p, utt) + t.b.apply(uttt, v) +
                2.0 * t.b.apply(utt, utt) + t.b.apply(v, uttt) + t.c.apply(uttt, p) + 2.0 * t.c.apply(utt, v) +
                t.c.apply(v, utt);
    // L_KG u = u_tt - u_xx + m u
    Field Lu = utt - dxx(p) + model.m * p;
    Field LX = Xtt - dxx(X) + model.m * X;
    return Lu + LX;
}

}  // namespace kgnf
