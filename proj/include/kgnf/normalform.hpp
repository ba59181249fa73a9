#pragma once
// Normal form symbols, their low-high Taylor data, region splits, the
// generalized (h-system) solver, conjugation symbols and the application of
// normal form corrections to states.

#include "kgnf/bilinear.hpp"
#include "kgnf/model.hpp"
#include "kgnf/spectral.hpp"

namespace kgnf {

/// (m - 2 x1 x2)^2 - 4 (x1^2 + m)(x2^2 + m)
double delta(double x1, double x2, double m);
/// -4m (x1^2 + x2^2 + x1 x2) - 3 m^2
double delta_expanded(double x1, double x2, double m);

/// Low-high expansion multipliers:
///   a ~ a0(x1) x2 + a1(x1),  b ~ b0(x1) + b1(x1)/x2,
///   c_lh ~ c01(x1) x2 + c11(x1),  c_hl ~ c02(x2) + c12(x2)/x1.
struct NfTaylor {
    Multiplier a0, a1, b0, b1, c01, c11, c02, c12;
};

struct NfSymbols {
    BilinearSymbol a, b, c;
    NfTaylor taylor;
    QuadSymbols q;
    double mass = 1.0;
};

NfSymbols nf_symbols(const ModelSpec& model);
NfTaylor nf_taylor(const ModelSpec& model);

struct RegionSplit {
    BilinearSymbol lh, hl, hh;
};
RegionSplit region_split(const BilinearSymbol& s);

struct HSystemSolution {
    BilinearSymbol a, b, c, d;
};

/// Corrections A(u,w) + B(u_t,w_t) + C(u_t,w) + D(u,w_t) removing the
/// quadratic source h11(u,w) + h00(u_t,w_t) + h01(u_t,w) + h10(u,w_t).
HSystemSolution solve_h_system(const BilinearSymbol& h00, const BilinearSymbol& h01,
                               const BilinearSymbol& h10, const BilinearSymbol& h11, double m);

struct ConjugationSymbols {
    BilinearSymbol h00, h01, h10, h11;
};

/// (<x1+x2>^s <x2>^-s - 1) chi_weyl(x1,x2) x2 / x1, continuous at x1 = 0.
double q_sigma(double x1, double x2, double sigma);
ConjugationSymbols conjugation_symbols(double sigma, const ModelSpec& model);

/// Tabulated normal form operators on one grid.
struct NfTables {
    SymbolTable a, b, c;                 ///< full
    SymbolTable a_lh, b_lh, c_lh, c_hl;  ///< energy cross terms
    SymbolTable a_hh, b_hh, c_hh;        ///< high-high correction
    SymbolTable a_lin, b_lin, c_lin, d_lin;  ///< linearized correction
};
NfTables build_nf_tables(const NfSymbols& s, const Grid& grid);

struct ConjTables {
    SymbolTable A, B, C, D;
    bool active = false;
};
ConjTables build_conj_tables(double sigma, const ModelSpec& model, const Grid& grid);

/// A(u,u) + B(u_t,u_t) + C(u_t,u) with full symbols.
Field nf_full_correction(const NfTables& t, const State& u);
/// (u_NF, companion velocity) given u_tt.
State nf_hh(const NfTables& t, const State& u, const Field& utt);
/// (v_NF, companion velocity) given u_tt and v_tt.
State nf_linearized(const NfTables& t, const State& u, const Field& utt, const State& v, const Field& vtt);

Field apply_nf_full(const State& st, const ModelSpec& model);
State apply_nf_hh(const State& st, const ModelSpec& model);
State apply_nf_linearized(const State& u, const State& v, const ModelSpec& model);

/// L_KG of the full normal form variable (cubic and higher source), exact up
/// to dealiasing of the pointwise nonlinearity.
Field nf_cubic_source(const NfTables& t, const State& u, const ModelSpec& model);

}  // namespace kgnf
