#pragma once
// Energy functionals: base energy, normal form energy, paracoefficient main
// energy and its homogeneity grading, the corrected energies at H^1 and H^s
// regularity, and the linearized energy.

#include "kgnf/model.hpp"
#include "kgnf/normalform.hpp"
#include "kgnf/spectral.hpp"

#include <map>

namespace kgnf {

struct ParaCoefficients {
    Field k0, k1, k2;
};

struct GradedScalar {
    double total = 0.0;
    std::map<int, double> by_degree;  ///< 2, 3 and 4 (meaning >= 4)
};

/// Everything that depends only on the model, the grid and s.
class EnergyContext {
public:
    EnergyContext(ModelSpec model, const Grid& grid, double s = 1.0, bool skip_conjugation = false);

    const ModelSpec& model() const { return model_; }
    const Grid& grid() const { return grid_; }
    const NfSymbols& symbols() const { return sym_; }
    const NfTables& tables() const { return nf_; }
    const ConjTables& conj() const { return conj_; }
    double sigma() const { return sigma_; }
    bool skip_conjugation() const { return skip_conj_; }

private:
    ModelSpec model_;
    Grid grid_;
    NfSymbols sym_;
    NfTables nf_;
    ConjTables conj_;
    double sigma_;
    bool skip_conj_;
};

/// Quantities of the background u reused by every functional.
struct Background {
    State u;
    Field utt;
    LinearizedCoefficients lin;
    ParaCoefficients kappa;
    Field lam11, lam01;  ///< degree-one parts of g11, g01
    Field r11, r01;      ///< remainders g11 - 1 - lam11, g01 - lam01
};

Background make_background(const EnergyContext& ctx, const State& u);

double base_energy(const State& w, double m);

ParaCoefficients para_coefficients(const State& u, const NfTaylor& t, double m);
ParaCoefficients para_coefficients(const State& u, const ModelSpec& model);

/// w_tt from the homogeneous paradifferential equation driven by u.
Field para_wtt(const Background& bg, const State& w, double m);

double nf_energy(const EnergyContext& ctx, const Background& bg, const State& w);
double main_energy(const Background& bg, const State& w);
GradedScalar graded_main_energy(const Background& bg, const State& w);
double modified_energy_h1(const EnergyContext& ctx, const Background& bg, const State& w);

/// Conjugated, corrected pair (w~, w^_t) fed into the H^1 energy.
State conjugated_pair(const EnergyContext& ctx, const Background& bg, const State& w);
double modified_energy_s(const EnergyContext& ctx, const State& u);
double modified_energy_s(const EnergyContext& ctx, const Background& bg);
double linearized_energy(const EnergyContext& ctx, const Background& bg, const State& v);

// Convenience overloads that build a context on the fly.
double nf_energy(const State& u, const State& w, const ModelSpec& model);
double main_energy(const State& u, const State& w, const ModelSpec& model);
GradedScalar graded_main_energy(const State& u, const State& w, const ModelSpec& model);
double modified_energy_h1(const State& u, const State& w, const ModelSpec& model);
double modified_energy_s(const State& u, const ModelSpec& model, double s);
double linearized_energy(const State& u, const State& v, const ModelSpec& model);

}  // namespace kgnf
