#pragma once
// The PDE instance  u_tt = 2 g01 u_tx + g11 u_xx + f - m u  (g00 = -1),
// its origin derivatives, quadratic symbols and u_tt elimination.

#include "kgnf/bilinear.hpp"
#include "kgnf/spectral.hpp"

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace kgnf {

/// Point (u, u_t, u_x) of the one-jet.
using Jet = std::array<double, 3>;
using Hessian = std::array<std::array<double, 3>, 3>;

/// Polynomial in (u, u_t, u_x): exponent triple -> coefficient.
struct Polynomial3 {
    std::map<std::array<int, 3>, double> terms;

    double eval(const Jet& p) const;
    Jet grad(const Jet& p) const;
    Hessian hess(const Jet& p) const;
    Polynomial3& add(int eu, int et, int ex, double c);
};

/// A smooth scalar function of the one-jet with optional analytic
/// derivatives; missing derivatives fall back to central differences.
class Coefficient {
public:
    using ValueFn = std::function<double(const Jet&)>;
    using GradFn = std::function<Jet(const Jet&)>;
    using HessFn = std::function<Hessian(const Jet&)>;

    Coefficient() : Coefficient(ValueFn([](const Jet&) { return 0.0; })) {}
    explicit Coefficient(ValueFn v, GradFn g = {}, HessFn h = {});
    static Coefficient constant(double c);
    static Coefficient polynomial(Polynomial3 p);

    double operator()(const Jet& p) const { return value_(p); }
    Jet grad(const Jet& p) const;
    Hessian hess(const Jet& p) const;
    Jet grad_fd(const Jet& p, double h = 1e-5) const;
    Hessian hess_fd(const Jet& p, double h = 1e-5) const;
    bool analytic() const { return static_cast<bool>(grad_) && static_cast<bool>(hess_); }

private:
    ValueFn value_;
    GradFn grad_;
    HessFn hess_;
};

/// Derivative data at the origin. Index order of Jet: 0 = u, 1 = u_t, 2 = u_x.
struct OriginDerivs {
    Jet g01{};     ///< first derivatives of g01
    Jet g11{};     ///< first derivatives of g11
    Hessian f{};   ///< second derivatives of f
};

struct ModelSpec {
    std::string name;
    double m = 1.0;
    Coefficient g01;
    Coefficient g11;
    Coefficient f;
    OriginDerivs d;
    bool dealias = true;  ///< apply the 2/3 rule to u_tt
};

/// Build a normalized model, filling the origin derivatives and checking
/// g01(0)=0, g11(0)=1, f(0)=0, grad f(0)=0.
ModelSpec make_model(std::string name, double m, Coefficient g01, Coefficient g11, Coefficient f);

/// Gallery: flat, g11u, g01ut, fuu, futut, generic.
ModelSpec gallery_model(const std::string& name, double m = 1.0);
std::vector<std::string> gallery_names();

/// Custom polynomial model; table keys are "<g01|g11|f>:<monomial>" with
/// monomials such as "u", "ut^2", "u*ux" (constants of g11 are implied).
ModelSpec polynomial_model(const std::string& name, double m,
                           const std::map<std::string, double>& table);

struct RawModel {
    std::string name;
    double m = 1.0;
    Coefficient g00;
    Coefficient g01;
    Coefficient g11;
    Coefficient f;
};

/// Divide by -g00. Probes g00 < 0 on the cube |u|,|u_t|,|u_x| <= radius.
ModelSpec normalize_metric(const RawModel& raw, double radius = 0.5);

struct QuadSymbols {
    BilinearSymbol q00;  ///< (u_t, u_t)
    BilinearSymbol q01;  ///< (u_t, u)
    BilinearSymbol q11;  ///< (u, u)
};

QuadSymbols quadratic_symbols(const ModelSpec& model);

/// q(x1,x2) = sum_k q^(k)(x1) x2^k; q01t is q01 with its arguments swapped.
struct QTaylor {
    Multiplier q00_0, q00_1;
    Multiplier q11_0, q11_1, q11_2;
    Multiplier q01_0, q01_1, q01_2;
    Multiplier q01t_0, q01t_1;
};

QTaylor q_taylor_coeffs(const ModelSpec& model);

/// Physical-space samples of the jet and second derivatives of a state.
struct PhysicalJet {
    std::vector<double> u, ut, ux, uxx, utx;
};
PhysicalJet physical_jet(const State& st);

Field utt_from_state(const State& st, const ModelSpec& model);

struct LinearizedCoefficients {
    Field F0;  ///< coefficient of v_t
    Field F1;  ///< coefficient of v_x
    Field F;   ///< coefficient of v
    Field g01; ///< g01 along the state
    Field g11; ///< g11 along the state
};

LinearizedCoefficients linearized_coefficients(const State& st, const ModelSpec& model);

/// v_tt of the linearized flow  v_tt = g11 v_xx + 2 g01 v_tx + F0 v_t + F1 v_x + F v - m v,
/// products dealiased.
Field linearized_vtt(const LinearizedCoefficients& c, const State& v, double m);

/// Degree-one parts of g11 and g01 along a state, and of the linearized
/// coefficients (used by the grading and the conjugation forms).
Field lambda1_g11(const State& st, const ModelSpec& model);
Field lambda1_g01(const State& st, const ModelSpec& model);

}  // namespace kgnf
