#include "kgnf/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kgnf {

//--------------------------------------------------------------------------
// Polynomials in the one-jet
//--------------------------------------------------------------------------

namespace {

double ipow(double x, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= x;
    return r;
}

}  // namespace

Polynomial3& Polynomial3::add(int eu, int et, int ex, double c) {
    terms[{eu, et, ex}] += c;
    return *this;
}

double Polynomial3::eval(const Jet& p) const {
    double s = 0.0;
    for (const auto& [e, c] : terms) s += c * ipow(p[0], e[0]) * ipow(p[1], e[1]) * ipow(p[2], e[2]);
    return s;
}

Jet Polynomial3::grad(const Jet& p) const {
    Jet g{};
    for (const auto& [e, c] : terms) {
        for (int i = 0; i < 3; ++i) {
            if (e[i] == 0) continue;
            double t = c * e[i];
            for (int j = 0; j < 3; ++j) t *= ipow(p[j], j == i ? e[j] - 1 : e[j]);
            g[i] += t;
        }
    }
    return g;
}

Hessian Polynomial3::hess(const Jet& p) const {
    Hessian h{};
    for (const auto& [e, c] : terms) {
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k) {
                std::array<int, 3> r = e;
                double t = c;
                t *= r[i]--;
                if (r[i] < 0) continue;
                t *= r[k]--;
                if (r[k] < 0 || t == 0.0) continue;
                for (int j = 0; j < 3; ++j) t *= ipow(p[j], r[j]);
                h[i][k] += t;
            }
        }
    }
    return h;
}

//--------------------------------------------------------------------------
// Coefficient
//--------------------------------------------------------------------------

Coefficient::Coefficient(ValueFn v, GradFn g, HessFn h)
    : value_(std::move(v)), grad_(std::move(g)), hess_(std::move(h)) {}

Coefficient Coefficient::constant(double c) {
    return Coefficient([c](const Jet&) { return c; }, [](const Jet&) { return Jet{}; },
                       [](const Jet&) { return Hessian{}; });
}

Coefficient Coefficient::polynomial(Polynomial3 p) {
    return Coefficient([p](const Jet& x) { return p.eval(x); }, [p](const Jet& x) { return p.grad(x); },
                       [p](const Jet& x) { return p.hess(x); });
}

Jet Coefficient::grad(const Jet& p) const { return grad_ ? grad_(p) : grad_fd(p); }

Hessian Coefficient::hess(const Jet& p) const { return hess_ ? hess_(p) : hess_fd(p); }

Jet Coefficient::grad_fd(const Jet& p, double h) const {
    Jet g{};
    for (int i = 0; i < 3; ++i) {
        Jet a = p, b = p;
        a[i] += h;
        b[i] -= h;
        g[i] = (value_(a) - value_(b)) / (2.0 * h);
    }
    return g;
}

Hessian Coefficient::hess_fd(const Jet& p, double h) const {
    Hessian H{};
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            Jet pp = p, pm = p, mp = p, mm = p;
            pp[i] += h; pp[k] += h;
            pm[i] += h; pm[k] -= h;
            mp[i] -= h; mp[k] += h;
            mm[i] -= h; mm[k] -= h;
            H[i][k] = (value_(pp) - value_(pm) - value_(mp) + value_(mm)) / (4.0 * h * h);
        }
    }
    return H;
}

//--------------------------------------------------------------------------
// Models
//--------------------------------------------------------------------------

ModelSpec make_model(std::string name, double m, Coefficient g01, Coefficient g11, Coefficient f) {
    if (!(m > 0.0)) throw std::invalid_argument("mass must be positive");
    const Jet o{};
    const double tol = 1e-12;
    if (std::abs(g01(o)) > tol) throw std::invalid_argument("g01 must vanish at the origin");
    if (std::abs(g11(o) - 1.0) > tol) throw std::invalid_argument("g11 must equal 1 at the origin");
    if (std::abs(f(o)) > tol) throw std::invalid_argument("f must vanish at the origin");
    ModelSpec ms{std::move(name), m, std::move(g01), std::move(g11), std::move(f), {}};
    const Jet fg = ms.f.grad(o);
    for (double v : fg)
        if (std::abs(v) > 1e-9) throw std::invalid_argument("f must be at least quadratic at the origin");
    ms.d.g01 = ms.g01.grad(o);
    ms.d.g11 = ms.g11.grad(o);
    ms.d.f = ms.f.hess(o);
    return ms;
}

std::vector<std::string> gallery_names() { return {"flat", "g11u", "g01ut", "fuu", "futut", "generic"}; }

ModelSpec gallery_model(const std::string& name, double m) {
    Polynomial3 g01, g11, f;
    g11.add(0, 0, 0, 1.0);
    if (name == "flat") {
    } else if (name == "g11u") {
        g11.add(1, 0, 0, 1.0);
    } else if (name == "g01ut") {
        g01.add(0, 1, 0, 1.0);
    } else if (name == "fuu") {
        f.add(2, 0, 0, 1.0);
    } else if (name == "futut") {
        f.add(0, 2, 0, 1.0);
    } else if (name == "generic") {
        g01.add(1, 0, 0, 0.5).add(0, 1, 0, 0.3).add(0, 0, 1, -0.4);
        g11.add(1, 0, 0, 0.7).add(0, 1, 0, -0.2).add(0, 0, 1, 0.5).add(2, 0, 0, 0.3);
        f.add(2, 0, 0, 0.3).add(1, 1, 0, -0.5).add(0, 2, 0, 0.4).add(3, 0, 0, 0.2);
    } else {
        throw std::invalid_argument("unknown gallery model '" + name + "'");
    }
    return make_model(name, m, Coefficient::polynomial(g01), Coefficient::polynomial(g11),
                      Coefficient::polynomial(f));
}

namespace {

std::array<int, 3> parse_monomial(const std::string& mono, const std::string& key) {
    std::array<int, 3> e{0, 0, 0};
    if (mono == "1") return e;
    std::stringstream ss(mono);
    std::string tok;
    while (std::getline(ss, tok, '*')) {
        int p = 1;
        auto caret = tok.find('^');
        std::string var = tok.substr(0, caret);
        if (caret != std::string::npos) {
            try {
                p = std::stoi(tok.substr(caret + 1));
            } catch (...) {
                throw std::invalid_argument("bad exponent in coefficient key '" + key + "'");
            }
            if (p < 0) throw std::invalid_argument("negative exponent in '" + key + "'");
        }
        if (var == "u") e[0] += p;
        else if (var == "ut") e[1] += p;
        else if (var == "ux") e[2] += p;
        else throw std::invalid_argument("unknown variable '" + var + "' in coefficient key '" + key + "'");
    }
    return e;
}

}  // namespace

ModelSpec polynomial_model(const std::string& name, double m, const std::map<std::string, double>& table) {
    Polynomial3 g01, g11, f;
    g11.add(0, 0, 0, 1.0);
    for (const auto& [key, c] : table) {
        auto colon = key.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("coefficient key '" + key + "' must look like channel:monomial");
        const std::string ch = key.substr(0, colon);
        const auto e = parse_monomial(key.substr(colon + 1), key);
        if (ch == "g01") g01.terms[e] += c;
        else if (ch == "g11") g11.terms[e] += c;
        else if (ch == "f") f.terms[e] += c;
        else throw std::invalid_argument("unknown channel '" + ch + "' in coefficient key '" + key + "'");
    }
    return make_model(name, m, Coefficient::polynomial(g01), Coefficient::polynomial(g11),
                      Coefficient::polynomial(f));
}

ModelSpec normalize_metric(const RawModel& raw, double radius) {
    const double steps[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
    for (double a : steps)
        for (double b : steps)
            for (double c : steps) {
                const double v = raw.g00(Jet{a * radius, b * radius, c * radius});
                if (!(v < 0.0)) throw std::domain_error("g00 must stay negative on the probed states");
            }
    if (std::abs(raw.g00(Jet{}) + 1.0) > 1e-12) throw std::invalid_argument("g00 must equal -1 at the origin");
    const auto g00 = raw.g00, g01 = raw.g01, g11 = raw.g11, f = raw.f;
    const double m = raw.m;
    Coefficient n01([g00, g01](const Jet& p) { return g01(p) / -g00(p); });
    Coefficient n11([g00, g11](const Jet& p) { return g11(p) / -g00(p); });
    // Dividing the mass term too would change m; move the difference into f.
    Coefficient nf([g00, f, m](const Jet& p) {
        const double gam = -g00(p);
        return f(p) / gam + m * p[0] * (1.0 - 1.0 / gam);
    });
    return make_model(raw.name, raw.m, n01, n11, nf);
}

//--------------------------------------------------------------------------
// Quadratic symbols. Taylor coefficients of f: Fuu = f_uu/2, Ftt = f_tt/2,
// Fxx = f_xx/2, mixed ones are the plain mixed derivatives.
//--------------------------------------------------------------------------

namespace {

struct QCoef {
    double G01u, G01t, G01x, G11u, G11t, G11x;
    double Fuu, Ftt, Fxx, Fut, Fux, Ftx;
};

QCoef coef_of(const ModelSpec& ms) {
    const auto& d = ms.d;
    return {d.g01[0], d.g01[1], d.g01[2], d.g11[0], d.g11[1], d.g11[2],
            0.5 * d.f[0][0], 0.5 * d.f[1][1], 0.5 * d.f[2][2], d.f[0][1], d.f[0][2], d.f[1][2]};
}

}  // namespace

QuadSymbols quadratic_symbols(const ModelSpec& model) {
    const QCoef c = coef_of(model);
    const cplx I(0.0, 1.0);
    QuadSymbols q;
    q.q00 = {[c, I](double a, double b) { return c.Ftt + I * c.G01t * (a + b); }, true, Region::full};
    q.q01 = {[c, I](double a, double b) {
                 return c.Fut + 2.0 * I * c.G01u * a - 2.0 * c.G01x * a * b - c.G11t * b * b + I * c.Ftx * b;
             },
             true, Region::full};
    q.q11 = {[c, I](double a, double b) {
                 return c.Fuu - 0.5 * c.G11u * (a * a + b * b) - 0.5 * I * c.G11x * (a * b * b + b * a * a) +
                        0.5 * I * c.Fux * (a + b) - c.Fxx * a * b;
             },
             true, Region::full};
    return q;
}

QTaylor q_taylor_coeffs(const ModelSpec& model) {
    const QCoef c = coef_of(model);
    const cplx I(0.0, 1.0);
    QTaylor t;
    t.q00_0 = [c, I](double x) { return c.Ftt + I * c.G01t * x; };
    t.q00_1 = [c, I](double) { return I * c.G01t; };
    t.q11_0 = [c, I](double x) { return c.Fuu - 0.5 * c.G11u * x * x + 0.5 * I * c.Fux * x; };
    t.q11_1 = [c, I](double x) { return -0.5 * I * c.G11x * x * x + 0.5 * I * c.Fux - c.Fxx * x; };
    t.q11_2 = [c, I](double x) { return -0.5 * c.G11u - 0.5 * I * c.G11x * x; };
    t.q01_0 = [c, I](double x) { return c.Fut + 2.0 * I * c.G01u * x; };
    t.q01_1 = [c, I](double x) { return -2.0 * c.G01x * x + I * c.Ftx; };
    t.q01_2 = [c](double) { return cplx(-c.G11t); };
    t.q01t_0 = [c, I](double x) { return c.Fut - c.G11t * x * x + I * c.Ftx * x; };
    t.q01t_1 = [c, I](double x) { return 2.0 * I * c.G01u - 2.0 * c.G01x * x; };
    return t;
}

//--------------------------------------------------------------------------
// Pseudospectral evaluation
//--------------------------------------------------------------------------

PhysicalJet physical_jet(const State& st) {
    PhysicalJet j;
    j.u = to_physical(st.pos);
    j.ut = to_physical(st.vel);
    j.ux = to_physical(dx(st.pos));
    j.uxx = to_physical(dxx(st.pos));
    j.utx = to_physical(dx(st.vel));
    return j;
}

Field utt_from_state(const State& st, const ModelSpec& model) {
    const PhysicalJet j = physical_jet(st);
    const size_t n = j.u.size();
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        const Jet p{j.u[i], j.ut[i], j.ux[i]};
        const double v = 2.0 * model.g01(p) * j.utx[i] + model.g11(p) * j.uxx[i] + model.f(p) - model.m * j.u[i];
        if (!std::isfinite(v)) throw std::domain_error("non-finite value in u_tt (blow-up)");
        out[i] = v;
    }
    Field r = to_spectral(out, st.grid());
    return model.dealias ? dealias(r) : r;
}

LinearizedCoefficients linearized_coefficients(const State& st, const ModelSpec& model) {
    const PhysicalJet j = physical_jet(st);
    const size_t n = j.u.size();
    std::vector<double> F0(n), F1(n), F(n), G01(n), G11(n);
    for (size_t i = 0; i < n; ++i) {
        const Jet p{j.u[i], j.ut[i], j.ux[i]};
        const Jet d01 = model.g01.grad(p), d11 = model.g11.grad(p), df = model.f.grad(p);
        F0[i] = d11[1] * j.uxx[i] + 2.0 * d01[1] * j.utx[i] + df[1];
        F1[i] = d11[2] * j.uxx[i] + 2.0 * d01[2] * j.utx[i] + df[2];
        F[i] = d11[0] * j.uxx[i] + 2.0 * d01[0] * j.utx[i] + df[0];
        G01[i] = model.g01(p);
        G11[i] = model.g11(p);
        if (!std::isfinite(F0[i] + F1[i] + F[i] + G01[i] + G11[i]))
            throw std::domain_error("non-finite linearized coefficient (blow-up)");
    }
    const Grid& g = st.grid();
    return {to_spectral(F0, g), to_spectral(F1, g), to_spectral(F, g), to_spectral(G01, g), to_spectral(G11, g)};
}

Field linearized_vtt(const LinearizedCoefficients& c, const State& v, double m) {
    const auto g11 = to_physical(c.g11), g01 = to_physical(c.g01);
    const auto F0 = to_physical(c.F0), F1 = to_physical(c.F1), F = to_physical(c.F);
    const auto vv = to_physical(v.pos), vt = to_physical(v.vel), vx = to_physical(dx(v.pos));
    const auto vxx = to_physical(dxx(v.pos)), vtx = to_physical(dx(v.vel));
    std::vector<double> out(vv.size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = g11[i] * vxx[i] + 2.0 * g01[i] * vtx[i] + F0[i] * vt[i] + F1[i] * vx[i] + F[i] * vv[i] -
                 m * vv[i];
    return dealias(to_spectral(out, v.grid()));
}

Field lambda1_g11(const State& st, const ModelSpec& model) {
    const Jet& d = model.d.g11;
    return d[0] * st.pos + d[1] * st.vel + d[2] * dx(st.pos);
}

Field lambda1_g01(const State& st, const ModelSpec& model) {
    const Jet& d = model.d.g01;
    return d[0] * st.pos + d[1] * st.vel + d[2] * dx(st.pos);
}

}  // namespace kgnf
