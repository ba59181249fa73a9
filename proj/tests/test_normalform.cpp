#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kgnf/experiments.hpp"
#include "kgnf/normalform.hpp"
#include "support.hpp"

using namespace kgnf;
using namespace kgnf::testing;

namespace {

BilinearSymbol constant(double v) { return {[v](double, double) { return cplx(v); }}; }

}  // namespace

TEST_CASE("resonance function") {
    CHECK(delta(0, 0, 1) == doctest::Approx(-3));
    CHECK(delta_expanded(0, 0, 1) == doctest::Approx(-3));
    CHECK(delta(1, -1, 1) == doctest::Approx(-7));
    CHECK(delta_expanded(1, -1, 1) == doctest::Approx(-7));
    CHECK(delta_expanded(0, 0, 2) == doctest::Approx(-12));
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double a = rng.uniform(-1e3, 1e3), b = rng.uniform(-1e3, 1e3), m = rng.uniform(0.5, 3);
        CHECK(delta_expanded(a, b, m) <= -3 * m * m);
        CHECK(std::abs(delta(a, b, m) - delta_expanded(a, b, m)) <= 1e-12 * std::abs(delta_expanded(a, b, m)));
    }
}

TEST_CASE("normal form symbols at the origin") {
    const NfSymbols z = nf_symbols(gallery_model("flat"));
    CHECK(std::abs(z.a(0.3, 7)) + std::abs(z.b(0.3, 7)) + std::abs(z.c(0.3, 7)) == 0.0);

    // Generalized solver with unit sources, m = 1 at (0, 0).
    const auto s00 = solve_h_system(constant(1), constant(0), constant(0), constant(0), 1.0);
    CHECK(std::abs(s00.a(0, 0) - (-2.0 / 3)) < 1e-15);
    CHECK(std::abs(s00.b(0, 0) - (-1.0 / 3)) < 1e-15);
    const auto s01 = solve_h_system(constant(0), constant(1), constant(0), constant(0), 1.0);
    CHECK(std::abs(s01.c(0, 0) - (-1.0 / 3)) < 1e-15);
    CHECK(std::abs(s01.d(0, 0) - (2.0 / 3)) < 1e-15);
    const auto zero = solve_h_system(constant(0), constant(0), constant(0), constant(0), 1.0);
    CHECK(std::abs(zero.a(2, 3)) + std::abs(zero.b(2, 3)) + std::abs(zero.c(2, 3)) + std::abs(zero.d(2, 3)) == 0.0);

    // f = u u_t gives q01 = 1, so c(0,0) = (1 - 2)/(-3).
    const NfSymbols s = nf_symbols(polynomial_model("c", 1.0, {{"f:u*ut", 1.0}}));
    CHECK(std::abs(s.q.q01(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(s.c(0, 0) - 1.0 / 3) < 1e-15);
    CHECK(std::abs(1.0 * s.c(0, 0) + 2.0 * s.c(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("Taylor data of the g11 = 1 + u model") {
    for (double m : {1.0, 2.0}) {
        const NfTaylor t = nf_taylor(gallery_model("g11u", m));
        for (double x : {-3.0, 0.5, 12.0}) {
            CHECK(std::abs(t.a0(x) + x / (4 * m)) < 1e-15);
            CHECK(std::abs(t.b0(x) - 1 / (4 * m)) < 1e-15);
        }
    }
}

TEST_CASE("lead symbol identities on every gallery model") {
    Rng rng(17);
    for (const auto& name : gallery_names()) {
        const ModelSpec model = gallery_model(name);
        const NfTaylor t = nf_taylor(model);
        const auto& d = model.d;
        for (int i = 0; i < 1000; ++i) {
            const double x = rng.uniform(-1e3, 1e3);
            CHECK(std::abs(t.c01(x) * x - t.c02(x) - 0.5 * d.g11[1]) < 1e-12 * (1 + std::abs(t.c01(x) * x)));
            const cplx lhs = t.a0(x) * x + t.b0(x) * (x * x + model.m);
            const cplx rhs = 0.25 * d.g11[0] + cplx(0, 0.25) * d.g11[2] * x;
            CHECK(std::abs(lhs - rhs) < 1e-12 * (1 + std::abs(t.a0(x) * x)));
        }
    }
}

TEST_CASE("region split") {
    const auto r = region_split(constant(1));
    for (double a : {0.0, 1.0, 5.0, -30.0})
        for (double b : {0.0, 5.0, 40.0, -400.0}) {
            CHECK(std::abs(r.lh(a, b) - chi_weyl(a, b)) < 1e-15);
            CHECK(std::abs(r.hl(a, b) - chi_weyl(b, a)) < 1e-15);
            CHECK(std::abs(r.hh(a, b) - chi_weyl_hh(a, b)) < 1e-15);
        }
    CHECK(r.lh(5, 5) == cplx(0.0));
    const NfSymbols s = nf_symbols(gallery_model("generic"));
    const auto split = region_split(s.a);
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const double a = rng.uniform(-200, 200), b = rng.uniform(-200, 200);
        CHECK(std::abs(split.lh(a, b) + split.hl(a, b) + split.hh(a, b) - s.a(a, b)) <= 1e-12 * (1 + std::abs(s.a(a, b))));
    }
}

TEST_CASE("high-high symbol grows at most quadratically on the antidiagonal") {
    const NfSymbols s = nf_symbols(gallery_model("generic"));
    const auto hh = region_split(s.a).hh;
    std::vector<double> ks, vs;
    for (double k = 50; k <= 2000; k *= 1.5) {
        ks.push_back(k);
        vs.push_back(std::abs(hh(k, -k + 1)));
    }
    const SlopeFit f = fit_loglog(ks, vs);
    CHECK(f.slope <= 2.1);
}

TEST_CASE("conjugation weight") {
    const double want = (std::sqrt(1682.0) / std::sqrt(1601.0) - 1) * 40;
    CHECK(q_sigma(1, 40, 1.0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(want == doctest::Approx(0.9994).epsilon(1e-3));
    // Continuous at x1 = 0.
    CHECK(q_sigma(1e-9, 40, 1.0) == doctest::Approx(q_sigma(0, 40, 1.0)).epsilon(1e-7));
    double sup = 0;
    Rng rng(5);
    for (int i = 0; i < 5000; ++i) {
        const double b = rng.uniform(-1e3, 1e3), a = rng.uniform(-1, 1) * jbracket(b) / 20;
        if (chi_weyl(a, b) == 0.0) continue;
        sup = std::max(sup, std::abs(q_sigma(a, b, 1.0)));
    }
    CHECK(sup < 2.0);
    const auto c0 = conjugation_symbols(0.0, gallery_model("generic"));
    for (double a : {0.0, 1.0})
        for (double b : {30.0, -100.0})
            CHECK(std::abs(c0.h00(a, b)) + std::abs(c0.h01(a, b)) + std::abs(c0.h10(a, b)) + std::abs(c0.h11(a, b)) == 0.0);
}

TEST_CASE("normal form maps") {
    const Grid g = make_grid(64, 2 * kPi);
    const ModelSpec model = gallery_model("generic");
    const State z(g);
    CHECK(max_coeff(apply_nf_full(z, model)) == 0.0);
    const State u = random_state(g, 6, 2, 0.01);
    // Exact bilinearity: halving the state quarters the correction.
    const double full = l2_norm(apply_nf_full(u, model) - u.pos);
    const double half = l2_norm(apply_nf_full(0.5 * u, model) - 0.5 * u.pos);
    CHECK(half / full == doctest::Approx(0.25).epsilon(1e-10));
    const State id = apply_nf_hh(u, gallery_model("flat"));
    CHECK(coeff_diff(id.pos, u.pos) == 0.0);

    // Linearized map: identity at u = 0, bilinear in u.
    const State v = random_state(g, 6, 9, 1.0);
    const State v0 = apply_nf_linearized(z, v, model);
    CHECK(coeff_diff(v0.pos, v.pos) < 1e-15);
    const State v1 = apply_nf_linearized(u, v, model), v2 = apply_nf_linearized(2.0 * u, v, model);
    CHECK(l2_norm(v2.pos - v.pos) / l2_norm(v1.pos - v.pos) == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("normal form removes the quadratic source") {
    // Residual of L_KG of the transformed variable is cubic in the data size.
    const Grid g = make_grid(64, 2 * kPi);
    for (const auto& name : {"g11u", "generic"}) {
        const ModelSpec model = gallery_model(name);
        const EnergyContext ctx(model, g, 1.0);
        std::vector<double> es, rs;
        for (double eps : {1e-2, 5e-3, 2.5e-3}) {
            const State u = make_data("twomode", g, eps, 1);
            es.push_back(eps);
            rs.push_back(l2_norm(nf_cubic_source(ctx.tables(), u, model)));
        }
        CHECK(fit_loglog(es, rs).slope >= 2.8);
    }
}

TEST_CASE("battery on the gallery and the fault control") {
    for (const auto& name : gallery_names()) {
        const NfBattery b = nf_battery(gallery_model(name), 1000, 1);
        CHECK(b.ab_residual < 1e-12);
        CHECK(b.c_residual < 1e-12);
        CHECK(b.abcd_residual < 1e-12);
        CHECK(b.delta_agreement < 1e-12);
        CHECK(b.kappa_identity < 1e-10);
        CHECK(b.parity_exact);
        if (name == std::string("flat")) {
            CHECK(b.ab_residual == 0.0);
            CHECK(b.c_residual == 0.0);
            CHECK(b.decay.empty());
        }
    }
    const NfBattery f = nf_battery(gallery_model("g11u"), 200, 1, "a0");
    CHECK(f.lead_ab > 1e-4);
}

TEST_CASE("invertibility surrogates") {
    const Grid g = make_grid(128, 2 * kPi);
    const ModelSpec model = gallery_model("generic");
    const State v = random_direction(g, 12);
    std::vector<double> cu, cv;
    for (double eps : {1e-2, 5e-3}) {
        const State u = make_data("twomode", g, eps, 1);
        const double a2 = control_params(u, 2);
        const State un = apply_nf_hh(u, model);
        cu.push_back(sobolev_norm(un - u, 3.0) / (a2 * sobolev_norm(u, 3.0)));
        const State vn = apply_nf_linearized(u, v, model);
        cv.push_back(sobolev_norm(vn - v, 1.0) / (a2 * sobolev_norm(v, 1.0)));
    }
    CHECK(cu[0] / cu[1] == doctest::Approx(1.0).epsilon(0.25));
    CHECK(cv[0] / cv[1] == doctest::Approx(1.0).epsilon(0.25));
}
