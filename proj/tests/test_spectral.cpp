#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kgnf/spectral.hpp"
#include "support.hpp"

using namespace kgnf;
using namespace kgnf::testing;

TEST_CASE("grid frequencies follow FFT order") {
    const Grid g = make_grid(16, 2 * kPi);
    const auto f = g.frequencies();
    const std::vector<double> expect{0, 1, 2, 3, 4, 5, 6, 7, -8, -7, -6, -5, -4, -3, -2, -1};
    REQUIRE(f.size() == expect.size());
    for (size_t i = 0; i < f.size(); ++i) CHECK(f[i] == doctest::Approx(expect[i]));
    CHECK(make_grid(16, 4 * kPi).dk() == doctest::Approx(0.5));
    CHECK_THROWS(make_grid(17, 2 * kPi));
}

TEST_CASE("transform of a pure cosine") {
    const Grid g = make_grid(64, 2 * kPi);
    const Field f = sample(g, [](double x) { return std::cos(3 * x); });
    for (int j = 0; j < 64; ++j) {
        const double expect = std::abs(g.mode(j)) == 3 ? 0.5 : 0.0;
        CHECK(std::abs(f[j] - expect) < 1e-14);
    }
    CHECK(max_coeff(to_spectral(std::vector<double>(64, 0.0), g)) == 0.0);
}

TEST_CASE("round trip of random samples") {
    const Grid g = make_grid(128, 2 * kPi);
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> ud(-1, 1);
    std::vector<double> v(128);
    for (auto& x : v) x = ud(gen);
    const auto back = to_physical(to_spectral(v, g));
    double err = 0;
    for (size_t i = 0; i < v.size(); ++i) err = std::max(err, std::abs(back[i] - v[i]));
    CHECK(err < 1e-13);
}

TEST_CASE("multipliers") {
    const Grid g = make_grid(32, 2 * kPi);
    const Field e3 = mode(g, 3);
    CHECK(std::abs(bracket_pow(e3, 1.0)[g.slot(3)] - std::sqrt(10.0)) < 1e-14);

    const Field s = sample(g, [](double x) { return std::sin(x); });
    const Field c = sample(g, [](double x) { return std::cos(x); });
    CHECK(coeff_diff(dx(s), c) < 1e-15);

    // D^{-1} on a field supported where <xi> >= 20.
    const Grid h = make_grid(128, 2 * kPi);
    Field f = random_field(h, 40, 3);
    for (int j = 0; j < h.n(); ++j)
        if (jbracket(h.freq(j)) < 20) f[j] = 0.0;
    const Field inv = apply_multiplier(f, [](double x) { return x == 0 ? cplx(0) : cplx(1.0 / x); });
    const Field back = apply_multiplier(inv, [](double x) { return cplx(x); });
    for (const auto& z : inv.coeffs) CHECK(std::isfinite(std::abs(z)));
    CHECK(coeff_diff(back, f) < 1e-13 * max_coeff(f));
}

TEST_CASE("Littlewood-Paley projections") {
    const Grid g = make_grid(64, 2 * kPi);
    const Field e3 = mode(g, 3);
    const Field p2 = lp_project(e3, 2);
    CHECK(std::abs(p2[g.slot(3)] - lp_bump(3.0, 2)) < 1e-15);
    double total = 0;
    for (int k = 0; k <= 10; ++k) total += lp_bump(3.0, k);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

    const Field one = mode(g, 0);
    CHECK(coeff_diff(lp_project(one, 0), one) < 1e-15);
    for (int k = 1; k <= 4; ++k) CHECK(max_coeff(lp_project(one, k)) < 1e-15);

    const Field r = random_field(g, 31, 11);
    Field sum(g);
    for (int k = 0; k <= 6; ++k) sum += lp_project(r, k);  // 2^6 > Nyquist 32
    CHECK(coeff_diff(sum, r) < 1e-12);
    for (int j = 0; j < g.n(); ++j) {
        double s = 0;
        for (int k = 0; k <= 6; ++k) s += lp_bump(g.freq(j), k);
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("Sobolev norms") {
    const Grid g = make_grid(64, 2 * kPi);
    const State u(sample(g, [](double x) { return std::cos(x); }), Field(g));
    // int cos^2 + sin^2 over one period.
    CHECK(sobolev_norm(u, 1.0) == doctest::Approx(std::sqrt(2 * kPi)).epsilon(1e-13));
    CHECK(sobolev_norm(State(g), 3.0) == 0.0);
    // s = 0: L^2 x H^{-1}.
    const State w = random_state(g, 10, 5);
    const double direct = std::pow(l2_norm(w.pos), 2) + std::pow(hs_norm(w.vel, -1.0), 2);
    CHECK(sobolev_norm(w, 0.0) == doctest::Approx(std::sqrt(direct)).epsilon(1e-13));
}

TEST_CASE("Parseval and conjugate symmetry") {
    const Grid g = make_grid(128, 4 * kPi);
    const Field f = random_field(g, 40, 9);
    const auto v = to_physical(f);
    double phys = 0;
    for (double x : v) phys += x * x * g.dx();
    CHECK(std::sqrt(phys) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
    const Field r = sample(g, [](double x) { return std::exp(std::sin(x)) - std::cos(3 * x); });
    for (int j = 1; j < g.n() / 2; ++j)
        CHECK(std::abs(r[g.slot(g.mode(j))] - std::conj(r[g.slot(-g.mode(j))])) < 1e-12 * max_coeff(r));
    // Real-symmetric multipliers keep real fields real.
    const Field m = apply_multiplier(r, [](double x) { return cplx(std::cos(x), std::sin(x * x * x)); });
    CHECK(max_imag_residue(m) < 1e-12 * l2_norm(r));
}

TEST_CASE("control parameters") {
    const Grid g = make_grid(64, 2 * kPi);
    const double eps = 0.01;
    const State a(sample(g, [&](double x) { return eps * std::sin(x); }), Field(g));
    CHECK(control_params(a, 0) == doctest::Approx(2 * eps).epsilon(1e-12));
    CHECK(control_params(State(g), 3) == 0.0);
    // Max over derivative orders: every d_x^j u_t has sup eps.
    const State b(Field(g), sample(g, [&](double x) { return eps * std::cos(x); }));
    CHECK(control_params(b, 2) == doctest::Approx(eps).epsilon(1e-12));
}
