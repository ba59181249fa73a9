#include "kgnf/bilinear.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace kgnf {

double chi_lh(double x1, double x2) {
    const double r = jbracket(x1) / jbracket(x2);
    // r = 1/20 -> t = 0 (chi = 1), r = 1/10 -> t = 1 (chi = 0)
    return 1.0 - smoothstep((r - 0.05) / 0.05);
}

double chi_hh(double x1, double x2) { return 1.0 - chi_lh(x1, x2) - chi_lh(x2, x1); }

double chi_weyl(double x1, double x2) { return chi_lh(x1, x2 + 0.5 * x1); }

double chi_weyl_hh(double x1, double x2) { return 1.0 - chi_weyl(x1, x2) - chi_weyl(x2, x1); }

BilinearSymbol restrict_to(const BilinearSymbol& s, Region r) {
    if (r == Region::full || s.empty()) return BilinearSymbol{s.eval, s.parity_real, r};
    SymbolFn fn = s.eval;
    switch (r) {
        case Region::lh:
            return {[fn](double a, double b) {
                        const double c = chi_weyl(a, b);
                        return c == 0.0 ? cplx(0.0) : c * fn(a, b);
                    },
                    s.parity_real, r};
        case Region::hl:
            return {[fn](double a, double b) {
                        const double c = chi_weyl(b, a);
                        return c == 0.0 ? cplx(0.0) : c * fn(a, b);
                    },
                    s.parity_real, r};
        default:
            return {[fn](double a, double b) {
                        const double c = chi_weyl_hh(a, b);
                        return c == 0.0 ? cplx(0.0) : c * fn(a, b);
                    },
                    s.parity_real, r};
    }
}

//--------------------------------------------------------------------------
// Tabulated application
//--------------------------------------------------------------------------

SymbolTable::SymbolTable(const BilinearSymbol& s, const Grid& grid)
    : grid_(grid), n_(static_cast<size_t>(grid.n())), values_(n_ * n_), active_(n_, 0) {
    const int n = grid.n();
    for (int j1 = 0; j1 < n; ++j1) {
        const double x1 = grid.freq(j1);
        bool any = false;
        for (int j2 = 0; j2 < n; ++j2) {
            const cplx v = s(x1, grid.freq(j2));
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::domain_error("bilinear symbol is not finite on the grid");
            values_[static_cast<size_t>(j1) * n_ + j2] = v;
            any = any || v != cplx(0.0);
        }
        active_[static_cast<size_t>(j1)] = any;
    }
}

namespace {

// Core accumulation shared by the tabulated and on-the-fly paths.
template <class SymAt>
Field accumulate(const Grid& grid, const Field& f, const Field& g, bool dealias_out, SymAt&& sym,
                 const std::vector<char>* active) {
    const int n = grid.n();
    const int kmax = dealias_out ? grid.dealias_cutoff() : n / 2 - 1;
    Field out(grid);
    for (int j1 = 0; j1 < n; ++j1) {
        if (active && !(*active)[static_cast<size_t>(j1)]) continue;
        const cplx f1 = f[j1];
        if (f1 == cplx(0.0)) continue;
        const int k1 = grid.mode(j1);
        const int lo = std::max(-n / 2, -kmax - k1);
        const int hi = std::min(n / 2 - 1, kmax - k1);
        for (int k2 = lo; k2 <= hi; ++k2) {
            const int j2 = k2 >= 0 ? k2 : k2 + n;
            const cplx g2 = g[j2];
            if (g2 == cplx(0.0)) continue;
            const int k = k1 + k2;
            out[k >= 0 ? k : k + n] += sym(j1, j2) * f1 * g2;
        }
    }
    return out;
}

}  // namespace

Field SymbolTable::apply(const Field& f, const Field& g, bool dealias_out) const {
    check_same_grid(f, g);
    if (f.grid != grid_) throw std::invalid_argument("grid mismatch between table and fields");
    return accumulate(grid_, f, g, dealias_out,
                      [this](int j1, int j2) { return values_[static_cast<size_t>(j1) * n_ + j2]; },
                      &active_);
}

Field apply_bilinear(const BilinearSymbol& s, const Field& f, const Field& g, bool dealias_out) {
    check_same_grid(f, g);
    const Grid& grid = f.grid;
    return accumulate(grid, f, g, dealias_out,
                      [&](int j1, int j2) {
                          const cplx v = s(grid.freq(j1), grid.freq(j2));
                          if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                              throw std::domain_error("bilinear symbol is not finite on the grid");
                          return v;
                      },
                      nullptr);
}

std::shared_ptr<const SymbolTable> cutoff_table(const Grid& grid, Region r) {
    static std::mutex mtx;
    static std::map<std::tuple<int, double, int>, std::shared_ptr<const SymbolTable>> cache;
    const auto key = std::make_tuple(grid.n(), grid.length(), static_cast<int>(r));
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    BilinearSymbol one{[](double, double) { return cplx(1.0); }, true, Region::full};
    auto table = std::make_shared<const SymbolTable>(restrict_to(one, r), grid);
    std::lock_guard<std::mutex> lock(mtx);
    return cache.emplace(key, table).first->second;
}

Field paraproduct(const Field& f, const Field& g) {
    check_same_grid(f, g);
    return cutoff_table(f.grid, Region::lh)->apply(f, g);
}

Field balanced_product(const Field& f, const Field& g) {
    check_same_grid(f, g);
    return cutoff_table(f.grid, Region::hh)->apply(f, g);
}

Field product(const Field& f, const Field& g) {
    check_same_grid(f, g);
    return cutoff_table(f.grid, Region::full)->apply(f, g);
}

//--------------------------------------------------------------------------
// Separable low-high expansions
//--------------------------------------------------------------------------

BilinearSymbol expansion_symbol(const LhExpansion& e) {
    if (e.empty()) throw std::invalid_argument("expansion has no terms");
    return {[e](double a, double b) {
                const double c = chi_weyl(a, b);
                if (c == 0.0) return cplx(0.0);
                cplx s = 0.0;
                for (const auto& t : e) s += t.low(a) * t.high(b);
                return c * s;
            },
            true, Region::lh};
}

Field apply_bilinear_fast(const LhExpansion& e, const Field& f, const Field& g) {
    if (e.empty()) throw std::invalid_argument("expansion has no terms");
    check_same_grid(f, g);
    Field out(f.grid);
    for (const auto& t : e) out += paraproduct(apply_multiplier(f, t.low), apply_multiplier(g, t.high));
    return out;
}

}  // namespace kgnf
