#pragma once
// Translation-invariant bilinear operators given by symbols b(xi1, xi2),
// Weyl paraproducts and the balanced product.

#include "kgnf/spectral.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace kgnf {

enum class Region { full, lh, hl, hh };

using SymbolFn = std::function<cplx(double, double)>;

struct BilinearSymbol {
    SymbolFn eval;
    bool parity_real = true;  ///< b(-x1,-x2) = conj(b(x1,x2))
    Region region = Region::full;

    cplx operator()(double x1, double x2) const { return eval ? eval(x1, x2) : cplx(0.0); }
    bool empty() const { return !eval; }
};

/// 1 for <x1> <= <x2>/20, 0 for <x1> >= <x2>/10, smoothstep in the ratio.
double chi_lh(double x1, double x2);
double chi_hh(double x1, double x2);
/// Cutoff of the Weyl paraproduct: chi_lh(x1, x2 + x1/2).
double chi_weyl(double x1, double x2);
/// Complement of the two Weyl low-high cutoffs.
double chi_weyl_hh(double x1, double x2);

/// Multiply a symbol by the (Weyl) cutoff of the requested region.
BilinearSymbol restrict_to(const BilinearSymbol& s, Region r);

/// Dense n x n tabulation of a symbol on one grid, rows that vanish
/// identically are skipped at application time.
class SymbolTable {
public:
    SymbolTable() = default;
    SymbolTable(const BilinearSymbol& s, const Grid& grid);

    Field apply(const Field& f, const Field& g, bool dealias = false) const;
    const Grid& grid() const { return grid_; }
    cplx at(int j1, int j2) const { return values_[static_cast<size_t>(j1) * n_ + j2]; }
    bool empty() const { return n_ == 0; }

private:
    Grid grid_;
    size_t n_ = 0;
    std::vector<cplx> values_;
    std::vector<char> active_;
};

/// Direct O(n^2) evaluation: out(z) = sum_{x1+x2=z} b(x1,x2) f(x1) g(x2).
/// Output modes outside the grid band are dropped; dealias keeps |k| <= n/3.
Field apply_bilinear(const BilinearSymbol& s, const Field& f, const Field& g,
                     bool dealias = false);

/// Shared tables of the basic cutoffs for a grid (built once).
std::shared_ptr<const SymbolTable> cutoff_table(const Grid& grid, Region r);

/// T_f g, Weyl quantized.
Field paraproduct(const Field& f, const Field& g);
/// Pi(f,g) = fg - T_f g - T_g f.
Field balanced_product(const Field& f, const Field& g);
/// Unaliased product (symbol 1).
Field product(const Field& f, const Field& g);

/// One separable term low(x1) * high(x2) of a low-high expansion.
struct ExpansionTerm {
    Multiplier low;
    Multiplier high;
};
using LhExpansion = std::vector<ExpansionTerm>;

/// sum_j low_j(x1) high_j(x2) chi_weyl(x1,x2)
BilinearSymbol expansion_symbol(const LhExpansion& e);
/// sum_j T_{low_j(D) f} high_j(D) g
Field apply_bilinear_fast(const LhExpansion& e, const Field& f, const Field& g);

}  // namespace kgnf
