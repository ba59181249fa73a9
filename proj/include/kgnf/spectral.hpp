#pragma once
// Periodic grid, FFT transforms, Fourier multipliers, Littlewood-Paley
// projections and Sobolev norms.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace kgnf {

using cplx = std::complex<double>;
using Multiplier = std::function<cplx(double)>;

/// Cubic smoothstep clamped to [0,1]; the one transition profile used for
/// every cutoff in the library.
inline double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * (3.0 - 2.0 * t);
}

/// Japanese bracket <xi> = sqrt(1 + xi^2).
inline double jbracket(double xi) { return std::sqrt(1.0 + xi * xi); }

class Grid {
public:
    Grid() = default;
    Grid(int n, double length);

    int n() const { return n_; }
    double length() const { return length_; }
    double dx() const { return length_ / n_; }
    double dk() const;

    /// Integer mode index of slot j in FFT order: 0..n/2-1, -n/2..-1.
    int mode(int j) const { return j < n_ / 2 ? j : j - n_; }
    /// Slot holding integer mode k; -1 if out of range.
    int slot(int k) const;
    double freq(int j) const { return mode(j) * dk(); }
    std::vector<double> frequencies() const;
    /// Largest mode index kept by the 2/3 rule.
    int dealias_cutoff() const { return n_ / 3; }

    bool operator==(const Grid& o) const { return n_ == o.n_ && length_ == o.length_; }
    bool operator!=(const Grid& o) const { return !(*this == o); }

private:
    int n_ = 0;
    double length_ = 0.0;
};

Grid make_grid(int n, double length);

struct Field {
    Grid grid;
    std::vector<cplx> coeffs;

    Field() = default;
    explicit Field(const Grid& g) : grid(g), coeffs(static_cast<size_t>(g.n())) {}
    Field(const Grid& g, std::vector<cplx> c);

    int n() const { return grid.n(); }
    cplx& operator[](int j) { return coeffs[static_cast<size_t>(j)]; }
    const cplx& operator[](int j) const { return coeffs[static_cast<size_t>(j)]; }

    Field& operator+=(const Field& o);
    Field& operator-=(const Field& o);
    Field& operator*=(double s);
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);
Field operator-(Field a);

struct State {
    Field pos;
    Field vel;
    double time = 0.0;

    State() = default;
    explicit State(const Grid& g) : pos(g), vel(g) {}
    State(Field u, Field ut, double t = 0.0);
    const Grid& grid() const { return pos.grid; }
};

State operator+(const State& a, const State& b);
State operator-(const State& a, const State& b);
State operator*(double s, const State& a);

void check_same_grid(const Field& a, const Field& b);

Field to_spectral(const std::vector<double>& samples, const Grid& grid);
std::vector<double> to_physical(const Field& f);
/// Complex samples of the inverse transform; imaginary part measures reality loss.
std::vector<cplx> to_physical_complex(const Field& f);
std::vector<double> grid_points(const Grid& grid);

Field apply_multiplier(const Field& f, const Multiplier& symbol);
Field dx(const Field& f);
Field dxx(const Field& f);
Field bracket_pow(const Field& f, double s);
/// D^{-1} with symbol 1/xi, zero mode dropped.
Field inv_D(const Field& f);
Field dealias(const Field& f);

/// Dyadic bump psi_k(xi); sum over k >= 0 equals one.
double lp_bump(double xi, int k);
Field lp_project(const Field& f, int k);

/// Real L2 inner product over one period, computed by Parseval.
double inner(const Field& a, const Field& b);
double l2_norm(const Field& f);
double hs_norm(const Field& f, double s);
double sobolev_norm(const State& st, double s);
double sup_norm(const Field& f);
double max_imag_residue(const Field& f);

/// A_k = |u|_inf + max_{j<=k} max(|d_x^j u_t|_inf, |d_x^{j+1} u|_inf).
double control_params(const State& st, int k);

}  // namespace kgnf
