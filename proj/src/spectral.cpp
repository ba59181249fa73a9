#include "kgnf/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kgnf {

//--------------------------------------------------------------------------
// Grid
//--------------------------------------------------------------------------

Grid::Grid(int n, double length) : n_(n), length_(length) {
    if (n < 16 || (n & (n - 1)) != 0)
        throw std::invalid_argument("grid size n=" + std::to_string(n) +
                                    " must be a power of two >= 16");
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("grid length must be positive");
}

double Grid::dk() const { return 2.0 * std::numbers::pi / length_; }

int Grid::slot(int k) const {
    if (k < -n_ / 2 || k >= n_ / 2) return -1;
    return k >= 0 ? k : k + n_;
}

std::vector<double> Grid::frequencies() const {
    std::vector<double> out(static_cast<size_t>(n_));
    for (int j = 0; j < n_; ++j) out[static_cast<size_t>(j)] = freq(j);
    return out;
}

Grid make_grid(int n, double length) { return Grid(n, length); }

//--------------------------------------------------------------------------
// Field / State arithmetic
//--------------------------------------------------------------------------

Field::Field(const Grid& g, std::vector<cplx> c) : grid(g), coeffs(std::move(c)) {
    if (static_cast<int>(coeffs.size()) != g.n())
        throw std::invalid_argument("coefficient count does not match grid");
}

void check_same_grid(const Field& a, const Field& b) {
    if (a.grid != b.grid) throw std::invalid_argument("grid mismatch");
}

Field& Field::operator+=(const Field& o) {
    check_same_grid(*this, o);
    for (size_t j = 0; j < coeffs.size(); ++j) coeffs[j] += o.coeffs[j];
    return *this;
}

Field& Field::operator-=(const Field& o) {
    check_same_grid(*this, o);
    for (size_t j = 0; j < coeffs.size(); ++j) coeffs[j] -= o.coeffs[j];
    return *this;
}

Field& Field::operator*=(double s) {
    for (auto& c : coeffs) c *= s;
    return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }
Field operator-(Field a) { return a *= -1.0; }

State::State(Field u, Field ut, double t) : pos(std::move(u)), vel(std::move(ut)), time(t) {
    check_same_grid(pos, vel);
}

State operator+(const State& a, const State& b) { return State(a.pos + b.pos, a.vel + b.vel, a.time); }
State operator-(const State& a, const State& b) { return State(a.pos - b.pos, a.vel - b.vel, a.time); }
State operator*(double s, const State& a) { return State(s * a.pos, s * a.vel, a.time); }

//--------------------------------------------------------------------------
// FFT plans. Planning is serialized; execution uses the new-array interface,
// which FFTW documents as thread safe.
//--------------------------------------------------------------------------

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

const PlanPair& plans_for(int n) {
    static std::mutex mtx;
    static std::map<int, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<fftw_complex> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.fwd = fftw_plan_dft_1d(n, a.data(), b.data(), FFTW_FORWARD, flags);
    p.bwd = fftw_plan_dft_1d(n, a.data(), b.data(), FFTW_BACKWARD, flags);
    return cache.emplace(n, p).first->second;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

Field to_spectral(const std::vector<double>& samples, const Grid& grid) {
    const int n = grid.n();
    if (static_cast<int>(samples.size()) != n)
        throw std::invalid_argument("sample count does not match grid");
    std::vector<cplx> in(samples.begin(), samples.end());
    Field out(grid);
    fftw_execute_dft(plans_for(n).fwd, as_fftw(in.data()), as_fftw(out.coeffs.data()));
    const double scale = 1.0 / n;
    for (auto& c : out.coeffs) c *= scale;
    return out;
}

std::vector<cplx> to_physical_complex(const Field& f) {
    std::vector<cplx> in = f.coeffs, out(in.size());
    fftw_execute_dft(plans_for(f.n()).bwd, as_fftw(in.data()), as_fftw(out.data()));
    return out;
}

std::vector<double> to_physical(const Field& f) {
    auto z = to_physical_complex(f);
    std::vector<double> out(z.size());
    for (size_t j = 0; j < z.size(); ++j) out[j] = z[j].real();
    return out;
}

std::vector<double> grid_points(const Grid& grid) {
    std::vector<double> x(static_cast<size_t>(grid.n()));
    for (int j = 0; j < grid.n(); ++j) x[static_cast<size_t>(j)] = j * grid.dx();
    return x;
}

//--------------------------------------------------------------------------
// Multipliers
//--------------------------------------------------------------------------

Field apply_multiplier(const Field& f, const Multiplier& symbol) {
    Field out(f.grid);
    const int n = f.n();
    for (int j = 0; j < n; ++j) {
        cplx s = symbol(f.grid.freq(j));
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw std::domain_error("multiplier is not finite on the grid");
        // The Nyquist slot is its own mirror image; keep it real.
        if (j == n / 2) s = s.real();
        out[j] = s * f[j];
    }
    return out;
}

Field dx(const Field& f) { return apply_multiplier(f, [](double k) { return cplx(0.0, k); }); }
Field dxx(const Field& f) { return apply_multiplier(f, [](double k) { return cplx(-k * k); }); }

Field bracket_pow(const Field& f, double s) {
    if (s == 0.0) return f;
    return apply_multiplier(f, [s](double k) { return cplx(std::pow(1.0 + k * k, 0.5 * s)); });
}

Field inv_D(const Field& f) {
    return apply_multiplier(f, [](double k) { return k == 0.0 ? cplx(0.0) : cplx(1.0 / k); });
}

Field dealias(const Field& f) {
    Field out = f;
    const int cut = f.grid.dealias_cutoff();
    for (int j = 0; j < f.n(); ++j)
        if (std::abs(f.grid.mode(j)) > cut) out[j] = 0.0;
    return out;
}

//--------------------------------------------------------------------------
// Littlewood-Paley. above(xi,k) rises from 0 to 1 by the smoothstep
// t^2(3-2t) as log2<xi> crosses [k, k+1]. psi_0 = 1 - above(xi,0) and
// psi_k = above(xi,k-1) - above(xi,k), so psi_k lives on [2^{k-1}, 2^{k+1}].
//--------------------------------------------------------------------------

namespace {

// Weight of frequencies above scale 2^k.
double above(double xi, int k) { return smoothstep(std::log2(jbracket(xi)) - k); }

}  // namespace

double lp_bump(double xi, int k) {
    if (k < 0) return 0.0;
    if (k == 0) return 1.0 - above(xi, 0);
    return above(xi, k - 1) - above(xi, k);
}

Field lp_project(const Field& f, int k) {
    if (k < 0) throw std::invalid_argument("LP index must be >= 0");
    return apply_multiplier(f, [k](double xi) { return cplx(lp_bump(xi, k)); });
}

//--------------------------------------------------------------------------
// Norms
//--------------------------------------------------------------------------

double inner(const Field& a, const Field& b) {
    check_same_grid(a, b);
    double s = 0.0;
    for (int j = 0; j < a.n(); ++j) s += (a[j] * std::conj(b[j])).real();
    return s * a.grid.length();
}

double l2_norm(const Field& f) { return std::sqrt(std::max(0.0, inner(f, f))); }

double hs_norm(const Field& f, double s) {
    double acc = 0.0;
    for (int j = 0; j < f.n(); ++j) {
        const double k = f.grid.freq(j);
        acc += std::pow(1.0 + k * k, s) * std::norm(f[j]);
    }
    return std::sqrt(acc * f.grid.length());
}

double sobolev_norm(const State& st, double s) {
    if (s < 0.0) throw std::invalid_argument("Sobolev index must be >= 0");
    const double a = hs_norm(st.pos, s), b = hs_norm(st.vel, s - 1.0);
    return std::sqrt(a * a + b * b);
}

double sup_norm(const Field& f) {
    double m = 0.0;
    for (double v : to_physical(f)) m = std::max(m, std::abs(v));
    return m;
}

double max_imag_residue(const Field& f) {
    double m = 0.0;
    for (const auto& z : to_physical_complex(f)) m = std::max(m, std::abs(z.imag()));
    return m;
}

double control_params(const State& st, int k) {
    if (k < 0) throw std::invalid_argument("control parameter order must be >= 0");
    double a = sup_norm(st.pos);
    double best = 0.0;
    Field ut = st.vel, ux = dx(st.pos);
    for (int j = 0; j <= k; ++j) {
        best = std::max({best, sup_norm(ut), sup_norm(ux)});
        ut = dx(ut);
        ux = dx(ux);
    }
    return a + best;
}

}  // namespace kgnf
