#pragma once
// Shared helpers for the unit and acceptance tests.

#include "kgnf/spectral.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace kgnf::testing {

inline constexpr double kPi = 3.14159265358979323846;

inline Field sample(const Grid& g, const std::function<double(double)>& f) {
    const auto xs = grid_points(g);
    std::vector<double> v(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) v[i] = f(xs[i]);
    return to_spectral(v, g);
}

inline State sample_state(const Grid& g, const std::function<double(double)>& u,
                          const std::function<double(double)>& ut) {
    return State(sample(g, u), sample(g, ut));
}

/// e^{i k x}
inline Field mode(const Grid& g, int k, cplx c = 1.0) {
    Field f(g);
    f[g.slot(k)] = c;
    return f;
}

/// Real, band-limited random field (|k| <= kmax), deterministic in seed.
inline Field random_field(const Grid& g, int kmax, unsigned seed, double amp = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Field f(g);
    for (int k = 0; k <= kmax; ++k) {
        const cplx c = k == 0 ? cplx(nd(gen), 0.0) : cplx(nd(gen), nd(gen));
        f[g.slot(k)] = amp * c;
        if (k > 0) f[g.slot(-k)] = amp * std::conj(c);
    }
    return f;
}

inline State random_state(const Grid& g, int kmax, unsigned seed, double amp = 1.0) {
    return State(random_field(g, kmax, seed, amp), random_field(g, kmax, seed + 1000, amp));
}

/// Max coefficient modulus of a - b.
inline double coeff_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (int j = 0; j < a.n(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

inline double max_coeff(const Field& a) {
    double m = 0.0;
    for (int j = 0; j < a.n(); ++j) m = std::max(m, std::abs(a[j]));
    return m;
}

}  // namespace kgnf::testing
