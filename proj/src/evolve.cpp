#include "kgnf/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace kgnf {

double max_wave_speed(const State& st, const ModelSpec& model) {
    const PhysicalJet j = physical_jet(st);
    double c = 0.0;
    for (size_t i = 0; i < j.u.size(); ++i) {
        const Jet p{j.u[i], j.ut[i], j.ux[i]};
        const double b = model.g01(p);
        const double disc = b * b + model.g11(p);
        if (!(disc > 0.0)) throw BlowUp("loss of hyperbolicity");
        c = std::max(c, std::abs(b) + std::sqrt(disc));
    }
    return c;
}

double cfl_limit(const State& st, const ModelSpec& model, double cfl_safety) {
    return cfl_safety * st.grid().dx() / max_wave_speed(st, model);
}

namespace {

State rhs(const State& s, const ModelSpec& model) {
    try {
        return State(s.vel, utt_from_state(s, model), s.time);
    } catch (const std::domain_error& e) {
        throw BlowUp(e.what());
    }
}

bool finite(const Field& f) {
    for (const auto& c : f.coeffs)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

template <class Rhs>
State rk4(const State& s, double dt, Rhs&& f) {
    const State k1 = f(s, s.time);
    const State k2 = f(s + (0.5 * dt) * k1, s.time + 0.5 * dt);
    const State k3 = f(s + (0.5 * dt) * k2, s.time + 0.5 * dt);
    const State k4 = f(s + dt * k3, s.time + dt);
    State out = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.time = s.time + dt;
    if (!finite(out.pos) || !finite(out.vel)) throw BlowUp("non-finite state");
    return out;
}

void sample(Trajectory& tr, const State& s, const std::vector<Observer>& obs, bool store) {
    tr.times.push_back(s.time);
    if (store) tr.states.push_back(s);
    for (size_t k = 0; k < obs.size(); ++k) tr.records[k].push_back(obs[k](s));
}

long step_count(double T, double dt) {
    if (!(T > 0.0) || !(dt > 0.0)) throw std::invalid_argument("T and dt must be positive");
    return std::max(1L, std::lround(T / dt));
}

}  // namespace

State step_rk4(const State& st, const ModelSpec& model, double dt) {
    return rk4(st, dt, [&](const State& s, double) { return rhs(s, model); });
}

Trajectory evolve(const State& state0, const ModelSpec& model, double T, double dt,
                  const std::vector<Observer>& observers, const EvolveOptions& opt) {
    if (opt.sample_every < 1) throw std::invalid_argument("sample_every must be >= 1");
    const long steps = step_count(T, dt);
    dt = T / static_cast<double>(steps);

    Trajectory tr;
    tr.dt = dt;
    tr.sample_every = opt.sample_every;
    tr.model = model;
    tr.records.resize(observers.size());

    const double limit = cfl_limit(state0, model, opt.cfl_safety);
    if (dt > limit) {
        if (!opt.proceed_on_cfl)
            throw CflViolation("dt = " + std::to_string(dt) + " exceeds the CFL limit " + std::to_string(limit));
        tr.cfl_warning = true;
        std::cerr << "warning: dt exceeds the CFL limit " << limit << "\n";
    }

    State s = state0;
    sample(tr, s, observers, opt.store_states);
    for (long k = 1; k <= steps; ++k) {
        try {
            s = step_rk4(s, model, dt);
            if (sup_norm(s.pos) > opt.blowup_sup) throw BlowUp("amplitude threshold exceeded");
        } catch (const BlowUp& e) {
            tr.blow_up = true;
            tr.blow_up_time = s.time;
            tr.message = e.what();
            return tr;
        }
        if (k % opt.sample_every == 0 || k == steps) {
            sample(tr, s, observers, opt.store_states);
            if (opt.stop && opt.stop(s)) {
                tr.stopped = true;
                return tr;
            }
        }
    }
    return tr;
}

//--------------------------------------------------------------------------
// Linearized flow
//--------------------------------------------------------------------------

namespace {

LinearizedCoefficients lerp(const LinearizedCoefficients& a, const LinearizedCoefficients& b, double th) {
    auto mix = [th](const Field& x, const Field& y) { return (1.0 - th) * x + th * y; };
    return {mix(a.F0, b.F0), mix(a.F1, b.F1), mix(a.F, b.F), mix(a.g01, b.g01), mix(a.g11, b.g11)};
}

}  // namespace

Trajectory evolve_linearized(const Trajectory& bg, const State& v0, double dt,
                             const std::vector<Observer>& observers, int sample_every) {
    if (bg.states.size() < 2)
        throw std::invalid_argument("background trajectory needs stored states");
    check_same_grid(bg.states.front().pos, v0.pos);
    const double spacing = bg.states[1].time - bg.states[0].time;
    const double ratio = spacing / dt;
    const long sub = std::lround(ratio);
    if (sub < 1 || std::abs(ratio - static_cast<double>(sub)) > 1e-8 * ratio)
        throw std::invalid_argument("dt must divide the background sample spacing");
    dt = spacing / static_cast<double>(sub);

    const ModelSpec& model = bg.model;
    std::vector<LinearizedCoefficients> coeffs;
    coeffs.reserve(bg.states.size());
    for (const auto& s : bg.states) coeffs.push_back(linearized_coefficients(s, model));

    const double t0 = bg.states.front().time;
    auto coeff_at = [&](double t) {
        const double x = (t - t0) / spacing;
        const long i = std::clamp(static_cast<long>(std::floor(x)), 0L, static_cast<long>(coeffs.size()) - 2);
        return lerp(coeffs[static_cast<size_t>(i)], coeffs[static_cast<size_t>(i) + 1], x - static_cast<double>(i));
    };

    Trajectory tr;
    tr.dt = dt;
    tr.sample_every = sample_every;
    tr.model = model;
    tr.records.resize(observers.size());
    State v = v0;
    v.time = t0;
    sample(tr, v, observers, true);
    const long steps = sub * static_cast<long>(bg.states.size() - 1);
    for (long k = 1; k <= steps; ++k) {
        try {
            v = rk4(v, dt, [&](const State& s, double t) {
                return State(s.vel, linearized_vtt(coeff_at(t), s, model.m), t);
            });
        } catch (const BlowUp& e) {
            tr.blow_up = true;
            tr.blow_up_time = v.time;
            tr.message = e.what();
            return tr;
        }
        if (k % sample_every == 0 || k == steps) sample(tr, v, observers, true);
    }
    return tr;
}

}  // namespace kgnf
