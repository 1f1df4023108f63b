#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"
#include "params.hpp"
#include "propagator.hpp"
#include "specfun.hpp"

namespace pointnls {

/// kappa = -2 (log 2 - gamma + i pi / 4).
inline const cplx kappa{-2.0 * (std::numbers::ln2_v<double> - euler_gamma), -pi / 2.0};

/// Nonlinear term (kappa - 4 pi beta |q|^{2 sigma}) q of the charge equation.
inline cplx charge_nonlinearity(cplx q, const ModelParams& p) {
    const double a = std::abs(q);
    return (kappa - 4.0 * pi * p.beta * std::pow(a, 2.0 * p.sigma)) * q;
}

/// Rotation frequency of the standing wave with charge modulus |q|, 4 exp(2 (2 pi beta |q|^{2 sigma} - gamma)).
inline double local_frequency(double q, const ModelParams& p) {
    return 4.0 * std::exp(2.0 * (2.0 * pi * p.beta * std::pow(q, 2.0 * p.sigma) - euler_gamma));
}

struct SolverConfig {
    double t_end = 1.0;
    double h_init = 1e-3;
    double h_min = 1e-12;
    double tol_fp = 1e-12;
    double q_cap = 1e6;
    int max_iter = 100;
    /// Step is rejected when |q_n - q_{n-1}| exceeds this fraction of |q_{n-1}|.
    double max_rel_change = 0.1;
    /// The relative-change rule is applied only above this modulus.
    double growth_floor = 1e-8;
    /// Consecutive accepted steps before a halved step is doubled again.
    int regrow_after = 8;

    std::vector<std::string> violations(cplx q0 = 0.0) const {
        std::vector<std::string> v;
        if (!(t_end > 0.0) || !std::isfinite(t_end)) v.push_back("t_end must be positive");
        if (!(h_init > 0.0) || !std::isfinite(h_init)) v.push_back("h_init must be positive");
        if (!(h_min > 0.0)) v.push_back("h_min must be positive");
        if (!(h_min < h_init)) v.push_back("h_min must be smaller than h_init");
        if (!(h_init <= t_end)) v.push_back("h_init must not exceed t_end");
        if (!(tol_fp > 0.0)) v.push_back("tol_fp must be positive");
        if (!(q_cap > std::abs(q0))) v.push_back("q_cap must exceed |q0|");
        if (max_iter <= 0) v.push_back("max_iter must be positive");
        if (!(max_rel_change > 0.0)) v.push_back("max_rel_change must be positive");
        if (!(growth_floor >= 0.0)) v.push_back("growth_floor must be nonnegative");
        if (regrow_after <= 0) v.push_back("regrow_after must be positive");
        return v;
    }

    void validate(cplx q0 = 0.0) const {
        auto v = violations(q0);
        if (!v.empty()) throw ConfigError(std::move(v));
    }

    bool operator==(const SolverConfig&) const = default;
};

enum class RunStatus { Completed, BlowupDetected, ToleranceFailure };

inline const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return "Completed";
        case RunStatus::BlowupDetected: return "BlowupDetected";
        case RunStatus::ToleranceFailure: return "ToleranceFailure";
    }
    return "?";
}

struct ChargeTrajectory {
    std::vector<double> times;
    std::vector<std::int64_t> ticks;  ///< times in units of tick_unit
    double tick_unit = 0.0;
    std::vector<cplx> q;
    std::vector<cplx> forcing;
    std::vector<double> residual_norm;  ///< nonlinear-solve residual per node
    RunStatus status = RunStatus::Completed;
    double status_time = 0.0;  ///< t_est for blow-up, t_fail for tolerance failure, t_end otherwise
    bool step_collapse = false;
    std::size_t rejected_steps = 0;
    std::vector<std::string> warnings;

    double t_last() const { return times.back(); }
    double max_abs_q() const {
        double m = 0.0;
        for (auto z : q) m = std::max(m, std::abs(z));
        return m;
    }

    /// Piecewise-linear charge at time t within the run.
    cplx q_at(double t) const {
        if (!(t >= 0.0) || t > times.back()) throw DomainError("q_at: t outside the trajectory");
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        if (it == times.end()) return q.back();
        const auto j = static_cast<std::size_t>(it - times.begin());
        const double a = times[j - 1], b = times[j];
        const double s = (t - a) / (b - a);
        return (1.0 - s) * q[j - 1] + s * q[j];
    }
};

namespace detail {

struct StepSolve {
    cplx q;
    double residual;
    bool converged;
};

// Solves q + w h(q) = b.
inline StepSolve solve_step(cplx guess, double w, cplx b, const ModelParams& p, const SolverConfig& cfg) {
    auto F = [&](cplx z) { return z + w * charge_nonlinearity(z, p) - b; };
    auto tol = [&](cplx z) { return cfg.tol_fp * std::max(1.0, std::abs(z)); };
    const double blowout = 1e3 * cfg.q_cap;

    cplx z = guess;
    for (int it = 0; it < cfg.max_iter; ++it) {
        cplx next = b - w * charge_nonlinearity(z, p);
        if (it >= 10) next = 0.5 * (z + next);
        z = next;
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > blowout) break;
        const double r = std::abs(F(z));
        if (r <= tol(z)) return {z, r, true};
    }

    // Newton on the real 2x2 system
    const double A = 4.0 * pi * p.beta, s = p.sigma;
    z = guess;
    double rz = std::abs(F(z));
    for (int it = 0; it < 60; ++it) {
        if (rz <= tol(z)) return {z, rz, true};
        const double m = std::abs(z);
        const double m2s = std::pow(m, 2.0 * s);
        const cplx dz = 1.0 + w * (kappa - A * (s + 1.0) * m2s);
        const cplx phase = m > 0.0 ? z / m : cplx(0.0);
        const cplx dzb = -w * A * s * m2s * phase * phase;
        const cplx c0 = dz + dzb, c1 = cplx(0.0, 1.0) * (dz - dzb);
        const double det = c0.real() * c1.imag() - c1.real() * c0.imag();
        if (!(std::abs(det) > 0.0) || !std::isfinite(det)) break;
        const cplx Fz = F(z);
        const double dx = -(Fz.real() * c1.imag() - c1.real() * Fz.imag()) / det;
        const double dy = -(c0.real() * Fz.imag() - Fz.real() * c0.imag()) / det;
        const cplx step(dx, dy);
        double lam = 1.0;
        bool moved = false;
        for (int k = 0; k < 30; ++k) {
            const cplx trial = z + lam * step;
            const double rt = std::abs(F(trial));
            if (std::isfinite(rt) && rt < rz) {
                z = trial;
                rz = rt;
                moved = true;
                break;
            }
            lam *= 0.5;
        }
        if (!moved) break;
    }
    return {z, rz, rz <= tol(z)};
}

}  // namespace detail

/// Marches the charge equation q + I * [(kappa - 4 pi beta |q|^{2 sigma}) q] = f forward in time.
inline ChargeTrajectory solve_charge(const ModelParams& params, const InitialDatum& datum, const SolverConfig& config) {
    params.validate();
    datum.validate();
    detail::require_solver_frame(datum, "solve_charge");
    config.validate(datum.q0);

    ChargeTrajectory tr;
    if (params.below_wellposed_range())
        tr.warnings.push_back("sigma < 1/2: outside the range where well-posedness is established");

    const int level = std::clamp(static_cast<int>(std::ceil(std::log2(config.h_init / config.h_min))) + 1, 0, 52);
    const double unit = config.h_init / std::ldexp(1.0, level);
    if (config.t_end / unit > 4e18) throw ConfigError({"t_end / h_min too large for the time lattice"});
    const std::int64_t h_init_ticks = std::int64_t{1} << level;
    const std::int64_t h_min_ticks = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(config.h_min / unit)));
    const auto end_ticks = static_cast<std::int64_t>(std::llround(config.t_end / unit));
    tr.tick_unit = unit;

    KernelCache cache(unit);
    const cplx C = log_coefficient(datum);

    std::vector<std::int64_t>& T = tr.ticks;
    std::vector<cplx>& q = tr.q;
    std::vector<cplx> hq, r;
    T.push_back(0);
    q.push_back(datum.q0);
    hq.push_back(charge_nonlinearity(datum.q0, params));
    r.push_back(trace_remainder(datum, 0.0));
    tr.forcing.push_back(C);
    tr.residual_norm.push_back(0.0);

    std::int64_t dt = h_init_ticks;
    int accepted_since_halving = 0;
    int growth_streak = 0;
    bool under_resolved = false;

    while (T.back() < end_ticks) {
        const std::int64_t t0 = T.back();
        const std::int64_t step = std::min(dt, end_ticks - t0);
        const std::int64_t t1 = t0 + step;
        const cplx r1 = trace_remainder(datum, cache.time(t1));
        const std::size_t n = T.size();

        cplx f = C, hist = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            const auto w = cache.hat_weights(t1 - T[p + 1], T[p + 1] - T[p]);
            f += w.left * r[p] + w.right * r[p + 1];
            hist += w.left * hq[p] + w.right * hq[p + 1];
        }
        const auto wl = cache.hat_weights(0, step);
        f += wl.left * r[n - 1] + wl.right * r1;
        hist += wl.left * hq[n - 1];
        const cplx b = f - hist;

        cplx guess = q[n - 1];
        if (n >= 2) {
            const double ratio = static_cast<double>(step) / static_cast<double>(T[n - 1] - T[n - 2]);
            guess = q[n - 1] + ratio * (q[n - 1] - q[n - 2]);
        }
        auto sol = detail::solve_step(guess, wl.right, b, params, config);
        if (!sol.converged && n >= 2) sol = detail::solve_step(q[n - 1], wl.right, b, params, config);

        const double prev = std::abs(q[n - 1]);
        bool ok = sol.converged && std::isfinite(sol.q.real()) && std::isfinite(sol.q.imag());
        // no relative-change test on the first step
        if (ok && n >= 2 && prev >= config.growth_floor && std::abs(sol.q) < config.q_cap &&
            std::abs(sol.q - q[n - 1]) > config.max_rel_change * prev)
            ok = false;

        if (!ok) {
            ++tr.rejected_steps;
            const bool growing = n >= 2 && prev > std::abs(q[n - 2]);
            growth_streak = growing ? growth_streak + 1 : 0;
            if (step / 2 < h_min_ticks) {
                tr.step_collapse = true;
                tr.status = growth_streak >= 3 ? RunStatus::BlowupDetected : RunStatus::ToleranceFailure;
                tr.status_time = cache.time(t0);
                break;
            }
            dt = step / 2;
            accepted_since_halving = 0;
            continue;
        }

        T.push_back(t1);
        q.push_back(sol.q);
        hq.push_back(charge_nonlinearity(sol.q, params));
        r.push_back(r1);
        tr.forcing.push_back(f);
        tr.residual_norm.push_back(sol.residual);

        if (!under_resolved && params.beta > 0.0) {
            const double rate = local_frequency(std::abs(sol.q), params) * cache.time(step);
            if (rate > pi) {
                under_resolved = true;
                tr.warnings.push_back("charge rotation under-resolved from t = " + std::to_string(cache.time(t1)) +
                                      "; reduce h_init");
            }
        }
        if (std::abs(sol.q) >= config.q_cap) {
            tr.status = RunStatus::BlowupDetected;
            tr.status_time = cache.time(t1);
            break;
        }
        if (dt < h_init_ticks && ++accepted_since_halving >= config.regrow_after && t1 % (2 * dt) == 0) {
            dt *= 2;
            accepted_since_halving = 0;
        }
    }
    if (tr.status == RunStatus::Completed) tr.status_time = cache.time(T.back());

    tr.times.reserve(T.size());
    for (auto k : T) tr.times.push_back(cache.time(k));
    return tr;
}

namespace detail {

// Lagrange interpolation of q at t from up to four neighbouring nodes.
inline cplx interpolate_q(const std::vector<double>& t, const std::vector<cplx>& q, std::size_t left, double x) {
    const std::size_t n = t.size();
    const std::size_t m = std::min<std::size_t>(4, n);
    std::size_t first = left >= 1 ? left - 1 : 0;
    if (first + m > n) first = n - m;
    cplx s = 0.0;
    for (std::size_t i = first; i < first + m; ++i) {
        double l = 1.0;
        for (std::size_t j = first; j < first + m; ++j)
            if (j != i) l *= (x - t[j]) / (t[i] - t[j]);
        s += l * q[i];
    }
    return s;
}

}  // namespace detail

/// Residual of the charge equation at every node, re-evaluated on the grid with
/// midpoints inserted (midpoint values by cubic interpolation of q).
inline std::vector<double> charge_residual(const ChargeTrajectory& tr, const ModelParams& params,
                                           const InitialDatum& datum) {
    params.validate();
    datum.validate();
    detail::require_solver_frame(datum, "charge_residual");
    const std::size_t n = tr.times.size();
    if (n == 0 || tr.q.size() != n || tr.times.front() != 0.0)
        throw DomainError("charge_residual: trajectory grid does not match its values");
    if (tr.q.front() != datum.q0) throw DomainError("charge_residual: trajectory does not start at the datum charge");

    std::vector<double> fine_t;
    std::vector<cplx> fine_q;
    fine_t.reserve(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
        if (j > 0) {
            const double mid = 0.5 * (tr.times[j - 1] + tr.times[j]);
            fine_t.push_back(mid);
            fine_q.push_back(detail::interpolate_q(tr.times, tr.q, j - 1, mid));
        }
        fine_t.push_back(tr.times[j]);
        fine_q.push_back(tr.q[j]);
    }
    const auto f = forcing(fine_t, datum);
    std::vector<cplx> h(fine_q.size());
    for (std::size_t j = 0; j < h.size(); ++j) h[j] = charge_nonlinearity(fine_q[j], params);

    const TickGrid g = to_tick_grid(fine_t);
    std::vector<double> res(n, 0.0);
    if (g.ticks.empty()) {
        for (std::size_t k = 1; k < n; ++k) {
            const std::size_t K = 2 * k;
            cplx s = 0.0;
            for (std::size_t p = 0; p < K; ++p) {
                const auto w = KernelCache::weights_at(fine_t[K] - fine_t[p + 1], fine_t[K] - fine_t[p]);
                s += w.left * h[p] + w.right * h[p + 1];
            }
            res[k] = std::abs(fine_q[K] + s - f[K]);
        }
        return res;
    }
    KernelCache cache(g.unit);
    const auto& T = g.ticks;
    for (std::size_t k = 1; k < n; ++k) {
        const std::size_t K = 2 * k;
        cplx s = 0.0;
        for (std::size_t p = 0; p < K; ++p) {
            const auto w = cache.hat_weights(T[K] - T[p + 1], T[p + 1] - T[p]);
            s += w.left * h[p] + w.right * h[p + 1];
        }
        res[k] = std::abs(fine_q[K] + s - f[K]);
    }
    return res;
}

}  // namespace pointnls
