#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "charge.hpp"
#include "errors.hpp"
#include "params.hpp"
#include "parallel.hpp"
#include "propagator.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"
#include "states.hpp"

namespace pointnls {

struct ObservableOptions {
    double k_max = 200.0;
    /// Snapshots whose last-octave mass exceeds this fraction of the mass are rejected.
    double tail_tolerance = 1e-6;
    unsigned threads = 0;  ///< 0: worker_count()
};

struct SpectralSnapshot {
    double t = 0.0;
    std::vector<double> k_nodes;
    std::vector<cplx> psi_hat;
    std::vector<cplx> phi_hat;
    double tail_estimate = 0.0;
};

struct ObservableSample {
    double t = 0.0;
    double mass = 0.0;  ///< L^2 norm
    double energy = 0.0;
    double inertia = 0.0;
    double virial_rhs = 0.0;
    double tail_estimate = 0.0;
    cplx q;
};

namespace detail {

// m_k = int_0^1 x^k e^{i theta x} dx, k = 0, 1, 2.
struct FilonMoments {
    cplx m0, m1, m2;
};

inline FilonMoments filon_moments(double theta) {
    const cplx z(0.0, theta);
    if (std::abs(theta) < 0.5) {
        cplx m0 = 0.0, m1 = 0.0, m2 = 0.0, p = 1.0;
        for (int n = 0; n < 24; ++n) {
            m0 += p / double(n + 1);
            m1 += p / double(n + 2);
            m2 += p / double(n + 3);
            p *= z / double(n + 1);
        }
        return {m0, m1, m2};
    }
    const cplx e = std::polar(1.0, theta);
    const cplx m0 = (e - 1.0) / z;
    const cplx m1 = (e - m0) / z;
    const cplx m2 = (e - 2.0 * m1) / z;
    return {m0, m1, m2};
}

// Piece of the piecewise-linear charge history.
struct HistoryPiece {
    double a, b;
    cplx qa, qb;
    bool closes_sample;
    std::size_t sample;
};

inline std::vector<HistoryPiece> history_pieces(const ChargeTrajectory& tr, const std::vector<double>& samples) {
    std::vector<HistoryPiece> out;
    std::size_t j = 0;  // next trajectory node index beyond the current time
    double cur = 0.0;
    cplx qcur = tr.q.front();
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const double ts = samples[s];
        while (j < tr.times.size() && tr.times[j] <= cur) ++j;
        while (j < tr.times.size() && tr.times[j] < ts) {
            out.push_back({cur, tr.times[j], qcur, tr.q[j], false, 0});
            cur = tr.times[j];
            qcur = tr.q[j];
            ++j;
        }
        if (ts > cur) {
            const cplx qs = tr.q_at(ts);
            out.push_back({cur, ts, qcur, qs, true, s});
            cur = ts;
            qcur = qs;
        } else {
            out.push_back({cur, cur, qcur, qcur, true, s});
        }
    }
    return out;
}

inline QuadratureRule spectral_grid(const InitialDatum& d, double t_max, double k_max) {
    const double u_max = k_max * k_max;
    const double s_min = std::min(1.0, datum_scale(d));
    const double cap = pi / std::max(t_max, 1e-3);
    QuadratureRule rule;
    double u = 0.0;
    while (u < u_max) {
        const double w = std::min({cap, 0.2 * (u + s_min), u_max - u});
        append_panel<10>(rule, u, u + w);
        u += w;
    }
    return rule;
}

struct SpectralSums {
    double phi2 = 0.0;      // pi int |phi_hat|^2
    double grad2 = 0.0;     // pi int u |phi_hat|^2
    cplx cross;             // (1/2) int phi_hat / (u + 1)
    double inertia = 0.0;   // pi int 4u |d_u phi_hat|^2
    cplx inertia_cross;     // -2 int u d_u phi_hat / (u + 1)^2
    double tail = 0.0;      // last-octave part of phi2

    SpectralSums& operator+=(const SpectralSums& o) {
        phi2 += o.phi2;
        grad2 += o.grad2;
        cross += o.cross;
        inertia += o.inertia;
        inertia_cross += o.inertia_cross;
        tail += o.tail;
        return *this;
    }
};

// Accumulates G = int e^{i u tau} q dtau and G1 = int tau e^{i u tau} q dtau over one piece.
inline void advance_piece(double u, const HistoryPiece& p, cplx& G, cplx& G1, double& last_dt, cplx& step,
                          FilonMoments& m, cplx& phase) {
    const double dt = p.b - p.a;
    if (dt <= 0.0) return;
    if (dt != last_dt) {
        last_dt = dt;
        m = filon_moments(u * dt);
        step = std::polar(1.0, u * dt);
        phase = std::polar(1.0, u * p.a);
    }
    const cplx lin0 = p.qa * (m.m0 - m.m1) + p.qb * m.m1;
    const cplx lin1 = p.qa * (m.m1 - m.m2) + p.qb * m.m2;
    G += dt * phase * lin0;
    G1 += dt * phase * (p.a * lin0 + dt * lin1);
    phase *= step;
}

}  // namespace detail

/// psi_hat_t(k) = e^{-i k^2 t} psi_hat_0(k) + (i / 2 pi) int_0^t e^{-i k^2 (t - tau)} q(tau) dtau.
inline cplx psi_hat_at(const ChargeTrajectory& tr, const InitialDatum& datum, double t, double k) {
    detail::require_solver_frame(datum, "psi_hat_at");
    if (tr.times.empty() || !(t >= 0.0) || t > tr.times.back())
        throw DomainError("psi_hat_at: t outside the trajectory");
    const double u = k * k;
    const auto pieces = detail::history_pieces(tr, {t});
    cplx G = 0.0;
    for (const auto& p : pieces) {
        const double dt = p.b - p.a;
        if (dt <= 0.0) continue;
        const auto m = detail::filon_moments(u * dt);
        G += dt * std::polar(1.0, u * p.a) * (p.qa * (m.m0 - m.m1) + p.qb * m.m1);
    }
    return std::polar(1.0, -u * t) * (datum.psi_hat(u) + cplx(0.0, 1.0 / (2.0 * pi)) * G);
}

/// Observables at each of the increasing sample times.
inline std::vector<ObservableSample> observable_series(const ChargeTrajectory& tr, const InitialDatum& datum,
                                                       const ModelParams& params, const std::vector<double>& samples,
                                                       const ObservableOptions& opt = {}) {
    params.validate();
    datum.validate();
    detail::require_solver_frame(datum, "observables");
    if (tr.times.empty() || tr.q.size() != tr.times.size()) throw DomainError("observables: empty trajectory");
    if (samples.empty()) return {};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!(samples[i] >= 0.0) || samples[i] > tr.times.back())
            throw DomainError("observables: sample time outside the trajectory");
        if (i > 0 && !(samples[i] > samples[i - 1])) throw DomainError("observables: sample times must increase");
    }
    if (!(opt.k_max > 0.0)) throw ConfigError({"k_max must be positive"});

    const auto grid = detail::spectral_grid(datum, samples.back(), opt.k_max);
    const auto pieces = detail::history_pieces(tr, samples);
    const double u_tail = 0.25 * opt.k_max * opt.k_max;
    const std::size_t n_s = samples.size();

    constexpr std::size_t chunk = 2048;
    const std::size_t n_chunks = (grid.size() + chunk - 1) / chunk;
    std::vector<std::vector<detail::SpectralSums>> partial(n_chunks, std::vector<detail::SpectralSums>(n_s));

    parallel_for(
        n_chunks,
        [&](std::size_t c) {
            const std::size_t lo = c * chunk, hi = std::min(grid.size(), lo + chunk);
            auto& out = partial[c];
            for (std::size_t i = lo; i < hi; ++i) {
                const double u = grid.x[i], w = grid.w[i];
                const cplx psi0 = datum.psi_hat(u), dpsi0 = datum.psi_hat_du(u);
                const double g = 1.0 / (2.0 * pi * (u + 1.0));
                cplx G = 0.0, G1 = 0.0, step, phase;
                detail::FilonMoments m{};
                double last_dt = -1.0;
                for (const auto& p : pieces) {
                    detail::advance_piece(u, p, G, G1, last_dt, step, m, phase);
                    if (!p.closes_sample) continue;
                    const double t = p.b;
                    const cplx q = tr.q_at(t);
                    const cplx rot = std::polar(1.0, -u * t);
                    const cplx I(0.0, 1.0);
                    const cplx inner = psi0 + I / (2.0 * pi) * G;
                    const cplx psi = rot * inner;
                    const cplx dpsi = -I * t * psi + rot * (dpsi0 - G1 / (2.0 * pi));
                    const cplx phi = psi - q * g;
                    const cplx dphi = dpsi + q * g * g * 2.0 * pi;
                    const double a2 = std::norm(phi);
                    auto& s = out[p.sample];
                    s.phi2 += w * pi * a2;
                    s.grad2 += w * pi * u * a2;
                    s.cross += w * 0.5 * phi / (u + 1.0);
                    s.inertia += w * 4.0 * pi * u * std::norm(dphi);
                    s.inertia_cross += w * (-2.0) * u * dphi / ((u + 1.0) * (u + 1.0));
                    if (u >= u_tail) s.tail += w * pi * a2;
                }
            }
        },
        opt.threads ? opt.threads : worker_count());

    const double e0 = datum_energy(datum, params);
    const double sg = params.sigma, b = params.beta;
    ModelParams p1 = params;
    p1.lambda = 1.0;
    std::vector<ObservableSample> out(n_s);
    for (std::size_t k = 0; k < n_s; ++k) {
        detail::SpectralSums s;
        for (std::size_t c = 0; c < n_chunks; ++c) s += partial[c][k];
        const cplx q = tr.q_at(samples[k]);
        const double aq = std::abs(q), q2 = aq * aq;
        const double m2 = s.phi2 + 2.0 * (std::conj(q) * s.cross).real() + q2 / (4.0 * pi);
        ObservableSample o;
        o.t = samples[k];
        o.q = q;
        o.tail_estimate = s.tail;
        if (!(s.tail <= opt.tail_tolerance * m2))
            throw TailError("observables: spectral tail at t = " + std::to_string(o.t) + " exceeds tolerance; raise k_max",
                            s.tail);
        o.mass = std::sqrt(std::max(m2, 0.0));
        o.energy = s.grad2 - 2.0 * (std::conj(q) * s.cross).real() - q2 / (4.0 * pi) + theta(aq, p1) * q2 +
                   sg * b / (sg + 1.0) * std::pow(aq, 2.0 * sg + 2.0);
        o.inertia = s.inertia + 2.0 * (std::conj(q) * s.inertia_cross).real() + q2 / (6.0 * pi);
        o.virial_rhs = 8.0 * e0 + 2.0 * (1.0 / pi - 4.0 * b * sg / (sg + 1.0) * std::pow(aq, 2.0 * sg)) * q2;
        out[k] = o;
    }
    return out;
}

inline ObservableSample observables_at(const ChargeTrajectory& tr, const InitialDatum& datum,
                                       const ModelParams& params, double t, const ObservableOptions& opt = {}) {
    return observable_series(tr, datum, params, {t}, opt).front();
}

/// psi_hat and phi_hat at the given radial wavenumbers.
inline SpectralSnapshot spectral_snapshot(const ChargeTrajectory& tr, const InitialDatum& datum, double t,
                                          const std::vector<double>& k_nodes, const ModelParams& params,
                                          const ObservableOptions& opt = {}) {
    for (std::size_t i = 0; i < k_nodes.size(); ++i)
        if (!(k_nodes[i] > 0.0) || (i > 0 && !(k_nodes[i] > k_nodes[i - 1])))
            throw DomainError("spectral_snapshot: k nodes must be positive and increasing");
    SpectralSnapshot s;
    s.t = t;
    s.k_nodes = k_nodes;
    const cplx q = tr.q_at(t);
    for (double k : k_nodes) {
        const cplx v = psi_hat_at(tr, datum, t, k);
        s.psi_hat.push_back(v);
        s.phi_hat.push_back(v - q / (2.0 * pi * (k * k + 1.0)));
    }
    s.tail_estimate = observables_at(tr, datum, params, t, opt).tail_estimate;
    return s;
}

struct VirialRow {
    double t = 0.0;
    double M = 0.0;
    double d2M_fd = 0.0;
    double rhs = 0.0;
    double gap = 0.0;  ///< |d2M_fd - rhs| / |rhs|
};

/// Second central differences of M over `cadence` against the virial right-hand side.
inline std::vector<VirialRow> virial_report(const ChargeTrajectory& tr, const InitialDatum& datum,
                                            const ModelParams& params, const std::vector<double>& sample_times,
                                            double cadence, const ObservableOptions& opt = {}) {
    if (sample_times.empty()) throw DomainError("virial_report: no sample times");
    if (!(cadence > 0.0)) throw DomainError("virial_report: cadence must be positive");
    std::vector<double> times;
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        const double t = sample_times[i];
        if (t - cadence < 0.0 || t + cadence > tr.times.back() * (1.0 + 1e-12))
            throw DomainError("virial_report: sample times must be interior to the run");
        if (i > 0 && !(t - sample_times[i - 1] >= 2.0 * cadence * (1.0 - 1e-9)))
            throw DomainError("virial_report: samples must be at least two cadences apart");
        times.push_back(t - cadence);
        times.push_back(t);
        times.push_back(std::min(t + cadence, tr.times.back()));
    }
    std::vector<double> uniq = times;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, b); }),
               uniq.end());
    const auto obs = observable_series(tr, datum, params, uniq, opt);
    auto at = [&](double t) {
        const auto it = std::lower_bound(uniq.begin(), uniq.end(), t - 1e-12 * std::max(1.0, t));
        return obs[static_cast<std::size_t>(it - uniq.begin())];
    };
    std::vector<VirialRow> rows;
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        const auto a = at(times[3 * i]), m = at(times[3 * i + 1]), b = at(times[3 * i + 2]);
        VirialRow r;
        r.t = m.t;
        r.M = m.inertia;
        r.d2M_fd = (b.inertia - 2.0 * m.inertia + a.inertia) / (cadence * cadence);
        r.rhs = m.virial_rhs;
        r.gap = std::abs(r.d2M_fd - r.rhs) / std::max(std::abs(r.rhs), 1e-300);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace pointnls
