#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/tools/roots.hpp>

#include "charge.hpp"
#include "errors.hpp"
#include "parallel.hpp"
#include "params.hpp"
#include "propagator.hpp"
#include "states.hpp"

namespace pointnls {

struct Certification {
    bool certified = false;
    double margin = 0.0;  ///< Lambda - E0
    double E0 = 0.0;
    double Lambda = 0.0;
};

/// Energy criterion E(psi_0) < Lambda; sufficient for blow-up, not necessary.
/// The margin must exceed the quadrature error of E(psi_0).
inline Certification certify_blowup(const InitialDatum& datum, const ModelParams& params) {
    if (!(params.beta > 0.0)) throw DomainError("certify_blowup: not applicable for beta <= 0");
    Certification c;
    c.E0 = datum_energy(datum, params);
    c.Lambda = lambda_threshold(params);
    c.margin = c.Lambda - c.E0;
    c.certified = c.margin > datum_energy_error(datum);
    return c;
}

/// Smallest positive root of M0 + Mdot0 t + 4 (E0 - Lambda) t^2.
inline double glassey_bound(double M0, double Mdot0, double E0, double Lambda) {
    if (!(E0 < Lambda)) throw DomainError("glassey_bound: requires E0 < Lambda");
    if (!(M0 > 0.0) || !std::isfinite(M0)) throw DomainError("glassey_bound: M0 must be positive and finite");
    const double a = 4.0 * (Lambda - E0);  // M0 + Mdot0 t - a t^2 = 0
    return (Mdot0 + std::sqrt(Mdot0 * Mdot0 + 4.0 * a * M0)) / (2.0 * a);
}

/// One-parameter family of compatible data a g_w + s (G_mu - G_1) + s G_1.
///
/// For a given shape parameter c in (0, 1) the Gaussian width and the pole are
/// chosen so that the datum satisfies the boundary condition at the origin and
/// E(s) = -(1 + c^2) s^2 / (4 pi) + sigma beta / (sigma + 1) s^{2 sigma + 2}.
struct BlowupFamily {
    double c = 0.9;

    double z() const {
        if (!(c > 0.0 && c < 1.0)) throw DomainError("BlowupFamily: c must lie in (0, 1)");
        const double target = 1.0 - c;
        auto g = [&](double x) { return 2.0 * x * std::exp(x) * boost::math::expint(1, x) - target; };
        std::uintmax_t it = 200;
        const auto r = boost::math::tools::toms748_solve(g, 1e-14, 50.0, boost::math::tools::eps_tolerance<double>(52), it);
        return 0.5 * (r.first + r.second);
    }

    InitialDatum datum(double s, const ModelParams& p) const {
        const double th = -c / (2.0 * pi);
        const double mu = 4.0 * std::exp(2.0 * (2.0 * pi * (th + p.beta * std::pow(s, 2.0 * p.sigma)) - euler_gamma));
        InitialDatum d;
        d.q0 = s;
        d.regular.gaussians = {{th * s, std::sqrt(2.0 * z() / mu)}};
        if (mu != 1.0) d.regular.green_terms = {{s, mu}, {-s, 1.0}};
        return d;
    }

    double energy(double s, const ModelParams& p) const {
        const double sg = p.sigma;
        return -(1.0 + c * c) * s * s / (4.0 * pi) + sg * p.beta / (sg + 1.0) * std::pow(s, 2.0 * sg + 2.0);
    }
};

/// Charge scale s of the family member with datum_energy = ratio * Lambda (ratio > 1),
/// found by bisection on the decreasing branch.
inline double tune_blowup_charge(const ModelParams& params, const BlowupFamily& family = {}, double ratio = 2.0,
                                 int max_iter = 200) {
    require_focusing(params, "tune_blowup_charge");
    const double target = ratio * lambda_threshold(params);
    const double sg = params.sigma;
    // minimiser of the closed-form family energy
    const double s_star =
        std::pow((1.0 + family.c * family.c) / (4.0 * pi * sg * params.beta), 1.0 / (2.0 * sg));
    auto E = [&](double s) { return datum_energy(family.datum(s, params), params); };
    if (!(E(s_star) < target)) throw TuningError("tune_blowup_charge: family does not reach the requested energy");
    double lo = 0.0, hi = s_star;
    for (int i = 0; i < max_iter && hi - lo > 1e-13 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (E(mid) > target ? lo : hi) = mid;
    }
    if (!(hi - lo <= 1e-10 * hi)) throw TuningError("tune_blowup_charge: bisection did not converge");
    return hi;
}

struct BlowupReport {
    double sigma = 0.0;
    double beta = 0.0;
    double E0 = 0.0;
    std::optional<double> Lambda;
    bool certified = false;
    double margin = 0.0;
    double M0 = 0.0;
    double Mdot0 = 0.0;
    std::optional<double> glassey_T;
    std::optional<double> observed_T;
    std::optional<RunStatus> status;
    double max_abs_q = 0.0;
    std::string note;
};

/// Tunes, certifies and runs one datum per sigma (all with the same beta), plus an
/// optional defocusing control row (beta -> -|beta|, sigma = 1) at the end.
inline std::vector<BlowupReport> sigma_sweep(const std::vector<double>& sigmas, double beta, const SolverConfig& config,
                                             bool defocusing_control = true, const BlowupFamily& family = {}) {
    std::vector<std::pair<double, double>> rows;
    for (double s : sigmas) rows.emplace_back(s, beta);
    if (defocusing_control) rows.emplace_back(1.0, -std::abs(beta));
    std::vector<BlowupReport> out(rows.size());

    parallel_for(rows.size(), [&](std::size_t i) {
        const auto [sigma, b] = rows[i];
        BlowupReport r;
        r.sigma = sigma;
        r.beta = b;
        const ModelParams p{sigma, b, 1.0};
        try {
            p.validate();
            if (p.below_wellposed_range()) r.note = "outside theorem hypotheses (sigma < 1/2)";
            InitialDatum d;
            if (b > 0.0) {
                d = family.datum(tune_blowup_charge(p, family), p);
            } else {
                d = family.datum(0.3, p);
                r.note = "defocusing control";
            }
            r.E0 = datum_energy(d, p);
            r.M0 = inertia0(d);
            r.Mdot0 = inertia_dot0(d);
            if (b > 0.0) {
                const auto c = certify_blowup(d, p);
                r.Lambda = c.Lambda;
                r.certified = c.certified;
                r.margin = c.margin;
                if (c.certified) r.glassey_T = glassey_bound(r.M0, r.Mdot0, r.E0, c.Lambda);
            }
            SolverConfig cfg = config;
            if (r.glassey_T) cfg.t_end = std::max(cfg.t_end, 1.25 * *r.glassey_T);
            const auto tr = solve_charge(p, d, cfg);
            r.status = tr.status;
            r.max_abs_q = tr.max_abs_q();
            if (tr.status == RunStatus::BlowupDetected) r.observed_T = tr.status_time;
        } catch (const std::exception& e) {
            r.note = e.what();
        }
        out[i] = r;
    });
    return out;
}

}  // namespace pointnls
