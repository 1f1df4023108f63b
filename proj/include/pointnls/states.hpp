#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "errors.hpp"
#include "params.hpp"
#include "propagator.hpp"
#include "specfun.hpp"

namespace pointnls {

/// Lowest admissible standing-wave frequency, 4 e^{-2 gamma}.
inline double omega_min() { return 4.0 * std::exp(-2.0 * euler_gamma); }

struct StandingWave {
    double omega = 0.0;
    double charge_modulus = 0.0;
    double phase = 0.0;

    /// Datum of the wave at t = 0 in its own frame lambda = omega.
    InitialDatum datum() const {
        InitialDatum d;
        d.q0 = std::polar(charge_modulus, phase);
        d.lambda = omega;
        return d;
    }
};

inline void require_focusing(const ModelParams& params, const char* who) {
    params.validate();
    if (!(params.beta > 0.0)) throw DomainError(std::string(who) + ": requires beta > 0 (focusing)");
}

/// Standing wave of frequency omega: Q(omega) solves theta_omega(Q) = 0.
inline StandingWave standing_wave(double omega, double eta, const ModelParams& params) {
    require_focusing(params, "standing_wave");
    if (!(omega > omega_min()) || !std::isfinite(omega))
        throw DomainError("standing_wave: omega must exceed 4 exp(-2 gamma)");
    const double l = 0.5 * std::log(omega) - std::numbers::ln2_v<double> + euler_gamma;
    const double Q = std::pow(l / (2.0 * pi * params.beta), 1.0 / (2.0 * params.sigma));
    return StandingWave{omega, Q, eta};
}

/// Inverse of standing_wave: the frequency whose wave has charge modulus q.
inline StandingWave wave_from_charge(double q, double eta, const ModelParams& params) {
    require_focusing(params, "wave_from_charge");
    if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("wave_from_charge: |q| must be positive");
    const double omega =
        4.0 * std::exp(2.0 * (2.0 * pi * params.beta * std::pow(q, 2.0 * params.sigma) - euler_gamma));
    return StandingWave{omega, q, eta};
}

/// Energy of a standing wave with charge modulus Q.
inline double standing_wave_energy(double Q, const ModelParams& params) {
    const double s = params.sigma;
    return -Q * Q / (4.0 * pi) + s * params.beta / (s + 1.0) * std::pow(Q, 2.0 * s + 2.0);
}

/// Infimum of standing-wave energies.
inline double lambda_threshold(const ModelParams& params) {
    require_focusing(params, "lambda_threshold");
    const double s = params.sigma;
    return -s / (4.0 * pi * (s + 1.0) * std::pow(4.0 * pi * s * params.beta, 1.0 / s));
}

/// Same function represented with the charge attached to G_{lambda_new}.
inline InitialDatum rebase_lambda(const InitialDatum& datum, double lambda_new) {
    datum.validate();
    if (!(lambda_new > 0.0) || !std::isfinite(lambda_new)) throw DomainError("rebase_lambda: lambda must be positive");
    InitialDatum out = datum;
    out.lambda = lambda_new;
    if (lambda_new == datum.lambda || datum.q0 == 0.0) return out;
    auto add = [&](cplx c, double mu) {
        for (auto& g : out.regular.green_terms) {
            if (g.pole == mu) {
                g.coefficient += c;
                return;
            }
        }
        out.regular.green_terms.push_back(GreenTerm{c, mu});
    };
    add(datum.q0, datum.lambda);
    add(-datum.q0, lambda_new);
    std::erase_if(out.regular.green_terms,
                  [&](const GreenTerm& g) { return std::abs(g.coefficient) <= 1e-15 * std::abs(datum.q0); });
    return out;
}

/// phi_lambda(0) - theta_lambda(|q0|) q0; zero for data in the operator domain.
inline cplx boundary_mismatch(const InitialDatum& datum, const ModelParams& params) {
    ModelParams p = params;
    p.lambda = datum.lambda;
    return datum.regular.value_at_origin() - theta(std::abs(datum.q0), p) * datum.q0;
}

/// Integral over u in [0, inf) with its error estimate.
struct RadialValue {
    double value = 0.0;
    double error = 0.0;
};

namespace detail {

inline double datum_scale(const InitialDatum& d) {
    double s = d.lambda;
    for (const auto& g : d.regular.gaussians) s = std::min(s, 2.0 / (g.width * g.width));
    for (const auto& g : d.regular.green_terms) s = std::min(s, g.pole);
    return s;
}

inline double datum_reach(const InitialDatum& d) {
    double s = d.lambda;
    for (const auto& g : d.regular.gaussians) s = std::max(s, 2.0 / (g.width * g.width));
    for (const auto& g : d.regular.green_terms) s = std::max(s, g.pole);
    return s;
}

template <class F>
RadialValue radial_integral(F f, const InitialDatum& d, double tol = 1e-13) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double lo = datum_scale(d), hi = datum_reach(d);
    std::vector<double> cuts{0.0};
    for (double c = 0.25 * lo; c < 64.0 * hi; c *= 4.0) cuts.push_back(c);
    RadialValue r;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = i + 1 < cuts.size() ? cuts[i + 1] : std::numeric_limits<double>::infinity();
        double err = 0.0;
        r.value += GK::integrate(f, a, b, 15, tol, &err);
        r.error += err;
    }
    return r;
}

}  // namespace detail

/// Quadratic functionals of a datum evaluated by radial Fourier quadrature.
struct DatumNorms {
    double phi_norm2 = 0.0;   ///< ||phi_lambda||^2
    double grad_norm2 = 0.0;  ///< ||grad phi_lambda||^2
    cplx green_overlap;       ///< <G_lambda, phi_lambda>
    double error = 0.0;       ///< accumulated quadrature error estimate
};

inline DatumNorms datum_norms(const InitialDatum& datum, double tol = 1e-13) {
    datum.validate();
    const auto& reg = datum.regular;
    DatumNorms n;
    if (reg.empty()) return n;
    const auto a = detail::radial_integral([&](double u) { return pi * std::norm(reg.fourier(u)); }, datum, tol);
    const auto b =
        detail::radial_integral([&](double u) { return pi * u * std::norm(reg.fourier(u)); }, datum, tol);
    const auto cr = detail::radial_integral(
        [&](double u) { return 0.5 * reg.fourier(u).real() / (u + datum.lambda); }, datum, tol);
    const auto ci = detail::radial_integral(
        [&](double u) { return 0.5 * reg.fourier(u).imag() / (u + datum.lambda); }, datum, tol);
    n.phi_norm2 = a.value;
    n.grad_norm2 = b.value;
    n.green_overlap = cplx(cr.value, ci.value);
    n.error = a.error + b.error + cr.error + ci.error;
    return n;
}

namespace detail {

inline void check_norm_error(const DatumNorms& n, double scale, const char* who) {
    const double tol = 1e-9 * std::max(1.0, scale);
    if (!(n.error <= tol))
        throw NumericError(std::string(who) + ": radial quadrature did not converge", n.error);
}

}  // namespace detail

/// ||psi_0||^2 in any frame.
inline double datum_mass_squared(const InitialDatum& datum) {
    const auto n = datum_norms(datum);
    const double q2 = std::norm(datum.q0);
    const double m2 = n.phi_norm2 + 2.0 * (std::conj(datum.q0) * n.green_overlap).real() + q2 / (4.0 * pi * datum.lambda);
    detail::check_norm_error(n, m2, "datum_mass");
    return m2;
}

/// ||psi_0||_{L^2}.
inline double datum_mass(const InitialDatum& datum) { return std::sqrt(datum_mass_squared(datum)); }

/// Energy of the datum, evaluated in the datum's own frame.
inline double datum_energy(const InitialDatum& datum, const ModelParams& params) {
    params.validate();
    const auto n = datum_norms(datum);
    const double lam = datum.lambda;
    const double q = std::abs(datum.q0);
    ModelParams p = params;
    p.lambda = lam;
    const double s = params.sigma;
    const double e = n.grad_norm2 - 2.0 * lam * (std::conj(datum.q0) * n.green_overlap).real() - q * q / (4.0 * pi) +
                     theta(q, p) * q * q + s * params.beta / (s + 1.0) * std::pow(q, 2.0 * s + 2.0);
    detail::check_norm_error(n, std::abs(e), "datum_energy");
    return e;
}

/// Quadrature error estimate attached to datum_energy.
inline double datum_energy_error(const InitialDatum& datum) {
    const auto n = datum_norms(datum);
    return n.error * (1.0 + 2.0 * datum.lambda * std::abs(datum.q0));
}

/// M(0) = int |x|^2 |psi_0|^2 dx = pi int 4u |d_u psi_hat|^2 du.
///
/// Finite for every datum of the admitted form, including a pure charge
/// (M(G_lambda) = 1/(6 pi lambda^2)).
inline double inertia0(const InitialDatum& datum) {
    datum.validate();
    const auto r = detail::radial_integral(
        [&](double u) { return 4.0 * pi * u * std::norm(datum.psi_hat_du(u)); }, datum);
    if (!(r.error <= 1e-9 * std::max(1.0, r.value))) throw NumericError("inertia0: radial quadrature did not converge", r.error);
    return r.value;
}

/// dM/dt at t = 0, 8 pi Im int u psi_hat conj(d_u psi_hat) du.
inline double inertia_dot0(const InitialDatum& datum) {
    datum.validate();
    const auto r = detail::radial_integral(
        [&](double u) { return 8.0 * pi * u * (datum.psi_hat(u) * std::conj(datum.psi_hat_du(u))).imag(); }, datum);
    if (!(r.error <= 1e-9 * std::max(1.0, std::abs(r.value))))
        throw NumericError("inertia_dot0: radial quadrature did not converge", r.error);
    return r.value;
}

}  // namespace pointnls
