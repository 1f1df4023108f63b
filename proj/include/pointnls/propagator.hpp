#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernel.hpp"
#include "specfun.hpp"

namespace pointnls {

using cplx = std::complex<double>;

/// a * exp(-|x|^2 / (2 w^2)).
struct GaussianTerm {
    cplx amplitude;
    double width = 1.0;
    bool operator==(const GaussianTerm&) const = default;
};

/// c * G_mu.
struct GreenTerm {
    cplx coefficient;
    double pole = 1.0;
    bool operator==(const GreenTerm&) const = default;
};

/// Regular part of a datum: Gaussians plus a zero-sum combination of Green functions.
///
/// Fourier transforms use the unitary convention and are written in u = |k|^2.
struct RegularPart {
    std::vector<GaussianTerm> gaussians;
    std::vector<GreenTerm> green_terms;

    std::vector<std::string> violations() const {
        std::vector<std::string> v;
        for (std::size_t i = 0; i < gaussians.size(); ++i) {
            const auto& g = gaussians[i];
            if (!(g.width > 0.0) || !std::isfinite(g.width))
                v.push_back("gaussian[" + std::to_string(i) + "]: width must be positive");
            if (!std::isfinite(g.amplitude.real()) || !std::isfinite(g.amplitude.imag()))
                v.push_back("gaussian[" + std::to_string(i) + "]: amplitude must be finite");
        }
        double scale = 0.0;
        cplx sum = 0.0;
        for (std::size_t i = 0; i < green_terms.size(); ++i) {
            const auto& g = green_terms[i];
            if (!(g.pole > 0.0) || !std::isfinite(g.pole))
                v.push_back("green[" + std::to_string(i) + "]: pole must be positive");
            if (!std::isfinite(g.coefficient.real()) || !std::isfinite(g.coefficient.imag()))
                v.push_back("green[" + std::to_string(i) + "]: coefficient must be finite");
            for (std::size_t j = 0; j < i; ++j)
                if (green_terms[j].pole == g.pole)
                    v.push_back("green[" + std::to_string(i) + "]: pole duplicates green[" + std::to_string(j) +
                                "]; merge the coefficients");
            scale += std::abs(g.coefficient);
            sum += g.coefficient;
        }
        if (std::abs(sum) > 1e-12 * std::max(scale, 1.0))
            v.push_back("green coefficients must sum to zero");
        return v;
    }

    void validate() const {
        auto v = violations();
        if (!v.empty()) throw ConfigError(std::move(v));
    }

    bool empty() const { return gaussians.empty() && green_terms.empty(); }

    cplx fourier(double u) const {
        cplx s = 0.0;
        for (const auto& g : gaussians) {
            const double w2 = g.width * g.width;
            s += g.amplitude * (w2 * std::exp(-0.5 * u * w2));
        }
        for (const auto& g : green_terms) s += g.coefficient / (2.0 * pi * (u + g.pole));
        return s;
    }

    /// Derivative of fourier() with respect to u.
    cplx fourier_du(double u) const {
        cplx s = 0.0;
        for (const auto& g : gaussians) {
            const double w2 = g.width * g.width;
            s -= g.amplitude * (0.5 * w2 * w2 * std::exp(-0.5 * u * w2));
        }
        for (const auto& g : green_terms) {
            const double d = u + g.pole;
            s -= g.coefficient / (2.0 * pi * d * d);
        }
        return s;
    }

    /// Value at the origin (finite because the Green coefficients sum to zero).
    cplx value_at_origin() const {
        cplx s = 0.0;
        for (const auto& g : gaussians) s += g.amplitude;
        for (const auto& g : green_terms) s -= g.coefficient * std::log(g.pole) / (4.0 * pi);
        return s;
    }

    bool operator==(const RegularPart&) const = default;
};

/// psi_0 = regular + q0 * G_lambda.
struct InitialDatum {
    RegularPart regular;
    cplx q0 = 0.0;
    double lambda = 1.0;

    std::vector<std::string> violations() const {
        auto v = regular.violations();
        if (!(lambda > 0.0) || !std::isfinite(lambda)) v.push_back("lambda must be positive");
        if (!std::isfinite(q0.real()) || !std::isfinite(q0.imag())) v.push_back("q0 must be finite");
        return v;
    }

    void validate() const {
        auto v = violations();
        if (!v.empty()) throw ConfigError(std::move(v));
    }

    cplx psi_hat(double u) const { return regular.fourier(u) + q0 / (2.0 * pi * (u + lambda)); }

    cplx psi_hat_du(double u) const {
        const double d = u + lambda;
        return regular.fourier_du(u) - q0 / (2.0 * pi * d * d);
    }

    bool operator==(const InitialDatum&) const = default;
};

namespace detail {

// Green terms of the datum including the charge at its pole.
inline std::vector<GreenTerm> all_green_terms(const InitialDatum& d) {
    std::vector<GreenTerm> g = d.regular.green_terms;
    if (d.q0 != 0.0) g.push_back(GreenTerm{d.q0, d.lambda});
    return g;
}

inline void require_solver_frame(const InitialDatum& d, const char* who) {
    if (d.lambda != 1.0)
        throw FrameError(std::string(who) + ": datum must be given with lambda = 1; use rebase_lambda first");
}

}  // namespace detail

/// Free evolution evaluated at the origin, (U_0(tau) psi_0)(0), tau > 0.
inline cplx origin_trace(const InitialDatum& datum, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("origin_trace: tau must be positive");
    cplx s = 0.0;
    for (const auto& g : datum.regular.gaussians) {
        const double w2 = g.width * g.width;
        s += g.amplitude * w2 / cplx(w2, 2.0 * tau);
    }
    for (const auto& g : detail::all_green_terms(datum)) s += g.coefficient * scaled_e1_imag(g.pole * tau) / (4.0 * pi);
    return s;
}

/// Coefficient of (-gamma - log tau) in 4 pi times the origin trace.
inline cplx log_coefficient(const InitialDatum& datum) {
    cplx c = datum.q0;
    for (const auto& g : datum.regular.green_terms) c += g.coefficient;
    return c;
}

/// 4 pi (U_0(tau) psi_0)(0) minus its logarithmic part C (-gamma - log tau); bounded, tau >= 0.
inline cplx trace_remainder(const InitialDatum& datum, double tau) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw DomainError("trace_remainder: tau must be nonnegative");
    cplx s = 0.0;
    for (const auto& g : datum.regular.gaussians) {
        const double w2 = g.width * g.width;
        s += 4.0 * pi * g.amplitude * w2 / cplx(w2, 2.0 * tau);
    }
    const double lt = tau > 0.0 ? euler_gamma + std::log(tau) : 0.0;
    for (const auto& g : detail::all_green_terms(datum)) {
        const double x = g.pole * tau;
        cplx v;
        if (x == 0.0) {
            v = cplx(-std::log(g.pole), -pi / 2.0);
        } else if (x <= detail::sici_series_limit) {
            const auto sc = sici(x);
            const cplx e = std::polar(1.0, x);
            v = e * cplx(sc.cin - std::log(g.pole), sc.si) - (e - 1.0) * lt;
        } else {
            v = scaled_e1_imag(x) + lt;
        }
        s += g.coefficient * v;
    }
    return s;
}

enum class ProductRule {
    Linear,    ///< piecewise-linear interpolation, second order
    Midpoint,  ///< piecewise-constant at panel midpoints (debug)
};

/// f(t_n) = 4 pi int_0^{t_n} I(t_n - tau) (U_0(tau) psi_0)(0) dtau at each node.
///
/// The logarithmic part contributes exactly its coefficient (Sonine pair); the
/// bounded remainder is convolved with I by product integration.
inline std::vector<cplx> forcing(const std::vector<double>& grid, const InitialDatum& datum,
                                 ProductRule rule = ProductRule::Linear) {
    datum.validate();
    detail::require_solver_frame(datum, "forcing");
    const TickGrid tg = to_tick_grid(grid);
    const std::size_t n = grid.size();
    const cplx C = log_coefficient(datum);
    std::vector<cplx> f(n, C);
    if (rule == ProductRule::Midpoint) {
        for (std::size_t k = 1; k < n; ++k) {
            cplx s = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const double dn = volterra_N(grid[k] - grid[p]) - volterra_N(grid[k] - grid[p + 1]);
                s += dn * trace_remainder(datum, 0.5 * (grid[p] + grid[p + 1]));
            }
            f[k] += s;
        }
        return f;
    }
    std::vector<cplx> r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = trace_remainder(datum, grid[j]);
    if (tg.ticks.empty()) {
        for (std::size_t k = 1; k < n; ++k) {
            cplx s = 0.0;
            for (std::size_t p = 0; p < k; ++p) {
                const auto w = KernelCache::weights_at(grid[k] - grid[p + 1], grid[k] - grid[p]);
                s += w.left * r[p] + w.right * r[p + 1];
            }
            f[k] += s;
        }
        return f;
    }
    KernelCache cache(tg.unit);
    const auto& t = tg.ticks;
    for (std::size_t k = 1; k < n; ++k) {
        cplx s = 0.0;
        for (std::size_t p = 0; p < k; ++p) {
            const auto w = cache.hat_weights(t[k] - t[p + 1], t[p + 1] - t[p]);
            s += w.left * r[p] + w.right * r[p + 1];
        }
        f[k] += s;
    }
    return f;
}

}  // namespace pointnls
