#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "errors.hpp"
#include "params.hpp"
#include "quadrature.hpp"

namespace pointnls {

/// Euler-Mascheroni constant.
inline constexpr double euler_gamma = std::numbers::egamma_v<double>;
inline constexpr double pi = std::numbers::pi_v<double>;

namespace detail {

inline void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw DomainError(std::string(what) + ": argument is not finite");
}

// Nodes in v = log(t xi) for the log-integral representations.
struct VolterraRules {
    QuadratureRule lower = composite_gauss<20>(-40.0, 0.0, 4.0);
    QuadratureRule upper = composite_gauss<20>(0.0, 6.0, 0.5);
    QuadratureRule wide = composite_gauss<20>(-40.0, 40.0, 2.0);
};

inline const VolterraRules& volterra_rules() {
    static const VolterraRules r;
    return r;
}

inline constexpr double volterra_overflow = 700.0;

// (1 - (1 + x) e^{-x}) / x
inline double moment_ratio(double x) {
    if (x < 1e-3) return x * (0.5 - x * (1.0 / 3.0 - x / 8.0));
    return (-std::expm1(-x) - x * std::exp(-x)) / x;
}

// 1 - (1 - e^{-x}) / x
inline double second_ratio(double x) {
    if (x < 1e-3) return x * (0.5 - x * (1.0 / 6.0 - x / 24.0));
    return 1.0 + std::expm1(-x) / x;
}

}  // namespace detail

/// Volterra function of order -1, I(t) = int_0^inf t^(s-1)/Gamma(s) ds.
///
/// Evaluated as e^t plus a rapidly convergent log-integral correction.
inline double volterra_I(double t) {
    detail::require_finite(t, "volterra_I");
    if (t <= 0.0) throw DomainError("volterra_I: t must be positive");
    if (t > detail::volterra_overflow) throw DomainError("volterra_I: t too large (overflow)");
    const double L = std::log(t);
    const auto& r = detail::volterra_rules();
    double s = 0.0;
    for (const auto* rule : {&r.lower, &r.upper}) {
        for (std::size_t i = 0; i < rule->size(); ++i) {
            const double v = rule->x[i];
            const double d = v - L;
            s += rule->w[i] * std::exp(v - std::exp(v)) / (pi * pi + d * d);
        }
    }
    return std::exp(t) + s / t;
}

/// I(t) by direct quadrature of the defining integral over s.
///
/// The integrand t^(s-1)/Gamma(s) is entire in s and decays faster than
/// exponentially, so composite Gauss-Legendre on unit panels converges rapidly.
inline double volterra_I_mellin(double t) {
    detail::require_finite(t, "volterra_I_mellin");
    if (t <= 0.0) throw DomainError("volterra_I_mellin: t must be positive");
    if (t > detail::volterra_overflow) throw DomainError("volterra_I_mellin: t too large (overflow)");
    const double L = std::log(t);
    auto f = [L](double s) { return std::exp((s - 1.0) * L - std::lgamma(s)); };
    const double upper = std::ceil(std::max(t, 1.0) + 16.0 * std::sqrt(std::max(t, 1.0)) + 40.0);
    double total = 0.0;
    for (double a = 0.0; a < upper; a += 1.0) total += gauss_integrate<20>(f, a, a + 1.0);
    return total;
}

/// Primitive N(t) = int_0^t I(s) ds.
inline double volterra_N(double t) {
    detail::require_finite(t, "volterra_N");
    if (t < 0.0) throw DomainError("volterra_N: t must be nonnegative");
    if (t == 0.0) return 0.0;
    if (t > detail::volterra_overflow) throw DomainError("volterra_N: t too large (overflow)");
    const double u0 = -std::log(t);
    const auto& r = detail::volterra_rules();
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < r.lower.size(); ++i) {
        const double v = r.lower.x[i];
        const double u = u0 + v;
        a += r.lower.w[i] * (-std::expm1(-std::exp(v))) / (pi * pi + u * u);
    }
    for (std::size_t i = 0; i < r.upper.size(); ++i) {
        const double v = r.upper.x[i];
        const double u = u0 + v;
        b += r.upper.w[i] * std::exp(-std::exp(v)) / (pi * pi + u * u);
    }
    return std::expm1(t) + std::atan2(pi, u0) / pi + a - b;
}

/// First moment N1(t) = int_0^t s I(s) ds.
inline double volterra_N1(double t) {
    detail::require_finite(t, "volterra_N1");
    if (t < 0.0) throw DomainError("volterra_N1: t must be nonnegative");
    if (t == 0.0) return 0.0;
    if (t > detail::volterra_overflow) throw DomainError("volterra_N1: t too large (overflow)");
    const double u0 = -std::log(t);
    const auto& r = detail::volterra_rules().wide;
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double v = r.x[i];
        const double u = u0 + v;
        s += r.w[i] * detail::moment_ratio(std::exp(v)) / (pi * pi + u * u);
    }
    return (t - 1.0) * std::exp(t) + 1.0 + t * s;
}

/// Second primitive N2(t) = int_0^t N(s) ds; satisfies N1 = t N - N2.
inline double volterra_N2(double t) {
    detail::require_finite(t, "volterra_N2");
    if (t < 0.0) throw DomainError("volterra_N2: t must be nonnegative");
    if (t == 0.0) return 0.0;
    if (t > detail::volterra_overflow) throw DomainError("volterra_N2: t too large (overflow)");
    const double u0 = -std::log(t);
    const auto& r = detail::volterra_rules().wide;
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double v = r.x[i];
        const double u = u0 + v;
        const double x = std::exp(v);
        const double g = v < 0.0 ? detail::second_ratio(x) : -(-std::expm1(-x)) / x;
        s += r.w[i] * g / (pi * pi + u * u);
    }
    return std::expm1(t) - t + t * (std::atan2(pi, u0) / pi + s);
}

struct SiCi {
    double si;   ///< Si(x) - pi/2
    double ci;
    double cin;  ///< gamma + ln x - ci(x), entire
};

namespace detail {

// e^{z} E1(z) for z = i x, x > 0, by continued fraction (modified Lentz).
inline std::complex<double> scaled_e1_imag_cf(double x) {
    using C = std::complex<double>;
    const C z(0.0, x);
    constexpr double tiny = 1e-300;
    C b = z + 1.0;
    C c = 1.0 / tiny;
    C d = 1.0 / b;
    C h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const C del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) return h;
    }
    throw NumericError("e1 continued fraction did not converge", x);
}

inline constexpr double sici_series_limit = 4.0;

inline void sici_series(double x, double& Si, double& cin) {
    const double x2 = x * x;
    double term = x;  // x^{2n+1}/(2n+1)!
    Si = x;
    double tc = 1.0;  // x^{2n}/(2n)!
    cin = 0.0;
    for (int n = 1; n < 40; ++n) {
        tc *= x2 / ((2.0 * n - 1.0) * (2.0 * n));
        term *= x2 / ((2.0 * n) * (2.0 * n + 1.0));
        const double sign = (n % 2) ? 1.0 : -1.0;
        cin += sign * tc / (2.0 * n);
        Si -= sign * term / (2.0 * n + 1.0);
        if (tc < 1e-18 * std::abs(cin) && term < 1e-18 * std::abs(Si)) break;
    }
}

}  // namespace detail

/// Sine and cosine integrals, si(x) = Si(x) - pi/2.
inline SiCi sici(double x) {
    detail::require_finite(x, "sici");
    if (x <= 0.0) throw DomainError("sici: x must be positive");
    SiCi r{};
    if (x <= detail::sici_series_limit) {
        double Si = 0.0;
        detail::sici_series(x, Si, r.cin);
        r.si = Si - pi / 2.0;
        r.ci = euler_gamma + std::log(x) - r.cin;
    } else {
        const auto e1 = std::polar(1.0, -x) * detail::scaled_e1_imag_cf(x);
        r.ci = -e1.real();
        r.si = e1.imag();
        r.cin = euler_gamma + std::log(x) - r.ci;
    }
    return r;
}

/// Cin(x) = int_0^x (1 - cos s)/s ds; Cin(0) = 0.
inline double cin(double x) {
    if (x == 0.0) return 0.0;
    return sici(x).cin;
}

/// e^{ix} E1(ix) = e^{ix}(-ci(x) + i si(x)) for x > 0.
inline std::complex<double> scaled_e1_imag(double x) {
    detail::require_finite(x, "scaled_e1_imag");
    if (x <= 0.0) throw DomainError("scaled_e1_imag: x must be positive");
    if (x > detail::sici_series_limit) return detail::scaled_e1_imag_cf(x);
    const auto s = sici(x);
    return std::polar(1.0, x) * std::complex<double>(-s.ci, s.si);
}

/// MacDonald function K0.
inline double macdonald_k0(double x) {
    detail::require_finite(x, "macdonald_k0");
    if (x <= 0.0) throw DomainError("macdonald_k0: x must be positive");
    if (x > 700.0) return 0.0;
    return std::cyl_bessel_k(0.0, x);
}

/// Green function of (-Laplacian + lambda) in the plane at distance r.
inline double green_function(double r, double lambda) {
    return macdonald_k0(std::sqrt(lambda) * r) / (2.0 * pi);
}

/// Linear part of the coupling, (log(sqrt(lambda)/2) + gamma) / (2 pi).
inline double theta_linear(double lambda) {
    return (0.5 * std::log(lambda) - std::numbers::ln2_v<double> + euler_gamma) / (2.0 * pi);
}

/// Coupling theta_lambda(s) with lambda = params.lambda.
inline double theta(double s, const ModelParams& params) {
    params.validate();
    if (!(s >= 0.0)) throw DomainError("theta: s must be nonnegative");
    return theta_linear(params.lambda) - params.beta * std::pow(s, 2.0 * params.sigma);
}

/// Tabulated N and N1 on a set of breakpoints starting at 0.
class KernelTable {
public:
    explicit KernelTable(std::vector<double> breakpoints) : breakpoints_(std::move(breakpoints)) {
        if (breakpoints_.empty() || breakpoints_.front() != 0.0)
            throw DomainError("KernelTable: breakpoints must start at 0");
        for (std::size_t i = 1; i < breakpoints_.size(); ++i)
            if (!(breakpoints_[i] > breakpoints_[i - 1]))
                throw DomainError("KernelTable: breakpoints must be strictly increasing");
        n_.reserve(breakpoints_.size());
        n1_.reserve(breakpoints_.size());
        for (double t : breakpoints_) {
            n_.push_back(volterra_N(t));
            n1_.push_back(volterra_N1(t));
        }
    }

    static KernelTable uniform(double h, std::size_t n) {
        std::vector<double> b(n + 1);
        for (std::size_t i = 0; i <= n; ++i) b[i] = h * static_cast<double>(i);
        return KernelTable(std::move(b));
    }

    std::size_t size() const { return breakpoints_.size(); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& N_values() const { return n_; }
    const std::vector<double>& N1_values() const { return n1_; }

private:
    std::vector<double> breakpoints_;
    std::vector<double> n_;
    std::vector<double> n1_;
};

}  // namespace pointnls
