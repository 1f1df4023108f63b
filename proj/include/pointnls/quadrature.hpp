#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace pointnls {

template <unsigned N>
struct GaussLegendreRule {
    std::array<double, N> x{};
    std::array<double, N> w{};
};

/// Full N-point Gauss-Legendre rule on [-1, 1], ascending nodes.
template <unsigned N>
const GaussLegendreRule<N>& gauss_legendre() {
    static_assert(N % 2 == 0, "even orders only");
    static const GaussLegendreRule<N> rule = [] {
        using G = boost::math::quadrature::gauss<double, N>;
        const auto& a = G::abscissa();
        const auto& w = G::weights();
        GaussLegendreRule<N> r;
        constexpr unsigned h = N / 2;
        for (unsigned i = 0; i < h; ++i) {
            r.x[h - 1 - i] = -a[i];
            r.w[h - 1 - i] = w[i];
            r.x[h + i] = a[i];
            r.w[h + i] = w[i];
        }
        return r;
    }();
    return rule;
}

/// Flat list of nodes and weights.
struct QuadratureRule {
    std::vector<double> x;
    std::vector<double> w;

    std::size_t size() const { return x.size(); }

    template <class F>
    auto integrate(F&& f) const {
        decltype(f(0.0)) s{};
        for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * f(x[i]);
        return s;
    }
};

template <unsigned N>
void append_panel(QuadratureRule& rule, double a, double b) {
    const auto& gl = gauss_legendre<N>();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (unsigned i = 0; i < N; ++i) {
        rule.x.push_back(c + h * gl.x[i]);
        rule.w.push_back(h * gl.w[i]);
    }
}

/// Composite rule with equal panels of width `panel` covering [a, b].
template <unsigned N>
QuadratureRule composite_gauss(double a, double b, double panel) {
    QuadratureRule rule;
    const auto n = static_cast<std::size_t>((b - a) / panel + 0.5);
    const std::size_t m = n == 0 ? 1 : n;
    const double h = (b - a) / static_cast<double>(m);
    rule.x.reserve(m * N);
    rule.w.reserve(m * N);
    for (std::size_t k = 0; k < m; ++k)
        append_panel<N>(rule, a + h * static_cast<double>(k), a + h * static_cast<double>(k + 1));
    return rule;
}

/// Single-panel N-point integral of f over [a, b].
template <unsigned N, class F>
auto gauss_integrate(F&& f, double a, double b) {
    const auto& gl = gauss_legendre<N>();
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    decltype(f(0.0)) s{};
    for (unsigned i = 0; i < N; ++i) s += gl.w[i] * f(c + h * gl.x[i]);
    return h * s;
}

}  // namespace pointnls
