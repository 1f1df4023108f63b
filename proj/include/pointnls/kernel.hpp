#pragma once

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <limits>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "quadrature.hpp"
#include "specfun.hpp"

namespace pointnls {

/// Product-integration weights of I(t - tau) against the two hat functions of one panel.
struct HatWeights {
    double left = 0.0;   ///< multiplies the value at the panel start
    double right = 0.0;  ///< multiplies the value at the panel end
};

/// Lazily filled cache of N, N1 and hat weights on an integer time lattice.
///
/// Times are integer multiples of `unit` so cache keys are exact. Not thread safe;
/// each solver owns one.
class KernelCache {
public:
    explicit KernelCache(double unit) : unit_(unit) {
        if (!(unit > 0.0)) throw DomainError("KernelCache: unit must be positive");
    }

    double unit() const { return unit_; }
    double time(std::int64_t ticks) const { return unit_ * static_cast<double>(ticks); }

    double N(std::int64_t ticks) { return moments(ticks).n; }
    double N1(std::int64_t ticks) { return moments(ticks).n1; }

    /// Weights for the panel [t - gap - width, t - gap] seen from t.
    HatWeights hat_weights(std::int64_t gap, std::int64_t width) {
        if (gap < 0 || width <= 0) throw DomainError("hat_weights: invalid panel");
        const Key key{gap, width};
        if (auto it = weights_.find(key); it != weights_.end()) return it->second;
        if (weights_.size() > max_entries) weights_.clear();
        const HatWeights w = compute(gap, width);
        weights_.emplace(key, w);
        return w;
    }

    static constexpr std::size_t max_entries = 1u << 22;

private:
    struct Moments {
        double n, n1;
    };
    struct Key {
        std::int64_t gap, width;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const noexcept {
            const auto a = static_cast<std::uint64_t>(k.gap), b = static_cast<std::uint64_t>(k.width);
            return std::hash<std::uint64_t>{}(a * 0x9E3779B97F4A7C15ull ^ (b + 0x7F4A7C159E3779B9ull + (a << 6)));
        }
    };

    const Moments& moments(std::int64_t ticks) {
        if (auto it = moments_.find(ticks); it != moments_.end()) return it->second;
        if (moments_.size() > max_entries) moments_.clear();
        const double t = time(ticks);
        return moments_.emplace(ticks, Moments{volterra_N(t), volterra_N1(t)}).first->second;
    }

public:
    /// Uncached weights for the panel at distances [sa, sb] from t.
    static HatWeights weights_at(double sa, double sb) {
        if (!(sa >= 0.0) || !(sb > sa)) throw DomainError("weights_at: invalid panel");
        const double d = sb - sa;
        if (20.0 * d <= sa) return direct<4>(sa, sb);
        if (2.0 * d <= sa) return direct<20>(sa, sb);
        return from_moments(sa, sb, volterra_N(sa), volterra_N1(sa), volterra_N(sb), volterra_N1(sb));
    }

private:
    static HatWeights from_moments(double sa, double sb, double na, double n1a, double nb, double n1b) {
        const double d = sb - sa, dn = nb - na, dn1 = n1b - n1a;
        return HatWeights{(dn1 - sa * dn) / d, (sb * dn - dn1) / d};
    }

    template <unsigned M>
    static HatWeights direct(double sa, double sb) {
        const double d = sb - sa;
        const auto& gl = gauss_legendre<M>();
        const double c = 0.5 * (sa + sb), h = 0.5 * d;
        HatWeights w;
        for (unsigned i = 0; i < M; ++i) {
            const double s = c + h * gl.x[i];
            const double v = gl.w[i] * h * volterra_I(s);
            w.left += v * (0.5 + 0.5 * gl.x[i]);
            w.right += v * (0.5 - 0.5 * gl.x[i]);
        }
        return w;
    }

    HatWeights compute(std::int64_t gap, std::int64_t width) {
        const double sa = time(gap), sb = time(gap + width);
        if (20 * width <= gap) return direct<4>(sa, sb);
        if (2 * width <= gap) return direct<20>(sa, sb);
        const Moments a = moments(gap);
        const Moments b = moments(gap + width);
        return from_moments(sa, sb, a.n, a.n1, b.n, b.n1);
    }

    double unit_;
    std::unordered_map<std::int64_t, Moments> moments_;
    std::unordered_map<Key, HatWeights, KeyHash> weights_;
};

/// Integer-tick representation of a time grid.
struct TickGrid {
    double unit = 0.0;
    std::vector<std::int64_t> ticks;
};

/// Finds a lattice unit on which every node is an integer multiple (to 1e-9 of
/// the unit). Returns an empty grid when none exists within 2^24 subdivisions.
inline TickGrid to_tick_grid(const std::vector<double>& times) {
    if (times.empty() || times.front() != 0.0) throw DomainError("time grid must start at 0");
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw DomainError("time grid must be strictly increasing");
        spacing = std::min(spacing, times[i] - times[i - 1]);
    }
    if (times.size() == 1) return TickGrid{1.0, {0}};
    for (int level = 0; level <= 24; ++level) {
        const double unit = spacing / std::ldexp(1.0, level);
        TickGrid g{unit, {}};
        g.ticks.reserve(times.size());
        bool ok = true;
        for (double t : times) {
            const double k = std::round(t / unit);
            if (std::abs(k * unit - t) > 1e-9 * unit + 4 * std::numeric_limits<double>::epsilon() * t) {
                ok = false;
                break;
            }
            g.ticks.push_back(static_cast<std::int64_t>(k));
        }
        if (ok) return g;
    }
    return TickGrid{};
}

/// Hat-function moments of (-gamma - log tau) over the panel [a, b], a >= 0.
inline HatWeights log_hat_weights(double a, double b) {
    auto F0 = [](double x) { return x > 0.0 ? x * std::log(x) - x : 0.0; };
    auto F1 = [](double x) { return x > 0.0 ? 0.5 * x * x * std::log(x) - 0.25 * x * x : 0.0; };
    const double d = b - a;
    const double l0 = F0(b) - F0(a), l1 = F1(b) - F1(a);
    const double m0 = -euler_gamma * d - l0;
    const double m1 = -euler_gamma * 0.5 * (b * b - a * a) - l1;
    return HatWeights{(b * m0 - m1) / d, (m1 - a * m0) / d};
}

/// Two-sided product integration of int_0^t I(t - tau)(-gamma - log tau) dtau.
///
/// On [t/2, t] the log factor is interpolated and I is integrated exactly; on
/// [0, t/2] the roles swap. `n` panels on the kernel side, `n_log` on the log side.
inline double sonine_integral(double t, std::size_t n, std::size_t n_log) {
    if (!(t > 0.0)) throw DomainError("sonine_integral: t must be positive");
    if (n == 0 || n_log == 0) throw DomainError("sonine_integral: need at least one panel");
    const double half = 0.5 * t;
    double total = 0.0;
    // kernel side: gap in [0, t/2]
    const std::int64_t span = static_cast<std::int64_t>(n) * 16;
    KernelCache cache(half / static_cast<double>(span));
    auto g = [](double tau) { return -euler_gamma - std::log(tau); };
    for (std::size_t p = 0; p < n; ++p) {
        const std::int64_t gap = static_cast<std::int64_t>(p) * 16;
        const auto w = cache.hat_weights(gap, 16);
        const double tb = t - cache.time(gap), ta = t - cache.time(gap + 16);
        total += w.left * g(ta) + w.right * g(tb);
    }
    // log side
    const double h = half / static_cast<double>(n_log);
    for (std::size_t p = 0; p < n_log; ++p) {
        const double a = h * static_cast<double>(p), b = p + 1 == n_log ? half : h * static_cast<double>(p + 1);
        const auto w = log_hat_weights(a, b);
        total += w.left * volterra_I(t - a) + w.right * volterra_I(t - b);
    }
    return total;
}

/// Sonine check at default resolution.
inline double sonine_check(double t, std::size_t n = 1000) {
    const double scale = static_cast<double>(n);
    const auto n_kernel = static_cast<std::size_t>(std::ceil(scale * std::max(1.0, 0.5 * t)));
    const auto n_log = static_cast<std::size_t>(std::ceil(scale * std::max(1.0, 4.0 * t)));
    return sonine_integral(t, n_kernel, n_log);
}

}  // namespace pointnls
