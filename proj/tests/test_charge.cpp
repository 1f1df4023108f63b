#include <catch_amalgamated.hpp>

#include <cmath>

#include <pointnls/charge.hpp>
#include <pointnls/states.hpp>

using namespace pointnls;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SolverConfig config(double t_end, double h) {
    SolverConfig c;
    c.t_end = t_end;
    c.h_init = h;
    return c;
}

// charge q0 = s with a Gaussian fixing the boundary condition at the origin
InitialDatum compatible(double s, const ModelParams& p) {
    InitialDatum d;
    d.q0 = s;
    d.regular.gaussians = {{theta(s, p) * s, 1.0}};
    return d;
}

double window_sup(const ChargeTrajectory& a, const ChargeTrajectory& b, double from) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.q.size(); ++i)
        if (a.times[i] >= from) m = std::max(m, std::abs(a.q[i] - b.q[2 * i]));
    return m;
}

}  // namespace

TEST_CASE("kappa constant", "[charge]") {
    CHECK_THAT(kappa.real(), WithinAbs(-2.0 * (std::log(2.0) - 0.57721566490153286), 1e-15));
    CHECK_THAT(kappa.imag(), WithinAbs(-pi / 2, 1e-15));
}

TEST_CASE("solver config validation lists every violation", "[charge]") {
    SolverConfig c;
    c.t_end = -1.0;
    c.h_min = 1.0;
    c.max_iter = 0;
    try {
        c.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.violations().size() >= 3);
    }
    SolverConfig d;
    CHECK_THROWS_AS(d.validate(cplx(2e6)), ConfigError);
    CHECK_NOTHROW(d.validate());
}

TEST_CASE("zero datum stays at zero", "[charge]") {
    const ModelParams p{1.0, 1.0, 1.0};
    const auto tr = solve_charge(p, InitialDatum{}, config(0.2, 1e-2));
    CHECK(tr.status == RunStatus::Completed);
    CHECK(tr.times.size() == 21);
    CHECK_THAT(tr.times.back(), WithinAbs(0.2, 1e-15));
    for (auto z : tr.q) CHECK(z == cplx(0.0));
    for (double r : charge_residual(tr, p, InitialDatum{})) CHECK(r == 0.0);
}

TEST_CASE("stable standing wave is preserved", "[charge]") {
    const ModelParams p{1.0, 1.0 / (2 * pi), 1.0};
    const auto w = wave_from_charge(std::sqrt(0.3), 0.4, p);
    const auto d = rebase_lambda(w.datum(), 1.0);
    const auto tr = solve_charge(p, d, config(2.0, 1e-3));
    REQUIRE(tr.status == RunStatus::Completed);
    double dev = 0.0, phase = 0.0;
    for (std::size_t i = 0; i < tr.q.size(); ++i) {
        dev = std::max(dev, std::abs(std::abs(tr.q[i]) - w.charge_modulus));
        if (i > 0) phase += std::arg(tr.q[i] * std::conj(tr.q[i - 1]));
    }
    CHECK(dev < 1e-4);
    CHECK_THAT(phase / tr.times.back(), WithinRel(w.omega, 1e-3));
    const auto res = charge_residual(tr, p, d);
    CHECK(*std::max_element(res.begin(), res.end()) < 1e-4);
}

TEST_CASE("residual of exact samples is second order", "[charge]") {
    const ModelParams p{1.0, 1.0 / (2 * pi), 1.0};
    const auto w = wave_from_charge(std::sqrt(0.3), 0.0, p);
    const auto d = rebase_lambda(w.datum(), 1.0);
    auto max_residual = [&](double h) {
        ChargeTrajectory tr;
        for (int i = 0; i * h <= 1.0 + 1e-12; ++i) {
            tr.times.push_back(i * h);
            tr.q.push_back(std::polar(w.charge_modulus, w.omega * i * h));
        }
        const auto r = charge_residual(tr, p, d);
        return *std::max_element(r.begin(), r.end());
    };
    const double r1 = max_residual(0.02), r2 = max_residual(0.01);
    CHECK(r2 < 1e-3);
    CHECK(r1 / r2 > 3.0);
    CHECK(r1 / r2 < 5.0);
}

TEST_CASE("self-convergence is second order on compatible data", "[charge]") {
    const ModelParams p{1.0, 1.0, 1.0};
    const auto d = compatible(0.3, p);
    CHECK(std::abs(boundary_mismatch(d, p)) < 1e-15);
    std::vector<ChargeTrajectory> runs;
    for (double h : {8e-3, 4e-3, 2e-3}) runs.push_back(solve_charge(p, d, config(1.0, h)));
    for (const auto& r : runs) REQUIRE(r.status == RunStatus::Completed);
    const double e1 = window_sup(runs[0], runs[1], 0.1), e2 = window_sup(runs[1], runs[2], 0.1);
    CHECK(std::log2(e1 / e2) > 1.8);
}

TEST_CASE("defocusing run completes with bounded charge", "[charge]") {
    const ModelParams p{1.0, -1.0, 1.0};
    InitialDatum d;
    d.regular.gaussians = {{cplx(1.0, 0.0), 1.0}};
    const auto tr = solve_charge(p, d, config(1.0, 1e-3));
    CHECK(tr.status == RunStatus::Completed);
    CHECK(tr.rejected_steps == 0);
    CHECK(tr.max_abs_q() < 2.0);
    CHECK(tr.q.front() == cplx(0.0));
}

TEST_CASE("charge cap triggers blow-up", "[charge]") {
    const ModelParams p{1.0, -1.0, 1.0};
    InitialDatum d;
    d.regular.gaussians = {{cplx(1.0, 0.0), 1.0}};
    auto c = config(0.5, 1e-3);
    c.q_cap = 0.5;
    const auto tr = solve_charge(p, d, c);
    CHECK(tr.status == RunStatus::BlowupDetected);
    CHECK(std::abs(tr.q.back()) >= c.q_cap);
    CHECK(tr.status_time == tr.times.back());
}

TEST_CASE("step collapse is reported", "[charge]") {
    const ModelParams p{1.0, -1.0, 1.0};
    InitialDatum d;
    d.q0 = 0.5;
    auto c = config(0.1, 1e-2);
    c.h_min = 5e-3;
    c.max_rel_change = 1e-9;
    const auto tr = solve_charge(p, d, c);
    CHECK(tr.step_collapse);
    CHECK(tr.status == RunStatus::ToleranceFailure);
    CHECK(tr.times.size() == 2);
}

TEST_CASE("solver rejects a datum outside the solver frame", "[charge]") {
    const ModelParams p{1.0, 1.0, 1.0};
    InitialDatum d;
    d.q0 = 1.0;
    d.lambda = 2.0;
    CHECK_THROWS_AS(solve_charge(p, d, config(0.1, 1e-2)), FrameError);
    ChargeTrajectory tr;
    tr.times = {0.0, 0.1};
    tr.q = {1.0};
    d.lambda = 1.0;
    CHECK_THROWS_AS(charge_residual(tr, p, d), DomainError);
}

TEST_CASE("below the well-posed range a warning is recorded", "[charge]") {
    const ModelParams p{0.3, -1.0, 1.0};
    InitialDatum d;
    d.q0 = 0.1;
    const auto tr = solve_charge(p, d, config(0.05, 1e-2));
    CHECK(tr.warnings.size() == 1);
}

TEST_CASE("linear interpolation of the charge", "[charge]") {
    ChargeTrajectory tr;
    tr.times = {0.0, 1.0, 3.0};
    tr.q = {0.0, cplx(1.0, 1.0), cplx(3.0, -1.0)};
    CHECK(tr.q_at(0.5) == cplx(0.5, 0.5));
    CHECK(tr.q_at(2.0) == cplx(2.0, 0.0));
    CHECK(tr.q_at(3.0) == cplx(3.0, -1.0));
    CHECK_THROWS_AS(tr.q_at(3.5), DomainError);
}
