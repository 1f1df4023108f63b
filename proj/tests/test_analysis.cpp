#include <catch_amalgamated.hpp>

#include <cmath>

#include <pointnls/analysis.hpp>
#include <pointnls/observables.hpp>

using namespace pointnls;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Glassey bound", "[analysis]") {
    CHECK_THAT(glassey_bound(1.0, 0.0, -1.0, 0.0), WithinRel(0.5, 1e-15));
    CHECK(glassey_bound(1.0, -0.5, -1.0, 0.0) < 0.5);
    CHECK(glassey_bound(1.0, 0.5, -1.0, 0.0) > 0.5);
    CHECK_THAT(glassey_bound(4.0, 0.0, -3.0, -1.0), WithinRel(2.0 * glassey_bound(1.0, 0.0, -3.0, -1.0), 1e-15));
    const double T = glassey_bound(0.3, -0.2, -2.0, -0.5);
    CHECK_THAT(0.3 - 0.2 * T + 4.0 * (-1.5) * T * T, WithinAbs(0.0, 1e-14));
    CHECK_THROWS_AS(glassey_bound(1.0, 0.0, -1.0, -1.0), DomainError);
    CHECK_THROWS_AS(glassey_bound(0.0, 0.0, -2.0, -1.0), DomainError);
}

TEST_CASE("certification boundary cases", "[analysis]") {
    const ModelParams p{1.0, 1.0, 1.0};
    InitialDatum g;
    g.regular.gaussians = {{cplx(1.0, 0.0), 1.0}};
    const auto c = certify_blowup(g, p);
    CHECK_FALSE(c.certified);
    CHECK(c.margin < 0.0);
    CHECK(c.Lambda < 0.0);

    // the standing wave of least energy sits exactly on the threshold
    const double Qstar = std::pow(1.0 / (4.0 * pi * p.sigma * p.beta), 1.0 / (2.0 * p.sigma));
    const auto w = wave_from_charge(Qstar, 0.0, p);
    const auto cw = certify_blowup(w.datum(), p);
    CHECK_THAT(cw.margin, WithinAbs(0.0, 1e-15));
    CHECK_FALSE(certify_blowup(wave_from_charge(1.01 * Qstar, 0.0, p).datum(), p).certified);

    CHECK_THROWS_AS(certify_blowup(g, ModelParams{1.0, -1.0, 1.0}), DomainError);
}

TEST_CASE("blow-up family energy and compatibility", "[analysis]") {
    const BlowupFamily f;
    CHECK_THAT(2.0 * f.z() * std::exp(f.z()) * boost::math::expint(1, f.z()), WithinAbs(0.1, 1e-14));
    for (double sigma : {0.5, 1.0, 2.0}) {
        const ModelParams p{sigma, 1.0, 1.0};
        for (double s : {0.05, 0.2, 0.4}) {
            const auto d = f.datum(s, p);
            CHECK(std::abs(boundary_mismatch(d, p)) < 1e-14);
            CHECK_THAT(datum_energy(d, p), WithinAbs(f.energy(s, p), 1e-9 * std::abs(f.energy(s, p)) + 1e-15));
        }
    }
}

TEST_CASE("tuned datum sits at twice the threshold", "[analysis]") {
    const ModelParams p{1.0, 1.0, 1.0};
    const BlowupFamily f;
    const double s = tune_blowup_charge(p, f);
    const auto d = f.datum(s, p);
    const auto c = certify_blowup(d, p);
    CHECK(c.certified);
    CHECK_THAT(c.margin, WithinRel(std::abs(c.Lambda), 1e-8));
    // representation independence
    const auto r = certify_blowup(rebase_lambda(d, 3.0), p);
    CHECK(r.certified);
    CHECK_THAT(r.E0, WithinAbs(c.E0, 1e-6 * std::abs(c.E0)));
    CHECK_THROWS_AS(tune_blowup_charge(p, f, 10.0), TuningError);
}

TEST_CASE("sigma sweep blows up for every power", "[analysis]") {
    SolverConfig cfg;
    cfg.h_init = 1e-3;
    const auto rows = sigma_sweep({0.5, 1.0, 2.0}, 1.0, cfg);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& r = rows[i];
        INFO("sigma = " << r.sigma << " " << r.note);
        CHECK(r.certified);
        REQUIRE(r.Lambda);
        CHECK(*r.Lambda < 0.0);
        REQUIRE(r.status);
        CHECK(*r.status == RunStatus::BlowupDetected);
        REQUIRE(r.glassey_T);
        REQUIRE(r.observed_T);
        CHECK(*r.observed_T <= 1.1 * *r.glassey_T);
    }
    const auto& control = rows[3];
    CHECK(control.beta < 0.0);
    CHECK_FALSE(control.certified);
    CHECK_FALSE(control.Lambda);
    REQUIRE(control.status);
    CHECK(*control.status == RunStatus::Completed);
}

TEST_CASE("certified run obeys the concavity bound", "[analysis]") {
    const ModelParams p{1.0, 1.0, 1.0};
    const BlowupFamily f;
    const auto d = f.datum(tune_blowup_charge(p, f), p);
    const auto c = certify_blowup(d, p);
    SolverConfig cfg;
    cfg.t_end = 2.0;
    cfg.h_init = 1e-3;
    const auto tr = solve_charge(p, d, cfg);
    REQUIRE(tr.status == RunStatus::BlowupDetected);
    const double delta = 2e-3;
    std::vector<double> samples;
    for (double t = 0.005; t + delta < tr.t_last() - 0.005; t += 2 * delta) samples.push_back(t);
    REQUIRE(samples.size() >= 5);
    for (const auto& r : virial_report(tr, d, p, samples, delta)) CHECK(r.d2M_fd <= -8.0 * c.margin + 1e-4);
}
