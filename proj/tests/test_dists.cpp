#include <doctest.h>

#include <cmath>
#include <random>

#include "spqm/dists.hpp"
#include "spqm/errors.hpp"
#include "spqm/group.hpp"
#include "spqm/moments.hpp"

using namespace spqm;

TEST_CASE("Sigma width") {
    CHECK(sigma_width(0.0) == 0.0);
    CHECK(sigma_width(1.0) == doctest::Approx(0.2384058).epsilon(1e-7));
    CHECK(sigma_width(0.1) == doctest::Approx(3.3201e-4).epsilon(1e-4));
    CHECK(sigma_width(0.1) / (0.1 * 0.1 * 0.1 / 3.0) == doctest::Approx(1.0).epsilon(0.02));
    // Series and direct branches meet continuously.
    CHECK(sigma_width(1e-3 * (1 - 1e-12)) == doctest::Approx(sigma_width(1e-3)).epsilon(1e-9));
    for (const double t : {0.2, 1.0, 3.0}) {
        const double h = 1e-4;
        const double fd = (sigma_width(t + h) - sigma_width(t - h)) / (2.0 * h);
        CHECK(std::abs(fd - sigma_rate(1.0, t)) <= 1e-6);
    }
}

TEST_CASE("Cartan reduced density") {
    const double kT = 1.0;
    const ReducedPoint same = ReducedPoint::from_cartan(2.0, {0.3, 0.1}, {0.3, 0.1});
    CHECK(density_cartan_reduced(same, kT).exponent == 0.0);

    const double sig = sigma_width(kT);
    const ReducedPoint p = ReducedPoint::from_cartan(2.0, {std::sqrt(sig), 0.0}, {0.0, 0.0});
    const DensityValue d = density_cartan_reduced(p, kT);
    CHECK(d.exponent == doctest::Approx(-1.0));
    CHECK(d.prefactor == doctest::Approx(2.0 / (std::sinh(2.0) * 0.2384058)).epsilon(1e-6));

    const cplx c(1.7, -0.4);
    const ReducedPoint q = ReducedPoint::from_cartan(2.0, cplx(0.2, 0.5) + c, cplx(-0.1, 0.3) + c);
    const ReducedPoint q0 = ReducedPoint::from_cartan(2.0, cplx(0.2, 0.5), cplx(-0.1, 0.3));
    CHECK(density_cartan_reduced(q, kT).value() == doctest::Approx(density_cartan_reduced(q0, kT).value()));

    CHECK_THROWS_AS(density_cartan_reduced(p, 0.7), ContractError);
}

TEST_CASE("HC density in both variable sets") {
    std::mt19937_64 gen(5);
    std::normal_distribution<double> g;
    for (const double kT : {0.3, 1.0, 2.5}) {
        const ReducedPoint p = ReducedPoint::from_hc(2.0 * kT, {g(gen), g(gen)}, {g(gen), g(gen)});
        const DensityValue a = density_hc_reduced(p, kT, false, PhaseVariables::HC);
        const DensityValue b = density_hc_reduced(p, kT, false, PhaseVariables::Cartan);
        CHECK(a.exponent == doctest::Approx(b.exponent).epsilon(1e-12));
        const DensityValue n = density_hc_reduced(p, kT, true);
        CHECK(n.prefactor * normalization_factor(kT) == doctest::Approx(a.prefactor));
    }
}

TEST_CASE("normalization of the HC density") {
    CHECK(normalization_factor(1.0) == doctest::Approx(3.694528).epsilon(1e-6));
    for (const double kT : {0.5, 1.0, 2.0}) {
        const ReducedIntegrals raw = integrate_reduced_hc(kT, false, 20);
        CHECK(raw.norm == doctest::Approx(normalization_factor(kT)).epsilon(1e-10));
        const ReducedIntegrals I = integrate_reduced_hc(kT, true, 20);
        CHECK(I.norm == doctest::Approx(1.0).epsilon(1e-10));
        // Second moments of the normalized density are the modified-measure moments.
        CHECK(I.n == doctest::Approx(kT / (1.0 + kT)).epsilon(1e-8));
        CHECK(I.m == doctest::Approx(kT / (1.0 + kT)).epsilon(1e-8));
        CHECK(I.q == doctest::Approx(1.0 / (1.0 + kT) - std::exp(-2.0 * kT)).epsilon(1e-8));
    }
}

TEST_CASE("gauge relation C = e^{2f} B") {
    std::mt19937_64 gen(9);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const double kT : {0.5, 5.0}) {
        const ReducedPoint diag = ReducedPoint::from_cartan(2.0 * kT, {0.4, -0.2}, {0.4, -0.2});
        CHECK(gauge_relation_residual(diag, kT) <= 1e-12);
        for (int i = 0; i < 100; ++i) {
            const ReducedPoint p = ReducedPoint::from_cartan(2.0 * kT, {u(gen), u(gen)}, {u(gen), u(gen)});
            CHECK(gauge_relation_residual(p, kT) <= 1e-12);
        }
    }
}

TEST_CASE("plain-measure isometry") {
    FeynmanKacConfig cfg;
    cfg.n_paths = 20000;
    cfg.N = 500;
    cfg.dt = 2e-3;
    cfg.seed = 3;
    const auto r = feynman_kac_estimate_many(cfg, {Observable::NuSq, Observable::NuStarMuRe, Observable::One});
    // Discrete sums: κdt Σρ^{2k} and κT ρ^{N−1}.
    const double rho = std::exp(-2.0 * cfg.dt);
    const double n_exact = cfg.dt * (1.0 - std::pow(rho, 2.0 * cfg.N)) / (1.0 - rho * rho);
    const double q_exact = cfg.N * cfg.dt * std::pow(rho, cfg.N - 1);
    CHECK(std::abs(r[0].mean - n_exact) <= 3.0 * r[0].std_error);
    CHECK(std::abs(r[1].mean - q_exact) <= 3.0 * r[1].std_error);
    CHECK(r[2].mean == 1.0);
    CHECK(std::abs(n_exact - 0.2454211) <= 2e-3);
}

TEST_CASE("modified-measure moment") {
    FeynmanKacConfig cfg;
    cfg.measure = PathMeasure::Modified;
    cfg.observable = Observable::NuSq;
    cfg.n_paths = 20000;
    cfg.N = 1000;
    cfg.dt = 1e-3;
    cfg.seed = 4;
    const FeynmanKacResult r = feynman_kac_estimate(cfg);
    CHECK(std::abs(r.mean - 0.5) <= 3.0 * r.std_error + 1e-3);
    CHECK_FALSE(r.ess_collapsed);
}

TEST_CASE("exp(-2s) weight estimates the normalization N_T") {
    FeynmanKacConfig cfg;
    cfg.weight = PathWeight::ExpMinus2s;
    cfg.n_paths = 40000;
    cfg.N = 50;
    cfg.dt = 1e-2;
    cfg.seed = 6;
    const FeynmanKacResult r = feynman_kac_estimate(cfg);
    // The weight is ≥ 1 on every path; its mean is 1/det M, whose reciprocal is 1.5/e.
    CHECK(std::abs(r.mean - normalization_factor(0.5)) <= 3.0 * r.std_error + 0.01);
    CHECK(1.0 / r.mean == doctest::Approx(1.5 * std::exp(-1.0)).epsilon(0.02));
    CHECK_FALSE(r.ess_collapsed);
}

TEST_CASE("effective sample size collapse is reported") {
    FeynmanKacConfig cfg;
    cfg.weight = PathWeight::ExpMinus2s;
    cfg.n_paths = 2000;
    cfg.N = 100;
    cfg.dt = 0.08;  // κT = 8
    cfg.seed = 1;
    const FeynmanKacResult r = feynman_kac_estimate(cfg);
    CHECK(r.ess_collapsed);
    CHECK(r.diagnostic.find("effective sample size") != std::string::npos);
}

TEST_CASE("Feynman-Kac estimate is independent of the execution mode") {
    FeynmanKacConfig cfg;
    cfg.weight = PathWeight::ExpMinus2ell;
    cfg.observable = Observable::SumDiffCrossRe;
    cfg.n_paths = 500;
    cfg.N = 50;
    cfg.dt = 1e-2;
    cfg.seed = 12;
    const FeynmanKacResult a = feynman_kac_estimate(cfg, Execution::Parallel);
    const FeynmanKacResult b = feynman_kac_estimate(cfg, Execution::Serial);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
}
