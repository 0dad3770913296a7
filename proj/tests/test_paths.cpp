#include <doctest.h>

#include <cmath>
#include <sstream>

#include "spqm/errors.hpp"
#include "spqm/moments.hpp"
#include "spqm/paths.hpp"

using namespace spqm;

TEST_CASE("Wiener increments have zero mean") {
    const double dt = 1e-3;
    const WienerPath p = sample_wiener(1000000, dt, 1.0, 2024);
    cplx sum{0.0, 0.0};
    double sq = 0.0;
    for (const cplx w : p.dw) {
        sum += w;
        sq += std::norm(w);
    }
    CHECK(std::abs(sum / 1e6) <= 3.0 * std::sqrt(dt / 1e6));
    CHECK(sq / 1e6 == doctest::Approx(dt).epsilon(0.01));
}

TEST_CASE("sampling is deterministic per (seed, stream)") {
    const WienerPath a = sample_wiener(100, 0.01, 1.0, 5, 3);
    const WienerPath b = sample_wiener(100, 0.01, 1.0, 5, 3);
    const WienerPath c = sample_wiener(100, 0.01, 1.0, 5, 4);
    CHECK(a.dw == b.dw);
    CHECK(a.dw != c.dw);
    CHECK(sample_modified(50, 0.01, 1.0, 5, 1).dw == sample_modified(50, 0.01, 1.0, 5, 1).dw);
}

TEST_CASE("invalid path parameters are rejected") {
    CHECK_THROWS_AS(sample_wiener(0, 0.01, 1.0, 1), ContractError);
    CHECK_THROWS_AS(sample_wiener(10, -0.01, 1.0, 1), ContractError);
}

TEST_CASE("modified sampler reduces to plain sampling at zero rate") {
    const WienerPath plain = sample_wiener(64, 0.01, 0.0, 11, 2);
    const WienerPath mod = sample_modified(64, 0.01, 0.0, 11, 2);
    REQUIRE(plain.steps() == mod.steps());
    for (int k = 0; k < plain.steps(); ++k) CHECK(std::abs(plain.dw[k] - mod.dw[k]) <= 1e-15);
}

TEST_CASE("banded and dense modified samplers share the covariance") {
    const int N = 40;
    const double dt = 0.05, kappa = 1.0;
    const Eigen::MatrixXd ref = dt * kernel_inverse(build_kernel(N, dt, kappa));
    for (const auto method : {ModifiedSampler::Method::Banded, ModifiedSampler::Method::Dense}) {
        const ModifiedSampler s(N, dt, kappa, method);
        const Eigen::MatrixXd C = sample_increment_covariance(s, 40000, 17);
        double worst = 0.0;
        for (int k = 0; k < N; ++k)
            for (int l = 0; l < N; ++l)
                worst = std::max(worst, std::abs(C(k, l) - ref(k, l)) / std::sqrt(ref(k, k) * ref(l, l)));
        CHECK(worst <= 0.05);
    }
}

TEST_CASE("modified-measure covariance matches dt M^-1 within 5%") {
    const int N = 200;
    const double dt = 0.01, kappa = 1.0;
    const Eigen::MatrixXd ref = dt * kernel_inverse(build_kernel(N, dt, kappa));
    const Eigen::MatrixXd C = sample_increment_covariance(ModifiedSampler(N, dt, kappa), 100000, 8);
    double worst = 0.0;
    for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l)
            worst = std::max(worst, std::abs(C(k, l) - ref(k, l)) / std::sqrt(ref(k, k) * ref(l, l)));
    CHECK(worst <= 0.05);
}

TEST_CASE("zero path in the HC chart") {
    WienerPath p{0.01, 1.5, std::vector<cplx>(100)};
    const Trajectory t = propagate_sde(p, Chart::HC);
    REQUIRE(t.hc.size() == 101);
    CHECK(std::abs(t.hc.back().nu) == 0.0);
    CHECK(std::abs(t.hc.back().mu) == 0.0);
    CHECK(std::abs(t.hc.back().z) == 0.0);
    CHECK(t.hc.back().r == doctest::Approx(2.0 * 1.5 * 1.0));
}

TEST_CASE("single increment closed form") {
    const WienerPath p{1e-3, 2.0, {cplx(0.01, 0.02)}};
    const HCCoords x = closed_form_hc(p);
    const cplx c = std::sqrt(2.0) * p.dw[0];
    CHECK(std::abs(x.nu - c) <= 1e-16);
    CHECK(std::abs(x.mu - c) <= 1e-16);
    CHECK(std::abs(x.z - 0.5 * std::norm(c)) <= 1e-18);
}

TEST_CASE("recursion and stochastic sums agree per path") {
    for (std::uint64_t i = 0; i < 50; ++i) {
        const WienerPath p = sample_wiener(1000, 1e-3, 1.0, 31, i);
        const HCCoords a = propagate_sde(p, Chart::HC).hc.back();
        const HCCoords b = closed_form_hc(p);
        CHECK(std::abs(a.nu - b.nu) <= 1e-10);
        CHECK(std::abs(a.mu - b.mu) <= 1e-10);
        CHECK(std::abs(a.z - b.z) <= 1e-10);
        CHECK(a.r == doctest::Approx(b.r));
    }
}

TEST_CASE("closed-form Cartan coordinates") {
    WienerPath zero{0.01, 1.0, std::vector<cplx>(100)};
    const CartanCoords y0 = closed_form_cartan(zero);
    CHECK(std::abs(y0.beta) == 0.0);
    CHECK(std::abs(y0.alpha) == 0.0);
    CHECK(y0.ell == 0.0);
    CHECK(y0.phi == 0.0);
    CHECK(y0.r == doctest::Approx(2.0));

    const WienerPath p = sample_wiener(400, 5e-3, 1.0, 77);
    const CartanCoords y = closed_form_cartan(p);
    const CartanCoords t = hc_to_cartan(closed_form_hc(p));
    CHECK(std::abs(y.beta - t.beta) + std::abs(y.alpha - t.alpha) <= 1e-10);
    CHECK(std::abs(y.ell - t.ell) <= 1e-10);
    CHECK(std::abs(std::remainder(y.phi - t.phi, 2.0 * M_PI)) <= 1e-10);
    CHECK_THROWS_AS(closed_form_cartan(WienerPath{0.01, 0.0, {cplx(0.1, 0.0)}}), SingularChartError);
}

TEST_CASE("midpoint Cartan scheme tracks beta, alpha and phi") {
    const WienerPath p = sample_wiener(2000, 1e-3, 1.0, 3);
    const Trajectory t = propagate_sde(p, Chart::Cartan, CartanScheme::Midpoint);
    REQUIRE(t.cartan.size() == 2000);
    const CartanCoords ref = hc_to_cartan(t.hc.back());
    CHECK(std::abs(t.cartan.back().beta - ref.beta) <= 1e-10);
    CHECK(std::abs(t.cartan.back().alpha - ref.alpha) <= 1e-10);
    CHECK(std::abs(std::remainder(t.cartan.back().phi - ref.phi, 2.0 * M_PI)) <= 10.0 * p.dt);
}

TEST_CASE("Cartan center converges at first order once started away from r = 0") {
    // Started at a fixed time t0 from the exact state, the center error shrinks with dt.
    const double t0 = 0.1, T = 1.0;
    const WienerPath fine = sample_wiener(4000, T / 4000, 1.0, 21);
    double prev = 0.0;
    for (const int factor : {4, 2, 1}) {
        const WienerPath p = coarsen(fine, factor);
        const int seed = static_cast<int>(std::lround(t0 / p.dt));
        const Trajectory t = propagate_cartan_from(p, seed, CartanScheme::Midpoint);
        const HCCoords& x = t.hc.back();
        const double err = std::abs(t.cartan.back().ell - (x.s() - gauge_functions(x).f));
        CAPTURE(factor);
        CAPTURE(err);
        CHECK(err <= 10.0 * p.dt);
        if (prev > 0.0) CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("Cartan propagation needs a positive ruler") {
    const WienerPath p{0.01, 0.0, std::vector<cplx>(10)};
    CHECK_THROWS_AS(propagate_sde(p, Chart::Cartan), SingularChartError);
    const WienerPath q = sample_wiener(10, 0.01, 1.0, 1);
    CHECK_THROWS_AS(propagate_cartan_from(q, 0, CartanScheme::Midpoint), SingularChartError);
}

TEST_CASE("Toeplitz center reproduces the kernel quadratic form") {
    const int N = 30;
    const double dt = 0.02, kappa = 1.2;
    const WienerPath p = sample_wiener(N, dt, kappa, 4);
    double quad = 0.0;
    for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l)
            quad += kappa * (std::conj(p.dw[k]) * p.dw[l]).real() * std::exp(-2.0 * kappa * dt * std::abs(k - l));
    CHECK(toeplitz_center(p) == doctest::Approx(-0.5 * quad).epsilon(1e-12));
    CHECK(toeplitz_center(p) <= 0.0);
}

TEST_CASE("zero path Kraus product is the ruler") {
    const double kappa = 1.0, dt = 1e-2;
    const WienerPath p{dt, kappa, std::vector<cplx>(50)};
    const FockOperator L = kraus_time_ordered(p, 12);
    for (int n = 0; n < 12; ++n)
        CHECK(L(n, n).real() == doctest::Approx(std::exp(-(n + 0.5) * 2.0 * kappa * 0.5)).epsilon(1e-12));
}

TEST_CASE("Kraus product converges to the closed form at order sqrt(dt)") {
    const int dim = 24;
    const double T = 0.5, dt = 1e-3;
    const int N = static_cast<int>(std::lround(T / dt));
    double e1 = 0.0, e4 = 0.0;
    for (std::uint64_t i = 0; i < 6; ++i) {
        const WienerPath fine = sample_wiener(N * 64, dt / 64, 1.0, 909, i);
        const FockOperator ref = represent(closed_form_hc(fine), dim);
        const double scale = interior_norm(ref);
        const double a = interior_norm(kraus_time_ordered(coarsen(fine, 64), dim) - ref) / scale;
        const double b = interior_norm(kraus_time_ordered(coarsen(fine, 16), dim) - ref) / scale;
        e1 += a * a;
        e4 += b * b;
        CHECK(a <= 0.05);
    }
    const double ratio = std::sqrt(e1 / e4);
    CAPTURE(ratio);
    CHECK(ratio >= 1.4);
    CHECK(ratio <= 2.9);
}

TEST_CASE("coarsening sums consecutive increments") {
    const WienerPath p = sample_wiener(12, 0.1, 1.0, 2);
    const WienerPath c = coarsen(p, 3);
    CHECK(c.steps() == 4);
    CHECK(c.dt == doctest::Approx(0.3));
    CHECK(std::abs(c.dw[1] - (p.dw[3] + p.dw[4] + p.dw[5])) <= 1e-16);
    CHECK_THROWS_AS(coarsen(p, 5), ContractError);
}

TEST_CASE("trajectory CSV has one row per step plus a header") {
    const WienerPath p = sample_wiener(5, 0.1, 1.0, 2);
    std::ostringstream os;
    write_trajectory_csv(os, p, propagate_sde(p, Chart::Cartan));
    std::istringstream is(os.str());
    std::string line;
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 6);
}
