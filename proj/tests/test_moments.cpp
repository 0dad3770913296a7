#include <doctest.h>

#include <cmath>

#include "spqm/errors.hpp"
#include "spqm/moments.hpp"

using namespace spqm;

TEST_CASE("kernel entries") {
    const Kernel one = build_kernel(1, 0.01, 2.0);
    CHECK(one.M(0, 0) == doctest::Approx(1.0 - 0.02));

    const Kernel k3 = build_kernel(3, 0.1, 1.0);
    CHECK(k3.M(0, 1) == doctest::Approx(-0.1 * std::exp(-0.2)));
    CHECK(k3.M(2, 1) == doctest::Approx(-0.1 * std::exp(-0.2)));
    CHECK(k3.M(0, 2) == doctest::Approx(-0.1 * std::exp(-0.4)));
    CHECK((k3.M - k3.M.transpose()).norm() == 0.0);

    const Kernel zero = build_kernel(7, 0.1, 0.0);
    CHECK((zero.M - Eigen::MatrixXd::Identity(7, 7)).norm() == 0.0);
}

TEST_CASE("kernel regime guard") {
    CHECK_THROWS_AS(build_kernel(10, 0.5, 1.0), RegimeError);
    CHECK(build_kernel(10, 0.2, 1.0).warnings.size() == 1);
    CHECK(build_kernel(10, 0.01, 1.0).warnings.empty());
}

TEST_CASE("direct moments at kT = 1, dt = 1e-3") {
    const MomentTriple t = direct_moments(build_kernel(1000, 1e-3, 1.0));
    CHECK(std::abs(t.n - 0.5) <= 5e-3);
    CHECK(std::abs(t.m - 0.5) <= 5e-3);
    CHECK(std::abs(t.q - (0.5 - std::exp(-2.0))) <= 5e-3);
    CHECK(std::abs(0.5 - std::exp(-2.0) - 0.364665) <= 1e-6);
}

TEST_CASE("direct moments converge at first order") {
    const AnalyticMoments a = analytic_moments(1.0);
    double prev = 0.0;
    for (const int N : {250, 500, 1000}) {
        const MomentTriple t = direct_moments(build_kernel(N, 1.0 / N, 1.0));
        const double err = std::abs(t.n - a.n);
        if (prev > 0.0) CHECK(prev / err == doctest::Approx(2.0).epsilon(0.1));
        prev = err;
    }
    // Single step: the moments vanish with dt.
    const MomentTriple s = direct_moments(build_kernel(1, 1e-6, 1.0));
    CHECK(s.n <= 2e-6);
}

TEST_CASE("persymmetry forces n = m") {
    const Kernel K = build_kernel(2000, 5e-4, 1.0);
    CHECK(persymmetry_defect(kernel_inverse(K)) <= 1e-12);
    const MomentTriple t = direct_moments(K);
    CHECK(std::abs(t.n - t.m) <= 1e-12);
}

TEST_CASE("recursive determinant") {
    CHECK(recursive_determinant(0, 1e-3, 1.0).front() == 1.0);
    const std::vector<double> d = recursive_determinant(1000, 1e-3, 1.0);
    REQUIRE(d.size() == 1001);
    CHECK(d.back() == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(5e-3));
    CHECK(std::abs(2.0 * std::exp(-2.0) - 0.2706706) <= 1e-7);
    const double dense = direct_determinant(build_kernel(1000, 1e-3, 1.0));
    CHECK(std::abs(d.back() / dense - 1.0) <= 1e-10);
}

TEST_CASE("each determinant step is 1 - kdt(1 + Schur load)") {
    const double dt = 2e-3, kappa = 1.0;
    const std::vector<double> d = recursive_determinant(300, dt, kappa);
    for (const int k : {1, 10, 100, 299}) {
        const double load = schur_load(build_kernel(k, dt, kappa));
        CHECK(std::abs(d[k + 1] / d[k] - (1.0 - kappa * dt * (1.0 + load))) <= 1e-8);
        // The border load differs from the ν load only by the one-step lag.
        const double n = direct_moments(build_kernel(k, dt, kappa)).n;
        CHECK(load == doctest::Approx(std::exp(-4.0 * kappa * dt) * n).epsilon(1e-10));
    }
}

TEST_CASE("load vectors") {
    const Eigen::VectorXd p = nu_load(4, 0.1, 1.0), u = mu_load(4, 0.1, 1.0), b = border_load(4, 0.1, 1.0);
    CHECK(p(3) == doctest::Approx(1.0));
    CHECK(p(0) == doctest::Approx(std::exp(-0.6)));
    CHECK(u(0) == doctest::Approx(1.0));
    CHECK(u(3) == doctest::Approx(std::exp(-0.6)));
    CHECK(b(3) == doctest::Approx(std::exp(-0.2)));
}

TEST_CASE("Riccati integration") {
    const RiccatiSolution zero = riccati_integrate(1.0, 0.0, 0);
    CHECK(zero.n.back() == 0.0);
    CHECK(zero.m.back() == 0.0);
    CHECK(zero.q.back() == 0.0);

    const RiccatiSolution one = riccati_integrate(1.0, 1.0, 1000);
    CHECK(std::abs(one.n.back() - 0.5) <= 1e-8);
    CHECK(std::abs(one.m.back() - 0.5) <= 1e-8);
    CHECK(std::abs(one.q.back() - (0.5 - std::exp(-2.0))) <= 1e-8);

    const RiccatiSolution five = riccati_integrate(2.0, 2.5, 5000);
    CHECK(std::abs(five.n.back() - 5.0 / 6.0) <= 1e-8);
    CHECK(std::abs(five.q.back() - (1.0 / 6.0 - std::exp(-10.0))) <= 1e-8);
    CHECK(std::abs(1.0 / 6.0 - std::exp(-10.0) - 0.1666213) <= 1e-7);

    CHECK_THROWS_AS(riccati_integrate(1.0, 5.0, 100), ContractError);
}

TEST_CASE("analytic moments") {
    const AnalyticMoments z = analytic_moments(0.0);
    CHECK(z.n == 0.0);
    CHECK(z.q == 0.0);
    const AnalyticMoments a = analytic_moments(1.0);
    CHECK(a.n == doctest::Approx(0.5));
    CHECK(a.q == doctest::Approx(0.364665).epsilon(1e-6));
    CHECK(a.n + a.q == doctest::Approx(a.n_plus_q));
    CHECK(a.n - a.q == doctest::Approx(a.n_minus_q));
    CHECK(analytic_determinant(1.0) == doctest::Approx(0.2706706).epsilon(1e-7));
}
