#include <doctest.h>

#include <cmath>

#include "spqm/errors.hpp"
#include "spqm/povm.hpp"

using namespace spqm;

TEST_CASE("partition function identity") {
    const PartitionCheck a = partition_function_check(0.5, 60);
    CHECK(a.trace == doctest::Approx(0.4254590).epsilon(1e-7));
    CHECK(a.residual <= 1e-10);
    CHECK_FALSE(a.truncation_warning);
    CHECK(partition_function_check(1.0, 40).residual <= 1e-12);
    CHECK(partition_function_check(2.0, 60).residual <= 1e-10);

    const PartitionCheck big = partition_function_check(3.0, 20);
    CHECK(big.trace == doctest::Approx(std::exp(-6.0)).epsilon(1e-5));

    const PartitionCheck small = partition_function_check(0.1, 20);
    CHECK(small.truncation_warning);
}

TEST_CASE("completeness on the interior block") {
    const CompletenessResult c = completeness_quadrature(1.0, 16, 32, 64);
    CHECK(c.deviation <= 1e-3);
    CHECK(c.grid_converged);
}

TEST_CASE("completeness at late times is the coherent-state resolution") {
    const int dim = 16;
    const CompletenessResult c = completeness_quadrature(4.0, dim, 32, 64);
    CHECK(c.deviation <= 1e-3);
    // e^{κT}D_α e^{−2κT Ho}... collapses to |α⟩⟨α|: the integrand is ≈ e^{−2kT}|α⟩⟨α|·2 sinh 2kT.
    const double kT = 4.0;
    CHECK(2.0 * std::sinh(2.0 * kT) * std::exp(-2.0 * kT) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("beta marginal integrates to one") {
    for (const double kT : {0.2, 1.0, 3.0})
        CHECK(beta_marginal_weight(kT, cplx(0.7, -1.1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("channel at zero time is the identity") {
    CMatrix rho = CMatrix::Zero(6, 6);
    rho(0, 0) = 0.6;
    rho(1, 1) = 0.4;
    rho(0, 1) = rho(1, 0) = 0.2;
    CHECK((channel_reference(rho, 0.0) - rho).norm() <= 1e-15);
    const ChannelReport r = channel_monte_carlo(rho, 0.0, 10, 1e-3, 6, 1);
    CHECK(r.channel_distance <= 1e-15);
}

TEST_CASE("channel reference is trace preserving and positive") {
    CMatrix rho = CMatrix::Zero(10, 10);
    rho(0, 0) = 1.0;
    const CMatrix out = channel_reference(rho, 0.3);
    CHECK(out.trace().real() == doctest::Approx(1.0).epsilon(1e-3));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (out + out.adjoint()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("channel Monte Carlo on the vacuum") {
    CMatrix rho = CMatrix::Zero(8, 8);
    rho(0, 0) = 1.0;
    const ChannelReport r = channel_monte_carlo(rho, 0.3, 4000, 1e-3, 8, 42);
    CHECK(r.channel_distance <= 0.04);
    CHECK(std::abs(r.trace_mean - 1.0) <= 3.0 * r.trace_std_error);
    CHECK(r.leakage <= kLeakageLimit);
}

TEST_CASE("channel Monte Carlo flags truncation") {
    CMatrix rho = CMatrix::Zero(4, 4);
    rho(3, 3) = 1.0;
    CHECK_THROWS_AS(channel_monte_carlo(rho, 0.3, 50, 1e-2, 4, 1), TruncationError);
}

TEST_CASE("channel Monte Carlo rejects bad input") {
    CMatrix rho = CMatrix::Zero(4, 4);
    rho(0, 0) = 0.5;
    CHECK_THROWS_AS(channel_monte_carlo(rho, 0.3, 50, 1e-2, 4, 1), ContractError);
    rho(0, 0) = 1.0;
    CHECK_THROWS_AS(channel_monte_carlo(rho, 0.3, 50, 1e-2, 5, 1), InvalidDimension);
    CHECK_THROWS_AS(channel_monte_carlo(rho, 0.305, 50, 1e-2, 4, 1), ContractError);
}

TEST_CASE("late-time coherent collapse") {
    for (const double kT : {1.0, 3.0})
        CHECK(late_time_coherent_residual(kT, {0, 0}, {0, 0}, 20) == doctest::Approx(std::exp(-2.0 * kT)).epsilon(1e-10));
    CHECK(late_time_coherent_residual(6.0, {0.5, 0.2}, {-0.3, 0.1}, 30) <= 1e-4);
}

TEST_CASE("trace distance") {
    CMatrix a = CMatrix::Zero(2, 2), b = CMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    b(1, 1) = 1.0;
    CHECK(trace_distance(a, b) == doctest::Approx(1.0));
    CHECK(trace_distance(a, a) == 0.0);
}
