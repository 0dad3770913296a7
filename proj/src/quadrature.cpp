#include "spqm/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "spqm/errors.hpp"

namespace spqm {

namespace {

// Eigenvalues of the symmetric Jacobi matrix are the nodes; weights are μ₀·v₀².
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, double mu0) {
    const Eigen::Index n = diag.size();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    J.diagonal() = diag;
    for (Eigen::Index k = 0; k + 1 < n; ++k) J(k, k + 1) = J(k + 1, k) = off(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) {
        rule.nodes[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
        const double v0 = es.eigenvectors()(0, k);
        rule.weights[static_cast<std::size_t>(k)] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
    if (n < 1) throw ContractError("gauss_hermite: need n >= 1");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), off(n > 1 ? n - 1 : 0);
    for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(0.5 * k);
    return golub_welsch(diag, off, std::sqrt(std::numbers::pi));
}

QuadratureRule gauss_laguerre(int n) {
    if (n < 1) throw ContractError("gauss_laguerre: need n >= 1");
    Eigen::VectorXd diag(n), off(n > 1 ? n - 1 : 0);
    for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0;
    for (int k = 1; k < n; ++k) off(k - 1) = k;
    return golub_welsch(diag, off, 1.0);
}

}  // namespace spqm
