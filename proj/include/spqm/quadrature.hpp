#pragma once

#include <vector>

namespace spqm {

/// Nodes and weights of an n-point Gauss rule.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// ∫ e^{−x²} g(x) dx over ℝ (Golub-Welsch).
QuadratureRule gauss_hermite(int n);

/// ∫ e^{−x} g(x) dx over [0, ∞) (Golub-Welsch).
QuadratureRule gauss_laguerre(int n);

}  // namespace spqm
