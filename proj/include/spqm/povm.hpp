#pragma once

#include <cstdint>
#include <string>

#include "spqm/fock.hpp"
#include "spqm/parallel.hpp"

namespace spqm {

struct PartitionCheck {
    double trace = 0.0;        ///< Σ_{n<dim} e^{−(n+½)4κT}
    double closed_form = 0.0;  ///< 1/(2 sinh 2κT)
    double residual = 0.0;     ///< |trace·2 sinh 2κT − 1|
    bool truncation_warning = false;
    std::string warning;
};

/// \brief tr e^{−4κT Ho} in the truncated space against the geometric-series closed form.
PartitionCheck partition_function_check(double kT, int dim);

struct CompletenessResult {
    double deviation = 0.0;          ///< ‖S − 1‖ on the top ⌈dim/2⌉ block
    double refined_deviation = 0.0;  ///< same with twice the radial nodes
    double schur_deviation = 0.0;    ///< ‖S − 2 sinh(2κT)·tr_dim(e^{−4κT Ho})·1‖ on the block
    bool grid_converged = true;
    int radial_nodes = 0;
    int angular_nodes = 0;
};

/// \brief 2 sinh(2κT)∫ d²α/π D_α e^{−4κT Ho} D_α† on a Gauss-Laguerre (|α|²) × uniform angle grid.
///
/// D_α enters through its exact top-left block (displacement_block), with e^{−4κT Ho}
/// truncated at dim, so the integrand is a polynomial times e^{−|α|²}.
CompletenessResult completeness_quadrature(double kT, int dim, int radial_nodes, int angular_nodes);

/// Same integral with only the quadrature sum, no refinement pass.
CMatrix completeness_operator(double kT, int dim, int radial_nodes, int angular_nodes);

/// \brief ∫ d²β/(πΣ) e^{−|β−α|²/Σ} by Gauss-Hermite; equals 1 for every α.
double beta_marginal_weight(double kT, cplx alpha, int nodes = 40);

struct ChannelReport {
    int dim = 0;
    double kT = 0.0;
    double kappa = 1.0;
    double dt = 0.0;
    int n_paths = 0;
    std::uint64_t seed = 0;
    double channel_distance = 0.0;  ///< trace distance, MC average vs analytic Z_T
    double trace_mean = 0.0;        ///< mean of tr(LρL†)
    double trace_std_error = 0.0;
    double trace_deviation = 0.0;   ///< |trace_mean − 1|
    double leakage = 0.0;           ///< population of the two highest levels in the MC output
};

/// Boundary population above which channel_monte_carlo reports a truncation error.
inline constexpr double kLeakageLimit = 1e-3;

/// \brief Z_T ρ = exp(−½κT(ad_Q² + ad_P²)) ρ via a dense exponential on the dim²-dimensional space.
CMatrix channel_reference(const CMatrix& rho, double kT);

/// \brief Average of LρL† over time-ordered Kraus products, compared with channel_reference.
ChannelReport channel_monte_carlo(const CMatrix& rho, double kT, int n_paths, double dt, int dim,
                                  std::uint64_t seed, double kappa = 1.0, Execution exec = Execution::Parallel);

/// ½‖A − B‖₁ for Hermitian A, B.
double trace_distance(const CMatrix& A, const CMatrix& B);

/// \brief ‖e^{κT} D_β e^{−2κT Ho} D_α† − |β⟩⟨α|‖ (operator norm).
double late_time_coherent_residual(double kT, cplx beta, cplx alpha, int dim);

}  // namespace spqm
