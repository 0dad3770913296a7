#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace spqm {

/// \brief M_kl = δ_kl − κdt·e^{−2κdt|k−l|}: real, symmetric, Toeplitz, persymmetric.
struct Kernel {
    int N = 0;
    double dt = 0.0;
    double kappa = 0.0;
    Eigen::MatrixXd M;
    std::vector<std::string> warnings;
};

/// Second moments ⟨|ν|²⟩, ⟨|μ|²⟩, ⟨ν*μ⟩ under the normalized modified measure.
struct MomentTriple {
    double n = 0.0;
    double m = 0.0;
    double q = 0.0;
};

/// Continuum closed forms plus the sum/difference variances.
struct AnalyticMoments {
    double n = 0.0;
    double m = 0.0;
    double q = 0.0;
    double n_plus_q = 0.0;
    double n_minus_q = 0.0;
};

/// Upper bound on κdt accepted by build_kernel, and the level above which it warns.
inline constexpr double kKernelGuard = 0.5;
inline constexpr double kKernelWarn = 0.1;

Kernel build_kernel(int N, double dt, double kappa);

/// Weight of dw_k in ν_N: e^{−2κdt(N−1−k)} (lag of the exact one-step recursion).
Eigen::VectorXd nu_load(int N, double dt, double kappa);
/// Weight of dw_k in μ_N: e^{−2κdt·k}.
Eigen::VectorXd mu_load(int N, double dt, double kappa);
/// Border column of M_{N+1}, divided by −κdt: e^{−2κdt(N−k)}.
Eigen::VectorXd border_load(int N, double dt, double kappa);

/// \brief n = κdt⟨p|M⁻¹|p⟩, m = κdt⟨u|M⁻¹|u⟩, q = κdt⟨p|M⁻¹|u⟩ via one Cholesky factor.
MomentTriple direct_moments(const Kernel& kernel);

/// κdt⟨b|M⁻¹|b⟩ with b = border_load; the exact Schur load of the next step.
double schur_load(const Kernel& kernel);

/// det M from the Cholesky factor.
double direct_determinant(const Kernel& kernel);

/// \brief det M_k for k = 0..N, grown one border row at a time (Schur complement).
std::vector<double> recursive_determinant(int N, double dt, double kappa);

/// Explicit inverse, for persymmetry diagnostics only.
Eigen::MatrixXd kernel_inverse(const Kernel& kernel);

/// max_kl |(M⁻¹)_kl − (M⁻¹)_{N−1−l,N−1−k}|.
double persymmetry_defect(const Eigen::MatrixXd& Minv);

struct RiccatiSolution {
    std::vector<double> t;
    std::vector<double> n;
    std::vector<double> m;
    std::vector<double> q;
};

/// Minimum RK4 steps per unit κT.
inline constexpr int kRiccatiMinStepsPerUnit = 100;

/// \brief Classical RK4 for dn = κ(1−n)², dm = κ(q+e^{−2κT})², dq = κ(−q(1−n)+e^{−2κT}(1+n)).
RiccatiSolution riccati_integrate(double kappa, double T, int steps);

AnalyticMoments analytic_moments(double kT);

/// Closed form det M_T = e^{−2κT}(1+κT).
double analytic_determinant(double kT);

}  // namespace spqm
