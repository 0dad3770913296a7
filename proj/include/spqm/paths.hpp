#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "spqm/fock.hpp"
#include "spqm/group.hpp"
#include "spqm/parallel.hpp"
#include "spqm/rng.hpp"

namespace spqm {

/// \brief Time step, rate, and the ordered complex outcome increments dw_k.
struct WienerPath {
    double dt = 0.0;
    double kappa = 0.0;
    std::vector<cplx> dw;

    int steps() const { return static_cast<int>(dw.size()); }
    double duration() const { return dt * static_cast<double>(dw.size()); }
};

/// \brief Sample path of coordinates; hc[0] is the identity, cartan defined for t > 0.
struct Trajectory {
    std::vector<double> times;
    std::vector<HCCoords> hc;
    std::vector<CartanCoords> cartan;  ///< cartan[k] belongs to times[k + 1]
};

/// Integration scheme for the Cartan chart.
enum class CartanScheme {
    ItoEuler,  ///< Forward Itô-Euler steps of the Cartan SDEs.
    Midpoint,  ///< Exact linear forms for β, α; midpoint (Stratonovich) one-forms for ℓ, φ.
};

WienerPath sample_wiener(int N, double dt, double kappa, std::uint64_t seed, std::uint64_t stream = 0);

/// Fill a path with plain-measure increments drawn from rng.
void fill_wiener(WienerPath& path, PathRng& rng);

/// \brief Draws increments with ⟨dw_k* dw_l⟩ = dt (M⁻¹)_kl for the kernel M.
///
/// The banded method uses M⁻¹ = I + c(K⁻¹ − cI)⁻¹ with K_kl = ρ^{|k−l|}, whose
/// inverse is tridiagonal, so a draw costs O(N). The dense method solves with the
/// Cholesky factor of M and is kept as the reference.
class ModifiedSampler {
public:
    enum class Method { Banded, Dense };

    ModifiedSampler(int N, double dt, double kappa, Method method = Method::Banded);

    void draw(WienerPath& path, PathRng& rng) const;

    int steps() const { return N_; }

private:
    int N_;
    double dt_;
    double kappa_;
    Method method_;
    // Banded: Cholesky of the tridiagonal B = K⁻¹ − cI (diagonal d_, subdiagonal e_).
    Eigen::VectorXd d_, e_;
    // Dense: Cholesky factor of M.
    Eigen::MatrixXd L_;
};

WienerPath sample_modified(int N, double dt, double kappa, std::uint64_t seed, std::uint64_t stream = 0,
                           ModifiedSampler::Method method = ModifiedSampler::Method::Banded);

/// \brief Integrate one path. HC uses the exact recursion; Cartan is seeded at t₁ = dt
/// from the exact one-step HC state.
Trajectory propagate_sde(const WienerPath& path, Chart chart, CartanScheme scheme = CartanScheme::Midpoint);

/// Same, with the Cartan integration started at step `seed_step` ≥ 1 from the exact HC state.
Trajectory propagate_cartan_from(const WienerPath& path, int seed_step, CartanScheme scheme);

/// \brief Weights of the stochastic-integral sums at fixed (N, dt, κ).
struct ClosedFormTables {
    ClosedFormTables(int N, double dt, double kappa);

    int N;
    double dt;
    double kappa;
    std::vector<double> nu_w;  ///< e^{−2κdt(N−1−k)}
    std::vector<double> mu_w;  ///< e^{−2κdt·k}
    std::vector<double> down;  ///< e^{−2κdt(k−1)}
    std::vector<double> up;    ///< e^{+2κdt·k}
};

/// \brief Stochastic-integral sums for (ν, r, z, μ), evaluated term by term.
///
/// ν = Σ√κ dw_k e^{−2κdt(N−1−k)}, μ = Σ√κ dw_k e^{−2κdt k},
/// z = ½Σκ|dw_k|² + Σ_{k>l} κ dw_k* dw_l e^{−2κdt(k−1−l)}.
HCCoords closed_form_hc(const WienerPath& path);
HCCoords closed_form_hc(const WienerPath& path, const ClosedFormTables& tables);

/// \brief Discrete-time sums for β, α; center from ℓ = s − f, φ = ψ − ξ.
CartanCoords closed_form_cartan(const WienerPath& path);

/// \brief Center normalization s̃ with −2s̃ = Σ_kl κ dw_k* dw_l e^{−2κdt|k−l|}.
///
/// This is the quadratic form that defines M, so E[e^{−2s̃}] = 1/det M exactly under
/// the plain measure. It differs from the s of closed_form_hc only by the one-step
/// lag of the off-diagonal weights.
double toeplitz_center(const WienerPath& path);

/// \brief Monte Carlo estimate of Re⟨dw_k* dw_l⟩ from n_paths sampler draws.
Eigen::MatrixXd sample_increment_covariance(const ModifiedSampler& sampler, int n_paths, std::uint64_t seed,
                                            Execution exec = Execution::Parallel);

/// \brief Ordered product of exp(−2κdt Ho + √κ(a dw* + a† dw)), latest step leftmost.
FockOperator kraus_time_ordered(const WienerPath& path, int dim);

/// Sum consecutive groups of `factor` increments (same Brownian path, coarser dt).
WienerPath coarsen(const WienerPath& fine, int factor);

/// CSV rows: k, t, Re dw, Im dw, then HC (and Cartan if present) coordinates at t_{k+1}.
void write_trajectory_csv(std::ostream& os, const WienerPath& path, const Trajectory& traj);

}  // namespace spqm
