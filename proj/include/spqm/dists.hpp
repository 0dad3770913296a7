#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spqm/fock.hpp"
#include "spqm/parallel.hpp"

namespace spqm {

/// Σ_T = κT − tanh κT, the width of the β−α Gaussian.
double sigma_width(double kT);

/// dΣ/dt = κ tanh²(κt).
double sigma_rate(double kappa, double t);

/// N_T = e^{2κT}/(1+κT) = 1/det M_T.
double normalization_factor(double kT);

/// \brief A coset Zx of G/Z: ruler plus both phase-point pairs of the same element.
struct ReducedPoint {
    double r = 0.0;
    cplx beta{0.0, 0.0};
    cplx alpha{0.0, 0.0};
    cplx nu{0.0, 0.0};
    cplx mu{0.0, 0.0};

    static ReducedPoint from_cartan(double r, cplx beta, cplx alpha);
    static ReducedPoint from_hc(double r, cplx nu, cplx mu);
};

/// \brief prefactor·e^{exponent}, with the factor δ(r − 2κT) kept structural.
struct DensityValue {
    double radial_r = 0.0;  ///< the on-shell ruler value 2κT
    double prefactor = 0.0;
    double exponent = 0.0;

    double value() const;
    double log_value() const;
};

enum class PhaseVariables { HC, Cartan };

/// \brief C_T(Zx): prefactor 2/(sinh 2κT · Σ), exponent −|β−α|²/Σ.
DensityValue density_cartan_reduced(const ReducedPoint& point, double kT);

/// \brief B_T(Zx), or B̃_T = B_T/N_T when normalized, in (ν, μ) or (β, α) variables.
DensityValue density_hc_reduced(const ReducedPoint& point, double kT, bool normalized,
                                PhaseVariables vars = PhaseVariables::HC);

/// Exponent of B_T in HC variables: −a|ν+μ|² − b|ν−μ|².
struct SumDifferenceCoefficients {
    double a = 0.0;
    double b = 0.0;
};
SumDifferenceCoefficients hc_exponent_coefficients(double kT);

/// \brief |C_T − e^{2f}B_T|/C_T, evaluated in log form so it survives underflow.
double gauge_relation_residual(const ReducedPoint& point, double kT);

/// ∫ d⁵μ(Zx) B̃_T (or B_T) times 1, |ν|², |μ|², Re ν*μ.
struct ReducedIntegrals {
    double norm = 0.0;
    double n = 0.0;
    double m = 0.0;
    double q = 0.0;
};

/// \brief Tensor Gauss-Hermite over Re/Im of ν+μ and ν−μ, d⁵μ = e^{2r} d²ν d²μ/(2π)².
ReducedIntegrals integrate_reduced_hc(double kT, bool normalized, int nodes = 40);

enum class PathMeasure { Plain, Modified };
enum class PathWeight { None, ExpMinus2s, ExpMinus2ell };
enum class Observable { One, NuSq, MuSq, NuStarMuRe, SumDiffCrossRe, SumDiffCrossIm };

struct FeynmanKacConfig {
    PathMeasure measure = PathMeasure::Plain;
    PathWeight weight = PathWeight::None;
    Observable observable = Observable::One;
    int n_paths = 1000;
    int N = 100;
    double dt = 1e-2;
    double kappa = 1.0;
    std::uint64_t seed = 0;
    /// ESS below max(100, fraction·n_paths) is reported as a collapse.
    double ess_floor_fraction = 0.01;
};

struct FeynmanKacResult {
    double mean = 0.0;
    double std_error = 0.0;
    double ess = 0.0;         ///< Σw / max w
    double max_weight = 0.0;
    bool ess_collapsed = false;
    int n_paths = 0;
    std::string diagnostic;
};

/// \brief Mean ± standard error of weight·observable over independent path substreams.
FeynmanKacResult feynman_kac_estimate(const FeynmanKacConfig& cfg, Execution exec = Execution::Parallel);

/// Several observables from one pass over the same paths (cfg.observable is ignored).
std::vector<FeynmanKacResult> feynman_kac_estimate_many(const FeynmanKacConfig& cfg,
                                                        const std::vector<Observable>& observables,
                                                        Execution exec = Execution::Parallel);

std::string to_string(PathWeight w);
std::string to_string(Observable o);
std::string to_string(PathMeasure m);

}  // namespace spqm
