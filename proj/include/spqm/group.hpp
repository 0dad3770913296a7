#pragma once

#include <array>
#include <string_view>

#include "spqm/fock.hpp"

namespace spqm {

/// Smallest ruler value accepted by the Cartan chart.
inline constexpr double kMinRuler = 1e-12;

/// \brief Harish-Chandra coordinates: x = e^{a†ν} e^{−Ho r + z} e^{a μ*}, z = −s + iψ.
struct HCCoords {
    cplx nu{0.0, 0.0};
    double r = 0.0;
    cplx z{0.0, 0.0};
    cplx mu{0.0, 0.0};

    double s() const { return -z.real(); }
    double psi() const { return z.imag(); }
    static HCCoords identity() { return {}; }
};

/// \brief Cartan coordinates: x = D_β e^{iφ} e^{−Ho r − ℓ} D_α†.
struct CartanCoords {
    cplx beta{0.0, 0.0};
    double phi = 0.0;
    double r = 0.0;
    double ell = 0.0;
    cplx alpha{0.0, 0.0};
};

/// Gauge functions relating the two centers: ℓ = s − f, φ = ψ − ξ.
struct GaugeFunctions {
    double f = 0.0;
    double xi = 0.0;
};

enum class Chart { HC, Cartan };

CartanCoords hc_to_cartan(const HCCoords& x);
HCCoords cartan_to_hc(const CartanCoords& y);

/// f, ξ from the phase points (ν, μ) of the HC chart.
GaugeFunctions gauge_functions(const HCCoords& x);
/// f, ξ from the phase points (β, α) of the Cartan chart.
GaugeFunctions gauge_functions(const CartanCoords& y);

FockOperator represent(const HCCoords& x, int dim);
FockOperator represent(const CartanCoords& y, int dim);

/// \brief Left multiplication by the one-step element; exact group recursion.
HCCoords increment_left_multiply(const HCCoords& x, cplx dw, double kappa, double dt);

/// Haar density w.r.t. the flat coordinate volume (d²β = dRe β dIm β).
double haar_density(double r, Chart chart);
double haar_density(const HCCoords& x);
double haar_density(const CartanCoords& y);

/// Real coordinate directions; complex phase points split as ν = (ν₁ + iν₂)/√2.
enum class HCDirection { Nu1, Nu2, R, S, Psi, Mu1, Mu2 };
enum class CartanDirection { Beta1, Beta2, Phi, R, Ell, Alpha1, Alpha2 };

inline constexpr std::array<HCDirection, 7> kHCDirections = {
    HCDirection::Nu1, HCDirection::Nu2, HCDirection::R,  HCDirection::S,
    HCDirection::Psi, HCDirection::Mu1, HCDirection::Mu2};
inline constexpr std::array<CartanDirection, 7> kCartanDirections = {
    CartanDirection::Beta1, CartanDirection::Beta2, CartanDirection::Phi,   CartanDirection::R,
    CartanDirection::Ell,   CartanDirection::Alpha1, CartanDirection::Alpha2};

std::string_view direction_name(HCDirection d);
std::string_view direction_name(CartanDirection d);

/// Shift one real coordinate by h.
HCCoords shifted(const HCCoords& x, HCDirection d, double h);
CartanCoords shifted(const CartanCoords& y, CartanDirection d, double h);

/// \brief Generator G with ∂_d R(x) = G R(x) (left-multiplication form, Ω = 1).
FockOperator frame_generator(const HCCoords& x, HCDirection d, int dim);
FockOperator frame_generator(const CartanCoords& y, CartanDirection d, int dim);

/// \brief ‖central difference of R along d − G·R(x)‖ / ‖R(x)‖ on the interior block.
double frame_derivative_residual(const HCCoords& x, int dim, HCDirection d, double h = 1e-5);
double frame_derivative_residual(const CartanCoords& y, int dim, CartanDirection d, double h = 1e-5);

/// Real 7-vectors in the orders of kHCDirections / kCartanDirections.
using Real7 = Eigen::Matrix<double, 7, 1>;
Real7 to_real(const HCCoords& x);
Real7 to_real(const CartanCoords& y);
HCCoords hc_from_real(const Real7& v);
CartanCoords cartan_from_real(const Real7& v);

/// Central-difference Jacobian of hc_to_cartan in real coordinates.
Eigen::Matrix<double, 7, 7> hc_to_cartan_jacobian(const HCCoords& x, double h = 1e-5);

/// \brief |det J · ρ_Cartan / ρ_HC − 1| with J the numerical Jacobian of hc_to_cartan.
double jacobian_consistency_residual(const HCCoords& x, double h = 1e-5);

}  // namespace spqm
