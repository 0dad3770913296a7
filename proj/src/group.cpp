#include "spqm/group.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "spqm/errors.hpp"

namespace spqm {

namespace {

constexpr cplx kI{0.0, 1.0};
const double kSqrt2 = std::numbers::sqrt2;

void require_chart(double r, const char* where) {
    if (!(r > kMinRuler))
        throw SingularChartError(std::string(where) + ": Cartan chart is singular at r = 0 (r = " +
                                 std::to_string(r) + ")");
}

// 1 − e^{−2r}, accurate for small r.
double one_minus_e2r(double r) { return -std::expm1(-2.0 * r); }

FockOperator identity(int dim) { return FockOperator::Identity(dim, dim); }

FockOperator center_ruler_factor(int dim, double r, cplx center) {
    FockOperator D = FockOperator::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) D(n, n) = std::exp(-r * (n + 0.5) + center);
    return D;
}

}  // namespace

CartanCoords hc_to_cartan(const HCCoords& x) {
    require_chart(x.r, "hc_to_cartan");
    const double er = std::exp(-x.r);
    const double den = one_minus_e2r(x.r);
    CartanCoords y;
    y.r = x.r;
    y.beta = (x.nu + er * x.mu) / den;
    y.alpha = (x.mu + er * x.nu) / den;
    const auto g = gauge_functions(x);
    y.ell = x.s() - g.f;
    y.phi = x.psi() - g.xi;
    return y;
}

HCCoords cartan_to_hc(const CartanCoords& y) {
    require_chart(y.r, "cartan_to_hc");
    const double er = std::exp(-y.r);
    HCCoords x;
    x.r = y.r;
    x.nu = y.beta - er * y.alpha;
    x.mu = y.alpha - er * y.beta;
    const auto g = gauge_functions(y);
    x.z = cplx(-(y.ell + g.f), y.phi + g.xi);
    return x;
}

GaugeFunctions gauge_functions(const HCCoords& x) {
    require_chart(x.r, "gauge_functions");
    const double er = std::exp(-x.r);
    const double den = one_minus_e2r(x.r);
    const cplx numu = std::conj(x.nu) * x.mu;
    GaugeFunctions g;
    g.f = (std::norm(x.nu) + std::norm(x.mu) + 2.0 * er * numu.real()) / (2.0 * den);
    g.xi = er * numu.imag() / den;
    return g;
}

GaugeFunctions gauge_functions(const CartanCoords& y) {
    require_chart(y.r, "gauge_functions");
    const double er = std::exp(-y.r);
    const cplx ba = std::conj(y.beta) * y.alpha;
    GaugeFunctions g;
    g.f = 0.5 * (std::norm(y.beta) + std::norm(y.alpha) - 2.0 * er * ba.real());
    g.xi = er * ba.imag();
    return g;
}

FockOperator represent(const HCCoords& x, int dim) {
    const auto ops = canonical_operators(dim);
    return matrix_exponential(x.nu * ops.a_dag) * center_ruler_factor(dim, x.r, x.z) *
           matrix_exponential(std::conj(x.mu) * ops.a);
}

FockOperator represent(const CartanCoords& y, int dim) {
    require_chart(y.r, "represent");
    return displacement_operator(dim, y.beta) * center_ruler_factor(dim, y.r, cplx(-y.ell, y.phi)) *
           displacement_operator(dim, y.alpha).adjoint();
}

HCCoords increment_left_multiply(const HCCoords& x, cplx dw, double kappa, double dt) {
    const cplx kick = std::sqrt(kappa) * dw;
    HCCoords out;
    out.z = x.z + 0.5 * kappa * std::norm(dw) + x.nu * std::conj(kick);
    out.mu = x.mu + std::exp(-x.r) * kick;
    out.nu = std::exp(-2.0 * kappa * dt) * x.nu + kick;
    out.r = x.r + 2.0 * kappa * dt;
    return out;
}

double haar_density(double r, Chart chart) {
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    if (chart == Chart::HC) return std::exp(2.0 * r) / (4.0 * pi2);
    require_chart(r, "haar_density");
    const double sh = std::sinh(r);
    return sh * sh / pi2;
}

double haar_density(const HCCoords& x) { return haar_density(x.r, Chart::HC); }
double haar_density(const CartanCoords& y) { return haar_density(y.r, Chart::Cartan); }

std::string_view direction_name(HCDirection d) {
    switch (d) {
        case HCDirection::Nu1: return "nu1";
        case HCDirection::Nu2: return "nu2";
        case HCDirection::R: return "r";
        case HCDirection::S: return "s";
        case HCDirection::Psi: return "psi";
        case HCDirection::Mu1: return "mu1";
        case HCDirection::Mu2: return "mu2";
    }
    return "?";
}

std::string_view direction_name(CartanDirection d) {
    switch (d) {
        case CartanDirection::Beta1: return "beta1";
        case CartanDirection::Beta2: return "beta2";
        case CartanDirection::Phi: return "phi";
        case CartanDirection::R: return "r";
        case CartanDirection::Ell: return "ell";
        case CartanDirection::Alpha1: return "alpha1";
        case CartanDirection::Alpha2: return "alpha2";
    }
    return "?";
}

Real7 to_real(const HCCoords& x) {
    Real7 v;
    v << kSqrt2 * x.nu.real(), kSqrt2 * x.nu.imag(), x.r, x.s(), x.psi(), kSqrt2 * x.mu.real(),
        kSqrt2 * x.mu.imag();
    return v;
}

Real7 to_real(const CartanCoords& y) {
    Real7 v;
    v << kSqrt2 * y.beta.real(), kSqrt2 * y.beta.imag(), y.phi, y.r, y.ell, kSqrt2 * y.alpha.real(),
        kSqrt2 * y.alpha.imag();
    return v;
}

HCCoords hc_from_real(const Real7& v) {
    HCCoords x;
    x.nu = cplx(v(0), v(1)) / kSqrt2;
    x.r = v(2);
    x.z = cplx(-v(3), v(4));
    x.mu = cplx(v(5), v(6)) / kSqrt2;
    return x;
}

CartanCoords cartan_from_real(const Real7& v) {
    CartanCoords y;
    y.beta = cplx(v(0), v(1)) / kSqrt2;
    y.phi = v(2);
    y.r = v(3);
    y.ell = v(4);
    y.alpha = cplx(v(5), v(6)) / kSqrt2;
    return y;
}

HCCoords shifted(const HCCoords& x, HCDirection d, double h) {
    Real7 v = to_real(x);
    v(static_cast<int>(d)) += h;
    return hc_from_real(v);
}

CartanCoords shifted(const CartanCoords& y, CartanDirection d, double h) {
    Real7 v = to_real(y);
    v(static_cast<int>(d)) += h;
    return cartan_from_real(v);
}

FockOperator frame_generator(const HCCoords& x, HCDirection d, int dim) {
    const auto ops = canonical_operators(dim);
    const FockOperator I = identity(dim);
    const double er = std::exp(x.r);
    switch (d) {
        case HCDirection::Nu1: return ops.a_dag / kSqrt2;
        case HCDirection::Nu2: return kI * ops.a_dag / kSqrt2;
        case HCDirection::R: return -(ops.Ho - x.nu * ops.a_dag);
        case HCDirection::S: return -I;
        case HCDirection::Psi: return kI * I;
        case HCDirection::Mu1: return er * (ops.a - x.nu * I) / kSqrt2;
        case HCDirection::Mu2: return -kI * er * (ops.a - x.nu * I) / kSqrt2;
    }
    return I;
}

FockOperator frame_generator(const CartanCoords& y, CartanDirection d, int dim) {
    require_chart(y.r, "frame_generator");
    const auto ops = canonical_operators(dim);
    const FockOperator I = identity(dim);
    const Real7 v = to_real(y);
    const double b1 = v(0), b2 = v(1), a1 = v(5), a2 = v(6);
    const double ch = std::cosh(y.r), sh = std::sinh(y.r);
    switch (d) {
        case CartanDirection::Beta1: return -kI * ops.P + 0.5 * b2 * kI * I;
        case CartanDirection::Beta2: return kI * ops.Q - 0.5 * b1 * kI * I;
        case CartanDirection::Phi: return kI * I;
        case CartanDirection::Ell: return -I;
        case CartanDirection::R:
            return -(ops.Ho - b1 * ops.Q - b2 * ops.P + 0.5 * (b1 * b1 + b2 * b2) * I);
        case CartanDirection::Alpha1:
            return ch * kI * ops.P + sh * ops.Q - b1 * sh * I - (b2 * ch - 0.5 * a2) * kI * I;
        case CartanDirection::Alpha2:
            return -ch * kI * ops.Q + sh * ops.P - b2 * sh * I + (b1 * ch - 0.5 * a1) * kI * I;
    }
    return I;
}

namespace {

template <class Coords, class Dir>
double frame_residual_impl(const Coords& x, int dim, Dir d, double h) {
    const FockOperator R = represent(x, dim);
    const FockOperator fd = (represent(shifted(x, d, h), dim) - represent(shifted(x, d, -h), dim)) / (2.0 * h);
    const FockOperator analytic = frame_generator(x, d, dim) * R;
    return interior_norm(fd - analytic) / interior_norm(R);
}

}  // namespace

double frame_derivative_residual(const HCCoords& x, int dim, HCDirection d, double h) {
    return frame_residual_impl(x, dim, d, h);
}

double frame_derivative_residual(const CartanCoords& y, int dim, CartanDirection d, double h) {
    require_chart(y.r - h, "frame_derivative_residual");
    return frame_residual_impl(y, dim, d, h);
}

Eigen::Matrix<double, 7, 7> hc_to_cartan_jacobian(const HCCoords& x, double h) {
    require_chart(x.r - h, "hc_to_cartan_jacobian");
    Eigen::Matrix<double, 7, 7> J;
    const Real7 v = to_real(x);
    for (int j = 0; j < 7; ++j) {
        Real7 vp = v, vm = v;
        vp(j) += h;
        vm(j) -= h;
        J.col(j) = (to_real(hc_to_cartan(hc_from_real(vp))) - to_real(hc_to_cartan(hc_from_real(vm)))) / (2.0 * h);
    }
    return J;
}

double jacobian_consistency_residual(const HCCoords& x, double h) {
    const double det = std::abs(hc_to_cartan_jacobian(x, h).determinant());
    return std::abs(det * haar_density(x.r, Chart::Cartan) / haar_density(x.r, Chart::HC) - 1.0);
}

}  // namespace spqm
