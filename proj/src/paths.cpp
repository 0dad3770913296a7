#include "spqm/paths.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "spqm/errors.hpp"
#include "spqm/moments.hpp"

namespace spqm {

namespace {

void require_path(int N, double dt, double kappa) {
    if (N < 1) throw ContractError("paths: need N >= 1");
    if (!(dt > 0.0) || !(kappa >= 0.0)) throw ContractError("paths: need dt > 0 and kappa >= 0");
}

CartanCoords cartan_ito_euler_step(const CartanCoords& y, cplx dw, double kappa, double dt) {
    const double r = y.r;
    const double cs = 1.0 / std::sinh(r);
    const double ct = 1.0 / std::tanh(r);
    const cplx c = std::sqrt(kappa) * dw;
    const cplx b = y.beta, a = y.alpha;

    const cplx dalpha = cs * (-2.0 * kappa * b * dt + c);
    const cplx dbeta = std::cosh(r) * dalpha;
    const double minus_dell = ct * kappa * std::norm(dw) - 2.0 * std::norm(b) * kappa * dt +
                              2.0 * (b * std::conj(c)).real();
    const cplx i_dphi = cs * (a * std::conj(b) - std::conj(a) * b) * kappa * dt +
                        0.5 * (b * ct - a * cs) * std::conj(c) -
                        0.5 * (std::conj(b) * ct - std::conj(a) * cs) * c;

    CartanCoords out = y;
    out.alpha += dalpha;
    out.beta += dbeta;
    out.ell -= minus_dell;
    out.phi += i_dphi.imag();
    out.r += 2.0 * kappa * dt;
    return out;
}

CartanCoords cartan_midpoint_step(const CartanCoords& y, cplx dw, double kappa, double dt) {
    const cplx c = std::sqrt(kappa) * dw;
    const double r0 = y.r, r1 = y.r + 2.0 * kappa * dt;
    // β e^{r} − α and α − β e^{−r} obey linear SDEs with exact one-step solutions.
    const double e0 = std::exp(-r0), e1 = std::exp(-r1);
    const cplx nu0 = y.beta - e0 * y.alpha;
    const cplx mu0 = y.alpha - e0 * y.beta;
    const cplx nu1 = std::exp(-2.0 * kappa * dt) * nu0 + c;
    const cplx mu1 = mu0 + e0 * c;
    const double den = -std::expm1(-2.0 * r1);

    CartanCoords out;
    out.r = r1;
    out.beta = (nu1 + e1 * mu1) / den;
    out.alpha = (mu1 + e1 * nu1) / den;

    const cplx bm = 0.5 * (y.beta + out.beta);
    const cplx am = 0.5 * (y.alpha + out.alpha);
    const cplx db = out.beta - y.beta;
    const cplx da = out.alpha - y.alpha;
    const double rm = 0.5 * (r0 + r1);
    const double dr = r1 - r0;

    const double minus_dell = std::norm(bm) * dr + std::sinh(rm) * 2.0 * (bm * std::conj(da)).real();
    const double dphi = (std::conj(bm) * db).imag() + (std::conj(am) * da).imag() +
                        2.0 * std::cosh(rm) * (bm * std::conj(da)).imag();
    out.ell = y.ell - minus_dell;
    out.phi = y.phi + dphi;
    return out;
}

}  // namespace

void fill_wiener(WienerPath& path, PathRng& rng) {
    for (auto& w : path.dw) w = rng.wiener_increment(path.dt);
}

WienerPath sample_wiener(int N, double dt, double kappa, std::uint64_t seed, std::uint64_t stream) {
    require_path(N, dt, kappa);
    WienerPath path{dt, kappa, std::vector<cplx>(static_cast<std::size_t>(N))};
    PathRng rng(seed, stream);
    fill_wiener(path, rng);
    return path;
}

ModifiedSampler::ModifiedSampler(int N, double dt, double kappa, Method method)
    : N_(N), dt_(dt), kappa_(kappa), method_(method) {
    require_path(N, dt, kappa);
    const Kernel kernel = build_kernel(method == Method::Dense ? N : 0, dt, kappa);
    const double c = kappa * dt;
    if (method == Method::Dense) {
        Eigen::LLT<Eigen::MatrixXd> llt(kernel.M);
        if (llt.info() != Eigen::Success) throw NumericalDomainError("ModifiedSampler: M not positive definite");
        L_ = llt.matrixL();
        return;
    }
    if (c == 0.0) return;
    // B = K⁻¹ − cI, K⁻¹ = tridiag(−ρ; 1, 1+ρ², …, 1+ρ², 1; −ρ)/(1−ρ²).
    const double rho = std::exp(-2.0 * c);
    const double g = 1.0 / (-std::expm1(-4.0 * c));
    Eigen::VectorXd diag(N), sub(N);
    sub.setZero();
    if (N == 1) {
        diag(0) = 1.0 - c;
    } else {
        for (int i = 0; i < N; ++i) diag(i) = ((i == 0 || i == N - 1) ? 1.0 : 1.0 + rho * rho) * g - c;
        for (int i = 1; i < N; ++i) sub(i) = -rho * g;
    }
    d_.resize(N);
    e_.setZero(N);
    for (int i = 0; i < N; ++i) {
        double piv = diag(i);
        if (i > 0) {
            e_(i) = sub(i) / d_(i - 1);
            piv -= e_(i) * e_(i);
        }
        if (!(piv > 0.0)) throw NumericalDomainError("ModifiedSampler: banded factor not positive definite");
        d_(i) = std::sqrt(piv);
    }
}

void ModifiedSampler::draw(WienerPath& path, PathRng& rng) const {
    path.dt = dt_;
    path.kappa = kappa_;
    path.dw.resize(static_cast<std::size_t>(N_));
    const double c = kappa_ * dt_;
    const double scale = std::sqrt(0.5 * dt_);
    Eigen::VectorXd xr(N_), xi(N_);
    for (int k = 0; k < N_; ++k) {
        xr(k) = rng.normal();
        xi(k) = rng.normal();
    }
    if (method_ == Method::Dense) {
        // x = L⁻ᵀ ξ has covariance (L Lᵀ)⁻¹ = M⁻¹.
        const auto Lt = L_.transpose().triangularView<Eigen::Upper>();
        xr = Lt.solve(xr);
        xi = Lt.solve(xi);
    } else if (c > 0.0) {
        // x = ξ + √c·L_B⁻ᵀ ζ has covariance I + c B⁻¹ = M⁻¹.
        Eigen::VectorXd yr(N_), yi(N_);
        for (int k = 0; k < N_; ++k) {
            yr(k) = rng.normal();
            yi(k) = rng.normal();
        }
        for (int k = N_ - 1; k >= 0; --k) {
            if (k + 1 < N_) {
                yr(k) -= e_(k + 1) * yr(k + 1);
                yi(k) -= e_(k + 1) * yi(k + 1);
            }
            yr(k) /= d_(k);
            yi(k) /= d_(k);
        }
        const double sc = std::sqrt(c);
        xr += sc * yr;
        xi += sc * yi;
    }
    for (int k = 0; k < N_; ++k) path.dw[static_cast<std::size_t>(k)] = scale * cplx(xr(k), xi(k));
}

WienerPath sample_modified(int N, double dt, double kappa, std::uint64_t seed, std::uint64_t stream,
                           ModifiedSampler::Method method) {
    const ModifiedSampler sampler(N, dt, kappa, method);
    WienerPath path;
    PathRng rng(seed, stream);
    sampler.draw(path, rng);
    return path;
}

namespace {

Trajectory propagate_hc(const WienerPath& path) {
    Trajectory traj;
    const int N = path.steps();
    traj.times.reserve(static_cast<std::size_t>(N) + 1);
    traj.hc.reserve(static_cast<std::size_t>(N) + 1);
    traj.times.push_back(0.0);
    traj.hc.push_back(HCCoords::identity());
    for (int k = 0; k < N; ++k) {
        traj.hc.push_back(increment_left_multiply(traj.hc.back(), path.dw[static_cast<std::size_t>(k)],
                                                  path.kappa, path.dt));
        traj.times.push_back((k + 1) * path.dt);
    }
    return traj;
}

}  // namespace

Trajectory propagate_cartan_from(const WienerPath& path, int seed_step, CartanScheme scheme) {
    const int N = path.steps();
    if (!(path.kappa > 0.0)) throw SingularChartError("propagate_sde: Cartan chart needs kappa > 0 (r stays 0)");
    if (seed_step < 1 || seed_step > N) throw SingularChartError("propagate_sde: Cartan seed must be at t >= dt");
    Trajectory traj = propagate_hc(path);
    traj.cartan.reserve(static_cast<std::size_t>(N));
    for (int k = 1; k <= seed_step; ++k) traj.cartan.push_back(hc_to_cartan(traj.hc[static_cast<std::size_t>(k)]));
    for (int k = seed_step; k < N; ++k) {
        const cplx dw = path.dw[static_cast<std::size_t>(k)];
        const CartanCoords y = traj.cartan.back();
        traj.cartan.push_back(scheme == CartanScheme::ItoEuler ? cartan_ito_euler_step(y, dw, path.kappa, path.dt)
                                                               : cartan_midpoint_step(y, dw, path.kappa, path.dt));
    }
    return traj;
}

Trajectory propagate_sde(const WienerPath& path, Chart chart, CartanScheme scheme) {
    if (chart == Chart::HC) return propagate_hc(path);
    return propagate_cartan_from(path, 1, scheme);
}

ClosedFormTables::ClosedFormTables(int N_, double dt_, double kappa_) : N(N_), dt(dt_), kappa(kappa_) {
    if (2.0 * kappa * dt * N > 600.0) throw NumericalDomainError("closed-form sums: 2kappa*T too large");
    const auto n = static_cast<std::size_t>(N);
    nu_w.resize(n);
    mu_w.resize(n);
    down.resize(n);
    up.resize(n);
    for (int k = 0; k < N; ++k) {
        const auto i = static_cast<std::size_t>(k);
        nu_w[i] = std::exp(-2.0 * kappa * dt * (N - 1 - k));
        mu_w[i] = std::exp(-2.0 * kappa * dt * k);
        down[i] = std::exp(-2.0 * kappa * dt * (k - 1));
        up[i] = std::exp(2.0 * kappa * dt * k);
    }
}

HCCoords closed_form_hc(const WienerPath& path) {
    return closed_form_hc(path, ClosedFormTables(path.steps(), path.dt, path.kappa));
}

HCCoords closed_form_hc(const WienerPath& path, const ClosedFormTables& t) {
    const int N = path.steps();
    if (N != t.N || path.dt != t.dt || path.kappa != t.kappa)
        throw ContractError("closed_form_hc: tables built for a different (N, dt, kappa)");
    const double kappa = path.kappa;
    const double sk = std::sqrt(kappa);
    HCCoords x;
    x.r = 2.0 * kappa * path.dt * N;
    // The double-sum weight splits as e^{−2κ t_{k−1}}·e^{2κ t_l}, so it runs as a prefix sum.
    cplx prefix{0.0, 0.0};
    double diag = 0.0;
    cplx off{0.0, 0.0};
    for (int k = 0; k < N; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const cplx w = path.dw[i];
        x.nu += sk * w * t.nu_w[i];
        x.mu += sk * w * t.mu_w[i];
        diag += kappa * std::norm(w);
        if (k > 0) off += kappa * std::conj(w) * t.down[i] * prefix;
        prefix += w * t.up[i];
    }
    x.z = 0.5 * diag + off;
    return x;
}

CartanCoords closed_form_cartan(const WienerPath& path) {
    const int N = path.steps();
    const double kappa = path.kappa, dt = path.dt;
    const double r = 2.0 * kappa * dt * N;
    if (!(r > kMinRuler)) throw SingularChartError("closed_form_cartan: T = 0 is singular in the Cartan chart");
    const double sk = std::sqrt(kappa);
    const double er = std::exp(-r);
    const double den = -std::expm1(-2.0 * r);
    CartanCoords y;
    y.r = r;
    for (int k = 0; k < N; ++k) {
        const cplx c = sk * path.dw[static_cast<std::size_t>(k)];
        const double p = std::exp(-2.0 * kappa * dt * (N - 1 - k));  // ν weight
        const double u = std::exp(-2.0 * kappa * dt * k);            // μ weight
        y.beta += c * (p + er * u) / den;
        y.alpha += c * (u + er * p) / den;
    }
    const HCCoords x = closed_form_hc(path);
    const auto g = gauge_functions(y);
    y.ell = x.s() - g.f;
    y.phi = x.psi() - g.xi;
    return y;
}

double toeplitz_center(const WienerPath& path) {
    const double rho = std::exp(-2.0 * path.kappa * path.dt);
    double quad = 0.0;
    cplx run{0.0, 0.0};  // Σ_{l<k} dw_l ρ^{k−l}
    for (const cplx w : path.dw) {
        quad += std::norm(w) + 2.0 * (std::conj(w) * run).real();
        run = rho * (run + w);
    }
    return -0.5 * path.kappa * quad;
}

Eigen::MatrixXd sample_increment_covariance(const ModifiedSampler& sampler, int n_paths, std::uint64_t seed,
                                            Execution exec) {
    const int N = sampler.steps();
    constexpr int kBatch = 512;
    const int n_batches = (n_paths + kBatch - 1) / kBatch;
    std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(n_batches));
    for_each_index(exec, n_batches, [&](std::int64_t b) {
        const int first = static_cast<int>(b) * kBatch;
        const int count = std::min(kBatch, n_paths - first);
        Eigen::MatrixXd X(N, 2 * count);  // real and imaginary parts as columns
        WienerPath path;
        for (int j = 0; j < count; ++j) {
            PathRng rng(seed, static_cast<std::uint64_t>(first + j));
            sampler.draw(path, rng);
            for (int k = 0; k < N; ++k) {
                X(k, 2 * j) = path.dw[static_cast<std::size_t>(k)].real();
                X(k, 2 * j + 1) = path.dw[static_cast<std::size_t>(k)].imag();
            }
        }
        // Re(dw_k* dw_l) = Re_k Re_l + Im_k Im_l.
        Eigen::MatrixXd S = Eigen::MatrixXd::Zero(N, N);
        S.selfadjointView<Eigen::Lower>().rankUpdate(X);
        partial[static_cast<std::size_t>(b)] = S.selfadjointView<Eigen::Lower>();
    });
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N, N);
    for (const auto& S : partial) C += S;
    return C / static_cast<double>(n_paths);
}

FockOperator kraus_time_ordered(const WienerPath& path, int dim) {
    const auto ops = canonical_operators(dim);
    const double sk = std::sqrt(path.kappa);
    const FockOperator drift = -2.0 * path.kappa * path.dt * ops.Ho;
    FockOperator L = FockOperator::Identity(dim, dim);
    for (const cplx w : path.dw) {
        const FockOperator G = drift + sk * (std::conj(w) * ops.a + w * ops.a_dag);
        L = matrix_exponential(G) * L;
    }
    if (!L.allFinite()) throw NumericalDomainError("kraus_time_ordered: operator norm overflow");
    return L;
}

WienerPath coarsen(const WienerPath& fine, int factor) {
    if (factor < 1 || fine.steps() % factor != 0)
        throw ContractError("coarsen: factor must divide the number of steps");
    WienerPath coarse{fine.dt * factor, fine.kappa, {}};
    coarse.dw.assign(static_cast<std::size_t>(fine.steps() / factor), cplx{0.0, 0.0});
    for (int k = 0; k < fine.steps(); ++k)
        coarse.dw[static_cast<std::size_t>(k / factor)] += fine.dw[static_cast<std::size_t>(k)];
    return coarse;
}

void write_trajectory_csv(std::ostream& os, const WienerPath& path, const Trajectory& traj) {
    const bool cartan = !traj.cartan.empty();
    os << "k,t,re_dw,im_dw,re_nu,im_nu,r,s,psi,re_mu,im_mu";
    if (cartan) os << ",re_beta,im_beta,phi,ell,re_alpha,im_alpha";
    os << '\n';
    os.precision(17);
    for (int k = 0; k < path.steps(); ++k) {
        const cplx w = path.dw[static_cast<std::size_t>(k)];
        const HCCoords& x = traj.hc[static_cast<std::size_t>(k) + 1];
        os << k << ',' << traj.times[static_cast<std::size_t>(k) + 1] << ',' << w.real() << ',' << w.imag() << ','
           << x.nu.real() << ',' << x.nu.imag() << ',' << x.r << ',' << x.s() << ',' << x.psi() << ','
           << x.mu.real() << ',' << x.mu.imag();
        if (cartan) {
            const CartanCoords& y = traj.cartan[static_cast<std::size_t>(k)];
            os << ',' << y.beta.real() << ',' << y.beta.imag() << ',' << y.phi << ',' << y.ell << ','
               << y.alpha.real() << ',' << y.alpha.imag();
        }
        os << '\n';
    }
}

}  // namespace spqm
