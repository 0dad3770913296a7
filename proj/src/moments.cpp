#include "spqm/moments.hpp"

#include <cmath>
#include <sstream>

#include "spqm/dists.hpp"
#include "spqm/errors.hpp"

namespace spqm {

namespace {

Eigen::LLT<Eigen::MatrixXd> factor(const Kernel& kernel) {
    Eigen::LLT<Eigen::MatrixXd> llt(kernel.M);
    if (llt.info() != Eigen::Success)
        throw RegimeError("kernel M is not positive definite (Cholesky failed)");
    return llt;
}

Eigen::VectorXd geometric(int N, double rho, bool reversed, int offset) {
    Eigen::VectorXd v(N);
    for (int k = 0; k < N; ++k) {
        const int lag = reversed ? (N - 1 - k + offset) : k;
        v(k) = std::pow(rho, lag);
    }
    return v;
}

}  // namespace

Kernel build_kernel(int N, double dt, double kappa) {
    if (N < 0) throw ContractError("build_kernel: N must be >= 0");
    if (!(dt > 0.0) || !(kappa >= 0.0)) throw ContractError("build_kernel: need dt > 0 and kappa >= 0");
    const double c = kappa * dt;
    if (c >= kKernelGuard) {
        std::ostringstream os;
        os << "build_kernel: kappa*dt = " << c << " outside the regime kappa*dt < " << kKernelGuard;
        throw RegimeError(os.str());
    }
    Kernel k;
    k.N = N;
    k.dt = dt;
    k.kappa = kappa;
    if (c > kKernelWarn) {
        std::ostringstream os;
        os << "kappa*dt = " << c << " > " << kKernelWarn << ": continuum-limit fidelity is degraded";
        k.warnings.push_back(os.str());
    }
    const Eigen::VectorXd lag = mu_load(N, dt, kappa);  // ρ^k, ρ = e^{−2κdt}
    k.M.resize(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) k.M(i, j) = (i == j ? 1.0 : 0.0) - c * lag(std::abs(i - j));
    return k;
}

Eigen::VectorXd nu_load(int N, double dt, double kappa) {
    return geometric(N, std::exp(-2.0 * kappa * dt), true, 0);
}

Eigen::VectorXd mu_load(int N, double dt, double kappa) {
    return geometric(N, std::exp(-2.0 * kappa * dt), false, 0);
}

Eigen::VectorXd border_load(int N, double dt, double kappa) {
    return geometric(N, std::exp(-2.0 * kappa * dt), true, 1);
}

MomentTriple direct_moments(const Kernel& kernel) {
    const auto llt = factor(kernel);
    const double c = kernel.kappa * kernel.dt;
    const Eigen::VectorXd p = nu_load(kernel.N, kernel.dt, kernel.kappa);
    const Eigen::VectorXd u = mu_load(kernel.N, kernel.dt, kernel.kappa);
    // With M = LLᵀ: ⟨x|M⁻¹|y⟩ = (L⁻¹x)·(L⁻¹y).
    const Eigen::VectorXd Lp = llt.matrixL().solve(p);
    const Eigen::VectorXd Lu = llt.matrixL().solve(u);
    return {c * Lp.squaredNorm(), c * Lu.squaredNorm(), c * Lp.dot(Lu)};
}

double schur_load(const Kernel& kernel) {
    const auto llt = factor(kernel);
    const Eigen::VectorXd b = border_load(kernel.N, kernel.dt, kernel.kappa);
    return kernel.kappa * kernel.dt * llt.matrixL().solve(b).squaredNorm();
}

double direct_determinant(const Kernel& kernel) {
    const auto llt = factor(kernel);
    const Eigen::VectorXd d = llt.matrixLLT().diagonal();
    double det = 1.0;
    for (int i = 0; i < d.size(); ++i) det *= d(i) * d(i);
    return det;
}

std::vector<double> recursive_determinant(int N, double dt, double kappa) {
    const Kernel probe = build_kernel(0, dt, kappa);  // regime check only
    (void)probe;
    const double c = kappa * dt;
    const Eigen::VectorXd lag = mu_load(N + 1, dt, kappa);
    std::vector<double> det(static_cast<std::size_t>(N) + 1);
    det[0] = 1.0;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd border(N);
    for (int j = 0; j < N; ++j) {
        // New row/column of M_{j+1}: M_{j,k} = −c ρ^{j−k}, diagonal 1 − c.
        for (int k = 0; k < j; ++k) border(k) = -c * lag(j - k);
        double schur = 1.0 - c;
        if (j > 0) {
            const Eigen::VectorXd l =
                L.topLeftCorner(j, j).triangularView<Eigen::Lower>().solve(border.head(j));
            L.row(j).head(j) = l.transpose();
            schur -= l.squaredNorm();
        }
        if (!(schur > 0.0)) throw RegimeError("recursive_determinant: non-positive Schur complement");
        L(j, j) = std::sqrt(schur);
        det[static_cast<std::size_t>(j) + 1] = det[static_cast<std::size_t>(j)] * schur;
    }
    return det;
}

Eigen::MatrixXd kernel_inverse(const Kernel& kernel) {
    const auto llt = factor(kernel);
    return llt.solve(Eigen::MatrixXd::Identity(kernel.N, kernel.N));
}

double persymmetry_defect(const Eigen::MatrixXd& Minv) {
    const Eigen::Index N = Minv.rows();
    double worst = 0.0;
    for (Eigen::Index k = 0; k < N; ++k)
        for (Eigen::Index l = 0; l < N; ++l)
            worst = std::max(worst, std::abs(Minv(k, l) - Minv(N - 1 - l, N - 1 - k)));
    return worst;
}

RiccatiSolution riccati_integrate(double kappa, double T, int steps) {
    if (!(kappa > 0.0) || !(T >= 0.0)) throw ContractError("riccati_integrate: need kappa > 0, T >= 0");
    if (steps < 0 || (T > 0.0 && (steps < 1 || steps < kRiccatiMinStepsPerUnit * kappa * T)))
        throw ContractError("riccati_integrate: need at least 100 steps per unit kappa*T");
    using State = Eigen::Vector3d;
    auto rhs = [kappa](double t, const State& y) {
        const double e = std::exp(-2.0 * kappa * t);
        const double n = y(0), q = y(2);
        return State(kappa * (1.0 - n) * (1.0 - n), kappa * (q + e) * (q + e),
                     kappa * (-q * (1.0 - n) + e * (1.0 + n)));
    };
    RiccatiSolution sol;
    const double h = steps > 0 ? T / steps : 0.0;
    State y = State::Zero();
    auto record = [&](double t) {
        sol.t.push_back(t);
        sol.n.push_back(y(0));
        sol.m.push_back(y(1));
        sol.q.push_back(y(2));
    };
    record(0.0);
    for (int i = 0; i < steps; ++i) {
        const double t = i * h;
        const State k1 = rhs(t, y);
        const State k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        const State k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        const State k4 = rhs(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        record((i + 1) * h);
    }
    return sol;
}

AnalyticMoments analytic_moments(double kT) {
    if (!(kT >= 0.0)) throw ContractError("analytic_moments: kT must be >= 0");
    AnalyticMoments a;
    a.n = kT / (1.0 + kT);
    a.m = a.n;
    a.q = 1.0 / (1.0 + kT) - std::exp(-2.0 * kT);
    a.n_plus_q = -std::expm1(-2.0 * kT);
    a.n_minus_q = (1.0 + std::exp(-2.0 * kT)) * sigma_width(kT) / (1.0 + kT);
    return a;
}

double analytic_determinant(double kT) { return std::exp(-2.0 * kT) * (1.0 + kT); }

}  // namespace spqm
