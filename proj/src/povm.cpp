#include "spqm/povm.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "spqm/dists.hpp"
#include "spqm/errors.hpp"
#include "spqm/paths.hpp"
#include "spqm/quadrature.hpp"

namespace spqm {

namespace {

Eigen::VectorXd ruler_diagonal(int dim, double r) {
    Eigen::VectorXd d(dim);
    for (int n = 0; n < dim; ++n) d(n) = std::exp(-r * (n + 0.5));
    return d;
}

}  // namespace

PartitionCheck partition_function_check(double kT, int dim) {
    if (!(kT > 0.0)) throw ContractError("partition_function_check: kT must be > 0");
    const auto ops = canonical_operators(dim);
    const FockOperator E = matrix_exponential(-4.0 * kT * ops.Ho);
    PartitionCheck pc;
    pc.trace = E.trace().real();
    pc.closed_form = 1.0 / (2.0 * std::sinh(2.0 * kT));
    pc.residual = std::abs(pc.trace / pc.closed_form - 1.0);
    if (dim * 4.0 * kT < 30.0) {
        pc.truncation_warning = true;
        std::ostringstream os;
        os << "dim*4kT = " << dim * 4.0 * kT << " < 30: truncated tail e^{-4kT dim} may exceed 1e-12";
        pc.warning = os.str();
    }
    return pc;
}

CMatrix completeness_operator(double kT, int dim, int radial_nodes, int angular_nodes) {
    if (!(kT > 0.0)) throw ContractError("completeness_quadrature: kT must be > 0");
    if (dim < 2) throw InvalidDimension("completeness_quadrature: dim must be >= 2");
    if (radial_nodes < 1 || angular_nodes < 1) throw ContractError("completeness_quadrature: need nodes >= 1");
    const auto lag = gauss_laguerre(radial_nodes);
    const Eigen::VectorXd E = ruler_diagonal(dim, 4.0 * kT);
    CMatrix S = CMatrix::Zero(dim, dim);
    // ∫d²α/π F = (1/2π)∫dt dθ F with t = |α|²; the e^{−t} of the Laguerre weight is
    // carried by F itself, so F·e^{t} is summed.
    for (std::size_t i = 0; i < lag.nodes.size(); ++i) {
        const double t = lag.nodes[i];
        const double rad = std::sqrt(t);
        CMatrix ring = CMatrix::Zero(dim, dim);
        for (int j = 0; j < angular_nodes; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / angular_nodes;
            const CMatrix B = displacement_block(dim, dim, std::polar(rad, theta)) * std::exp(0.5 * t);
            ring += B * E.asDiagonal() * B.adjoint();
        }
        S += lag.weights[i] * ring;
    }
    return (2.0 * std::sinh(2.0 * kT) / angular_nodes) * S;
}

CompletenessResult completeness_quadrature(double kT, int dim, int radial_nodes, int angular_nodes) {
    CompletenessResult res;
    res.radial_nodes = radial_nodes;
    res.angular_nodes = angular_nodes;
    const int k = interior_size(dim);
    const CMatrix I = CMatrix::Identity(k, k);
    const CMatrix S = completeness_operator(kT, dim, radial_nodes, angular_nodes);
    res.deviation = operator_norm(S.topLeftCorner(k, k) - I);
    const double schur = 2.0 * std::sinh(2.0 * kT) * ruler_diagonal(dim, 4.0 * kT).sum();
    res.schur_deviation = operator_norm(S.topLeftCorner(k, k) - schur * I);
    const CMatrix S2 = completeness_operator(kT, dim, 2 * radial_nodes, angular_nodes);
    res.refined_deviation = operator_norm(S2.topLeftCorner(k, k) - I);
    // Converged when refinement does not move the deviation, or both sit at roundoff.
    res.grid_converged = std::abs(res.refined_deviation - res.deviation) <= 0.1 * res.deviation + 1e-12;
    return res;
}

double beta_marginal_weight(double kT, cplx alpha, int nodes) {
    const double sig = sigma_width(kT);
    const auto gh = gauss_hermite(nodes);
    const double s = std::sqrt(sig);
    double total = 0.0;
    // β = α + √Σ(x + iy): d²β = Σ dx dy and the Gaussian becomes e^{−x²−y²}.
    for (std::size_t i = 0; i < gh.nodes.size(); ++i)
        for (std::size_t j = 0; j < gh.nodes.size(); ++j) {
            const cplx beta = alpha + s * cplx(gh.nodes[i], gh.nodes[j]);
            const double g = std::exp(-std::norm(beta - alpha) / sig) /
                             std::exp(-gh.nodes[i] * gh.nodes[i] - gh.nodes[j] * gh.nodes[j]);
            total += gh.weights[i] * gh.weights[j] * sig * g / (std::numbers::pi * sig);
        }
    return total;
}

CMatrix channel_reference(const CMatrix& rho, double kT) {
    const int dim = static_cast<int>(rho.rows());
    const auto ops = canonical_operators(dim);
    const CMatrix I = CMatrix::Identity(dim, dim);
    // Column-major vec: vec(AXB) = (Bᵀ ⊗ A) vec X, so ad_X = I⊗X − Xᵀ⊗I.
    auto kron = [](const CMatrix& A, const CMatrix& B) {
        CMatrix K(A.rows() * B.rows(), A.cols() * B.cols());
        for (Eigen::Index i = 0; i < A.rows(); ++i)
            for (Eigen::Index j = 0; j < A.cols(); ++j)
                K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
        return K;
    };
    const CMatrix adQ = kron(I, ops.Q) - kron(ops.Q.transpose(), I);
    const CMatrix adP = kron(I, ops.P) - kron(ops.P.transpose(), I);
    const CMatrix Z = matrix_exponential(-0.5 * kT * (adQ * adQ + adP * adP));
    const CVector out = Z * Eigen::Map<const CVector>(rho.data(), rho.size());
    return Eigen::Map<const CMatrix>(out.data(), dim, dim);
}

double trace_distance(const CMatrix& A, const CMatrix& B) {
    const CMatrix D = A - B;
    const CMatrix H = 0.5 * (D + D.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

ChannelReport channel_monte_carlo(const CMatrix& rho, double kT, int n_paths, double dt, int dim,
                                  std::uint64_t seed, double kappa, Execution exec) {
    if (rho.rows() != dim || rho.cols() != dim) throw InvalidDimension("channel_monte_carlo: rho must be dim x dim");
    if (std::abs(rho.trace() - cplx(1.0, 0.0)) > 1e-10) throw ContractError("channel_monte_carlo: rho needs unit trace");
    if ((rho - rho.adjoint()).norm() > 1e-12) throw ContractError("channel_monte_carlo: rho must be Hermitian");
    if (n_paths < 2 || !(dt > 0.0) || !(kappa > 0.0) || !(kT >= 0.0))
        throw ContractError("channel_monte_carlo: invalid parameters");
    const double steps = kT / (kappa * dt);
    const int N = static_cast<int>(std::lround(steps));
    if (std::abs(steps - N) > 1e-9 * std::max(1.0, steps))
        throw ContractError("channel_monte_carlo: T must be a multiple of dt");

    ChannelReport rep;
    rep.dim = dim;
    rep.kT = kT;
    rep.kappa = kappa;
    rep.dt = dt;
    rep.n_paths = n_paths;
    rep.seed = seed;

    std::vector<CMatrix> outs(static_cast<std::size_t>(n_paths));
    for_each_index(exec, n_paths, [&](std::int64_t i) {
        CMatrix L = CMatrix::Identity(dim, dim);
        if (N > 0) {
            WienerPath path{dt, kappa, std::vector<cplx>(static_cast<std::size_t>(N))};
            PathRng rng(seed, static_cast<std::uint64_t>(i));
            fill_wiener(path, rng);
            L = kraus_time_ordered(path, dim);
        }
        outs[static_cast<std::size_t>(i)] = L * rho * L.adjoint();
    });

    CMatrix avg = CMatrix::Zero(dim, dim);
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < outs.size(); ++i) {
        avg += outs[i];
        const double tr = outs[i].trace().real();
        const double delta = tr - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (tr - mean);
    }
    avg /= static_cast<double>(n_paths);
    rep.trace_mean = mean;
    rep.trace_std_error = std::sqrt(m2 / (n_paths - 1.0) / n_paths);
    rep.trace_deviation = std::abs(mean - 1.0);
    const double total = avg.trace().real();
    double edge = 0.0;
    for (int n = std::max(0, dim - 2); n < dim; ++n) edge += avg(n, n).real();
    rep.leakage = edge / total;
    if (rep.leakage > kLeakageLimit) {
        std::ostringstream os;
        os << "channel_monte_carlo: boundary population " << rep.leakage << " exceeds " << kLeakageLimit
           << "; increase dim";
        throw TruncationError(os.str());
    }
    rep.channel_distance = trace_distance(avg, channel_reference(rho, kT));
    return rep;
}

double late_time_coherent_residual(double kT, cplx beta, cplx alpha, int dim) {
    const auto ops = canonical_operators(dim);
    const CMatrix X = std::exp(kT) * displacement_operator(dim, beta) * matrix_exponential(-2.0 * kT * ops.Ho) *
                      displacement_operator(dim, alpha).adjoint();
    const CVector b = coherent_state(dim, beta);
    const CVector a = coherent_state(dim, alpha);
    return operator_norm(X - b * a.adjoint());
}

}  // namespace spqm
