#include "spqm/fock.hpp"

#include <array>
#include <cmath>
#include <string>

#include "spqm/errors.hpp"

namespace spqm {

namespace {

void require_dim(int dim) {
    if (dim < 2) throw InvalidDimension("truncation dimension must be >= 2, got " + std::to_string(dim));
}

double norm1(const CMatrix& X) { return X.cwiseAbs().colwise().sum().maxCoeff(); }

// Padé numerator/denominator coefficients b_0..b_m (Higham 2005, Table 10.4).
constexpr std::array<double, 4> kB3 = {120., 60., 12., 1.};
constexpr std::array<double, 6> kB5 = {30240., 15120., 3360., 420., 30., 1.};
constexpr std::array<double, 8> kB7 = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
constexpr std::array<double, 10> kB9 = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                        2162160.,     110880.,      3960.,        90.,        1.};
constexpr std::array<double, 14> kB13 = {64764752532480000., 32382376266240000., 7771770303897600.,
                                         1187353796428800.,  129060195264000.,   10559470521600.,
                                         670442572800.,      33522128640.,       1323241920.,
                                         40840800.,          960960.,            16380.,
                                         182.,               1.};
// Largest 1-norm for which degree m reaches unit roundoff backward error.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t N>
CMatrix pade_low(const CMatrix& A, const std::array<double, N>& b) {
    const Eigen::Index n = A.rows();
    const CMatrix I = CMatrix::Identity(n, n);
    const CMatrix A2 = A * A;
    CMatrix Ueven = b[1] * I;
    CMatrix V = b[0] * I;
    CMatrix Apow = I;
    for (std::size_t j = 2; j < N; j += 2) {
        Apow = Apow * A2;
        V += b[j] * Apow;
        if (j + 1 < N) Ueven += b[j + 1] * Apow;
    }
    const CMatrix U = A * Ueven;
    return (V - U).partialPivLu().solve(V + U);
}

CMatrix pade13(const CMatrix& A) {
    const auto& b = kB13;
    const Eigen::Index n = A.rows();
    const CMatrix I = CMatrix::Identity(n, n);
    const CMatrix A2 = A * A;
    const CMatrix A4 = A2 * A2;
    const CMatrix A6 = A4 * A2;
    const CMatrix U =
        A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
    const CMatrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
    return (V - U).partialPivLu().solve(V + U);
}

}  // namespace

CanonicalOperators canonical_operators(int dim) {
    require_dim(dim);
    CanonicalOperators ops;
    ops.a = FockOperator::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) ops.a(n - 1, n) = std::sqrt(static_cast<double>(n));
    ops.a_dag = ops.a.adjoint();
    const double s = 1.0 / std::sqrt(2.0);
    const cplx i(0.0, 1.0);
    ops.Q = s * (ops.a + ops.a_dag);
    ops.P = -i * s * (ops.a - ops.a_dag);
    ops.Ho = FockOperator::Zero(dim, dim);
    for (int n = 0; n < dim; ++n) ops.Ho(n, n) = n + 0.5;
    return ops;
}

FockOperator displacement_operator(int dim, cplx alpha) {
    require_dim(dim);
    const auto ops = canonical_operators(dim);
    return matrix_exponential(alpha * ops.a_dag - std::conj(alpha) * ops.a);
}

CMatrix displacement_block(int rows, int cols, cplx alpha) {
    if (rows < 1 || cols < 1) throw InvalidDimension("displacement_block: need rows, cols >= 1");
    CMatrix B(rows, cols);
    CVector v(rows);
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int m = 1; m < rows; ++m) v(m) = v(m - 1) * alpha / std::sqrt(static_cast<double>(m));
    const cplx ac = std::conj(alpha);
    for (int k = 0; k < cols; ++k) {
        B.col(k) = v;
        if (k + 1 == cols) break;
        // v ← (a† − α*) v / √(k+1); row m uses rows m−1 and m only.
        for (int m = rows - 1; m >= 0; --m) {
            const cplx up = m > 0 ? std::sqrt(static_cast<double>(m)) * v(m - 1) : cplx{0.0, 0.0};
            v(m) = (up - ac * v(m)) / std::sqrt(static_cast<double>(k + 1));
        }
    }
    return B;
}

FockOperator matrix_exponential(const FockOperator& X) {
    if (X.rows() != X.cols()) throw InvalidDimension("matrix_exponential needs a square matrix");
    if (!X.allFinite()) throw NumericalDomainError("matrix_exponential: non-finite entries");
    const double nrm = norm1(X);
    if (nrm <= kTheta3) return pade_low(X, kB3);
    if (nrm <= kTheta5) return pade_low(X, kB5);
    if (nrm <= kTheta7) return pade_low(X, kB7);
    if (nrm <= kTheta9) return pade_low(X, kB9);
    const int s = std::max(0, static_cast<int>(std::ceil(std::log2(nrm / kTheta13))));
    CMatrix R = pade13(X / std::ldexp(1.0, s));
    for (int k = 0; k < s; ++k) R = R * R;
    if (!R.allFinite()) throw NumericalDomainError("matrix_exponential: overflow");
    return R;
}

int interior_size(int dim) { return (dim + 1) / 2; }

FockOperator interior_block(const FockOperator& X) {
    const int k = interior_size(static_cast<int>(X.rows()));
    return X.topLeftCorner(k, k);
}

double operator_norm(const CMatrix& X) {
    if (X.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(X);
    return svd.singularValues()(0);
}

double interior_norm(const FockOperator& X) { return interior_block(X).norm(); }

CVector coherent_state(int dim, cplx alpha) {
    CVector vac = CVector::Zero(dim);
    vac(0) = 1.0;
    return displacement_operator(dim, alpha) * vac;
}

}  // namespace spqm
